#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fracfem/errors.hpp"
#include "fracfem/semidiscrete_fem.hpp"

namespace fracfem {

namespace {

struct Point {
    double x, y;
};

using Polygon = std::vector<Point>;

// Sutherland-Hodgman against one half-plane keep(p) >= 0, with signed distance d
template <class Dist>
Polygon clip(const Polygon& poly, Dist d) {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        const double dp = d(p);
        const double dq = d(q);
        if (dp >= 0) out.push_back(p);
        if ((dp >= 0) != (dq >= 0)) {
            const double s = dp / (dp - dq);
            out.push_back({p.x + s * (q.x - p.x), p.y + s * (q.y - p.y)});
        }
    }
    return out;
}

// area and centroid of a simple polygon
std::pair<double, Point> area_centroid(const Polygon& poly) {
    double a = 0.0, cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        const double cr = p.x * q.y - q.x * p.y;
        a += cr;
        cx += (p.x + q.x) * cr;
        cy += (p.y + q.y) * cr;
    }
    if (std::abs(a) < 1e-300) return {0.0, {0.0, 0.0}};
    return {0.5 * std::abs(a), {cx / (3.0 * a), cy / (3.0 * a)}};
}

// integral of a linear function over [lo, hi] given by its endpoint values
double trapezoid(double lo, double hi, double flo, double fhi) { return 0.5 * (hi - lo) * (flo + fhi); }

std::vector<double> load_1d(const Mesh1D& mesh, const SpatialProfile& profile) {
    const int N = mesh.interior();
    const double h = mesh.h();
    std::vector<double> b(N, 0.0);
    if (const auto* pm = std::get_if<PointMass>(&profile.shape)) {
        const int k0 = static_cast<int>(std::floor(pm->x0 / h));
        for (int k = std::max(1, k0); k <= std::min(N, k0 + 1); ++k) b[k - 1] = hat_value(mesh, k, pm->x0);
    } else if (const auto* ci = std::get_if<CharInterval>(&profile.shape)) {
        for (int k = 1; k <= N; ++k) {
            const double xl = mesh.node(k - 1), xc = mesh.node(k), xr = mesh.node(k + 1);
            double s = 0.0;
            double lo = std::max(ci->a, xl), hi = std::min(ci->b, xc);
            if (hi > lo) s += trapezoid(lo, hi, hat_value(mesh, k, lo), hat_value(mesh, k, hi));
            lo = std::max(ci->a, xc);
            hi = std::min(ci->b, xr);
            if (hi > lo) s += trapezoid(lo, hi, hat_value(mesh, k, lo), hat_value(mesh, k, hi));
            b[k - 1] = s;
        }
    } else {
        throw UnsupportedError("profile is not defined on the interval");
    }
    for (double& v : b) v *= profile.amplitude;
    return b;
}

// the six triangles around node (i, j), in units of h relative to the node
constexpr std::array<std::array<std::array<int, 2>, 3>, 6> kStar = {{
    {{{0, 0}, {1, 0}, {1, 1}}},
    {{{0, 0}, {1, 1}, {0, 1}}},
    {{{0, 0}, {0, 1}, {-1, 0}}},
    {{{0, 0}, {-1, 0}, {-1, -1}}},
    {{{0, 0}, {-1, -1}, {0, -1}}},
    {{{0, 0}, {0, -1}, {1, 0}}},
}};

std::vector<double> load_rect(const Mesh2D& mesh, const CharRect& r) {
    const int M = mesh.per_axis();
    const double h = mesh.h();
    std::vector<double> b(mesh.interior(), 0.0);
    for (int i = 1; i <= M; ++i) {
        if ((i + 1) * h <= r.a || (i - 1) * h >= r.b) continue;
        for (int j = 1; j <= M; ++j) {
            if ((j + 1) * h <= r.c || (j - 1) * h >= r.d) continue;
            double s = 0.0;
            for (const auto& tri : kStar) {
                Polygon poly;
                for (const auto& v : tri) poly.push_back({(i + v[0]) * h, (j + v[1]) * h});
                poly = clip(poly, [&](Point p) { return p.x - r.a; });
                if (poly.empty()) continue;
                poly = clip(poly, [&](Point p) { return r.b - p.x; });
                if (poly.empty()) continue;
                poly = clip(poly, [&](Point p) { return p.y - r.c; });
                if (poly.empty()) continue;
                poly = clip(poly, [&](Point p) { return r.d - p.y; });
                if (poly.size() < 3) continue;
                const auto [area, cen] = area_centroid(poly);
                s += area * hat_value(mesh, i, j, cen.x, cen.y);
            }
            b[mesh.index(i, j)] = s;
        }
    }
    return b;
}

void add_segment(const Mesh2D& mesh, Point p0, Point p1, std::vector<double>& b) {
    const int N = mesh.subdivisions();
    const double h = mesh.h();
    const double len = std::hypot(p1.x - p0.x, p1.y - p0.y);
    const double dx = p1.x - p0.x, dy = p1.y - p0.y;

    // parameters where the segment crosses x = ih, y = jh or x - y = lh
    std::vector<double> ts{0.0, 1.0};
    auto add_crossings = [&](double v0, double dv) {
        if (std::abs(dv) < 1e-300) return;
        for (int l = -N; l <= N; ++l) {
            const double t = (l * h - v0) / dv;
            if (t > 0.0 && t < 1.0) ts.push_back(t);
        }
    };
    add_crossings(p0.x, dx);
    add_crossings(p0.y, dy);
    add_crossings(p0.x - p0.y, dx - dy);
    std::sort(ts.begin(), ts.end());

    for (std::size_t s = 0; s + 1 < ts.size(); ++s) {
        const double ta = ts[s], tb = ts[s + 1];
        if (tb - ta < 1e-15) continue;
        const Point pa{p0.x + ta * dx, p0.y + ta * dy};
        const Point pb{p0.x + tb * dx, p0.y + tb * dy};
        const double mx = 0.5 * (pa.x + pb.x), my = 0.5 * (pa.y + pb.y);
        const int i0 = std::clamp(static_cast<int>(std::floor(mx / h)), 0, N - 1);
        const int j0 = std::clamp(static_cast<int>(std::floor(my / h)), 0, N - 1);
        const bool lower = (mx / h - i0) >= (my / h - j0);
        const std::array<std::array<int, 2>, 3> verts =
            lower ? std::array<std::array<int, 2>, 3>{{{i0, j0}, {i0 + 1, j0}, {i0 + 1, j0 + 1}}}
                  : std::array<std::array<int, 2>, 3>{{{i0, j0}, {i0, j0 + 1}, {i0 + 1, j0 + 1}}};
        for (const auto& v : verts) {
            if (v[0] < 1 || v[0] > N - 1 || v[1] < 1 || v[1] > N - 1) continue;
            const double fa = hat_value(mesh, v[0], v[1], pa.x, pa.y);
            const double fb = hat_value(mesh, v[0], v[1], pb.x, pb.y);
            b[mesh.index(v[0], v[1])] += 0.5 * (tb - ta) * len * (fa + fb);
        }
    }
}

std::vector<double> load_2d(const Mesh2D& mesh, const SpatialProfile& profile) {
    std::vector<double> b;
    if (const auto* r = std::get_if<CharRect>(&profile.shape)) {
        b = load_rect(mesh, *r);
    } else if (const auto* c = std::get_if<CurveMass>(&profile.shape)) {
        b.assign(mesh.interior(), 0.0);
        add_segment(mesh, {c->a, c->c}, {c->b, c->c}, b);
        add_segment(mesh, {c->b, c->c}, {c->b, c->d}, b);
        add_segment(mesh, {c->b, c->d}, {c->a, c->d}, b);
        add_segment(mesh, {c->a, c->d}, {c->a, c->c}, b);
    } else {
        throw UnsupportedError("profile is not defined on the square");
    }
    for (double& v : b) v *= profile.amplitude;
    return b;
}

}  // namespace

Mesh1D::Mesh1D(int interior_nodes) : N_(interior_nodes) {
    if (interior_nodes < 1) throw DomainError("1D mesh needs at least one interior node");
}

Mesh2D::Mesh2D(int subdivisions) : N_(subdivisions) {
    if (subdivisions < 2) throw DomainError("2D mesh needs at least two subdivisions per axis");
}

int node_count(const Mesh& mesh) {
    return std::visit([](const auto& m) { return m.interior(); }, mesh);
}

double mesh_size(const Mesh& mesh) {
    return std::visit([](const auto& m) { return m.h(); }, mesh);
}

Domain mesh_domain(const Mesh& mesh) {
    return std::holds_alternative<Mesh1D>(mesh) ? Domain::Interval01 : Domain::Square01;
}

NodalField::NodalField(Mesh m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(node_count(mesh))) {
        throw DomainError("nodal value count does not match the mesh");
    }
    for (double x : values) {
        if (!std::isfinite(x)) throw DomainError("nodal values must be finite");
    }
}

NodalField NodalField::zero(const Mesh& m) {
    return NodalField(m, std::vector<double>(node_count(m), 0.0));
}

std::vector<double> Tridiagonal::apply(const std::vector<double>& x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

std::vector<double> Tridiagonal::solve(const std::vector<double>& rhs) const {
    const std::size_t n = size();
    if (rhs.size() != n) throw DomainError("right-hand side size does not match the matrix");
    std::vector<double> c(n), d(n);
    double pivot = diag[0];
    if (pivot == 0.0) throw Error("zero pivot in tridiagonal solve");
    c[0] = n > 1 ? upper[0] / pivot : 0.0;
    d[0] = rhs[0] / pivot;
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower[i] * c[i - 1];
        if (pivot == 0.0) throw Error("zero pivot in tridiagonal solve");
        c[i] = i + 1 < n ? upper[i] / pivot : 0.0;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
    return d;
}

FemMatrices1D assemble_matrices(const Mesh1D& mesh, const Coefficient& k, const Coefficient& q) {
    const int N = mesh.interior();
    const double h = mesh.h();
    // 3-point Gauss on [0, 1]
    const double g = std::sqrt(0.6);
    const std::array<double, 3> gx{0.5 * (1 - g), 0.5, 0.5 * (1 + g)};
    const std::array<double, 3> gw{5.0 / 18, 8.0 / 18, 5.0 / 18};

    FemMatrices1D out{Tridiagonal(N), Tridiagonal(N), std::vector<double>(N, h)};
    // element e spans [x_e, x_{e+1}], e = 0..N, with local nodes e and e+1
    for (int e = 0; e <= N; ++e) {
        double kk = 0.0, q00 = 0.0, q01 = 0.0, q11 = 0.0;
        for (int p = 0; p < 3; ++p) {
            const double x = (e + gx[p]) * h;
            const double kv = k(x);
            if (!(kv > 0.0)) {
                std::ostringstream os;
                os << "diffusion coefficient not positive at x = " << x << " (k = " << kv << ")";
                throw DomainError(os.str());
            }
            const double qv = q(x);
            const double l0 = 1.0 - gx[p], l1 = gx[p];
            kk += gw[p] * kv;
            q00 += gw[p] * qv * l0 * l0;
            q01 += gw[p] * qv * l0 * l1;
            q11 += gw[p] * qv * l1 * l1;
        }
        kk /= h;  // (1/h^2) * h * mean
        q00 *= h;
        q01 *= h;
        q11 *= h;
        const int a = e, b = e + 1;  // global node numbers, interior are 1..N
        auto& S = out.stiffness;
        auto& Mc = out.mass;
        if (a >= 1) {
            S.diag[a - 1] += kk + q00;
            Mc.diag[a - 1] += h / 3.0;
        }
        if (b <= N) {
            S.diag[b - 1] += kk + q11;
            Mc.diag[b - 1] += h / 3.0;
        }
        if (a >= 1 && b <= N) {
            S.upper[a - 1] += -kk + q01;
            S.lower[b - 1] += -kk + q01;
            Mc.upper[a - 1] += h / 6.0;
            Mc.lower[b - 1] += h / 6.0;
        }
    }
    return out;
}

std::vector<double> apply_stiffness(const Mesh& mesh, const std::vector<double>& x) {
    if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) {
        const int N = m1->interior();
        const double ih = 1.0 / m1->h();
        std::vector<double> y(N);
        for (int k = 0; k < N; ++k) {
            double s = 2.0 * x[k];
            if (k > 0) s -= x[k - 1];
            if (k + 1 < N) s -= x[k + 1];
            y[k] = s * ih;
        }
        return y;
    }
    const auto& m2 = std::get<Mesh2D>(mesh);
    const int M = m2.per_axis();
    std::vector<double> y(x.size());
    auto at = [&](int i, int j) { return (i < 1 || j < 1 || i > M || j > M) ? 0.0 : x[m2.index(i, j)]; };
    for (int i = 1; i <= M; ++i) {
        for (int j = 1; j <= M; ++j) {
            y[m2.index(i, j)] = 4.0 * at(i, j) - at(i - 1, j) - at(i + 1, j) - at(i, j - 1) - at(i, j + 1);
        }
    }
    return y;
}

std::vector<double> apply_mass(const Mesh& mesh, const std::vector<double>& x) {
    if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) {
        const int N = m1->interior();
        const double w = m1->h() / 6.0;
        std::vector<double> y(N);
        for (int k = 0; k < N; ++k) {
            double s = 4.0 * x[k];
            if (k > 0) s += x[k - 1];
            if (k + 1 < N) s += x[k + 1];
            y[k] = s * w;
        }
        return y;
    }
    const auto& m2 = std::get<Mesh2D>(mesh);
    const int M = m2.per_axis();
    const double w = m2.h() * m2.h() / 12.0;
    std::vector<double> y(x.size());
    auto at = [&](int i, int j) { return (i < 1 || j < 1 || i > M || j > M) ? 0.0 : x[m2.index(i, j)]; };
    for (int i = 1; i <= M; ++i) {
        for (int j = 1; j <= M; ++j) {
            y[m2.index(i, j)] = w * (6.0 * at(i, j) + at(i - 1, j) + at(i + 1, j) + at(i, j - 1) + at(i, j + 1) +
                                     at(i + 1, j + 1) + at(i - 1, j - 1));
        }
    }
    return y;
}

double lumped_weight(const Mesh& mesh) {
    const double h = mesh_size(mesh);
    return std::holds_alternative<Mesh1D>(mesh) ? h : h * h;
}

std::vector<double> conjugate_gradient(const std::function<std::vector<double>(const std::vector<double>&)>& op,
                                       const std::vector<double>& rhs, double tol) {
    const std::size_t n = rhs.size();
    std::vector<double> x(n, 0.0), r = rhs, p = rhs;
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };
    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) return x;
    double rr = dot(r, r);
    const std::size_t max_iter = 10 * n + 100;
    for (std::size_t it = 0; it < max_iter; ++it) {
        if (std::sqrt(rr) <= tol * bnorm) return x;
        const auto Ap = op(p);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0.0)) throw EvaluationError("cg", "operator is not positive definite");
        const double a = rr / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += a * p[i];
            r[i] -= a * Ap[i];
        }
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    throw EvaluationError("cg", "conjugate gradients did not converge");
}

double hat_value(const Mesh1D& mesh, int k, double x) {
    const double u = std::abs(x / mesh.h() - k);
    return u >= 1.0 ? 0.0 : 1.0 - u;
}

double hat_value(const Mesh2D& mesh, int i, int j, double x, double y) {
    const double u = x / mesh.h() - i;
    const double v = y / mesh.h() - j;
    const double r = std::max({std::abs(u), std::abs(v), std::abs(u - v)});
    return r >= 1.0 ? 0.0 : 1.0 - r;
}

std::vector<double> load_vector(const Mesh& mesh, const SpatialProfile& profile) {
    profile.validate();
    if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) return load_1d(*m1, profile);
    return load_2d(std::get<Mesh2D>(mesh), profile);
}

}  // namespace fracfem
