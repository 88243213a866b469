#include "fracfem/semidiscrete_fem.hpp"

#include <cmath>
#include <numbers>

#include "fracfem/errors.hpp"
#include "fracfem/trig.hpp"

namespace fracfem {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Tridiagonal mass_tridiagonal(const Mesh1D& mesh) {
    const int N = mesh.interior();
    const double h = mesh.h();
    Tridiagonal M(N);
    for (int k = 0; k < N; ++k) {
        M.diag[k] = 4.0 * h / 6.0;
        M.lower[k] = M.upper[k] = h / 6.0;
    }
    return M;
}

Tridiagonal stiffness_tridiagonal(const Mesh1D& mesh) {
    const int N = mesh.interior();
    const double ih = 1.0 / mesh.h();
    Tridiagonal S(N);
    for (int k = 0; k < N; ++k) {
        S.diag[k] = 2.0 * ih;
        S.lower[k] = S.upper[k] = -ih;
    }
    return S;
}

// solve with the consistent mass matrix
std::vector<double> mass_solve(const Mesh& mesh, const std::vector<double>& rhs) {
    if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) return mass_tridiagonal(*m1).solve(rhs);
    return conjugate_gradient([&](const std::vector<double>& x) { return apply_mass(mesh, x); }, rhs);
}

std::vector<double> stiffness_solve(const Mesh& mesh, const std::vector<double>& rhs) {
    if (const auto* m1 = std::get_if<Mesh1D>(&mesh)) return stiffness_tridiagonal(*m1).solve(rhs);
    return conjugate_gradient([&](const std::vector<double>& x) { return apply_stiffness(mesh, x); }, rhs);
}

}  // namespace

NodalField project_source(const Mesh& mesh, SchemeKind scheme, const SpatialProfile& profile,
                          Projection projection) {
    if (mesh_domain(mesh) != profile.domain()) throw UnsupportedError("profile and mesh live on different domains");
    auto b = load_vector(mesh, profile);
    const bool l2 = projection == Projection::L2 || scheme == SchemeKind::Galerkin;
    if (l2) return NodalField(mesh, mass_solve(mesh, b));
    const double w = lumped_weight(mesh);
    for (double& v : b) v /= w;
    return NodalField(mesh, std::move(b));
}

DiscreteSpectrum::DiscreteSpectrum(Mesh mesh, SchemeKind scheme) : mesh_(std::move(mesh)), scheme_(scheme) {
    if (std::holds_alternative<Mesh2D>(mesh_)) {
        if (scheme_ == SchemeKind::Galerkin) {
            throw UnsupportedError("standard Galerkin eigenpairs are only available in 1D");
        }
        M_ = std::get<Mesh2D>(mesh_).per_axis();
    } else {
        M_ = std::get<Mesh1D>(mesh_).interior();
    }
    const std::size_t M = static_cast<std::size_t>(M_);
    sines_.resize(M * M);
    for (int a = 1; a <= M_; ++a) {
        for (int b = 1; b <= M_; ++b) {
            sines_[(a - 1) * M + (b - 1)] = sin_pi(static_cast<double>(a) * b / (M_ + 1));
        }
    }
}

int DiscreteSpectrum::mode_count() const {
    return std::holds_alternative<Mesh1D>(mesh_) ? M_ : M_ * M_;
}

double DiscreteSpectrum::eigenvalue(ModeIndex idx) const {
    const double h = mesh_size(mesh_);
    auto lumped1 = [&](int j) {
        const double s = sin_pi(0.5 * j * h);
        return 4.0 / (h * h) * s * s;
    };
    if (std::holds_alternative<Mesh1D>(mesh_)) {
        if (idx.n < 1 || idx.n > M_) throw DomainError("discrete mode index out of range");
        const double lb = lumped1(idx.n);
        if (scheme_ == SchemeKind::LumpedMass) return lb;
        return lb / (1.0 - h * h * lb / 6.0);
    }
    if (idx.n < 1 || idx.n > M_ || idx.m < 1 || idx.m > M_) throw DomainError("discrete mode index out of range");
    return lumped1(idx.n) + lumped1(idx.m);
}

double DiscreteSpectrum::scale(ModeIndex idx) const {
    if (std::holds_alternative<Mesh2D>(mesh_)) return 2.0;
    if (scheme_ == SchemeKind::LumpedMass) return std::sqrt(2.0);
    const double h = mesh_size(mesh_);
    const double s = sin_pi(0.5 * idx.n * h);
    const double lb = 4.0 / (h * h) * s * s;
    return std::sqrt(2.0 / (1.0 - h * h * lb / 6.0));
}

double DiscreteSpectrum::eigenvector_value(ModeIndex idx, int i, int j) const {
    const std::size_t M = static_cast<std::size_t>(M_);
    if (std::holds_alternative<Mesh1D>(mesh_)) {
        return scale(idx) * sines_[(idx.n - 1) * M + (i - 1)];
    }
    return scale(idx) * sines_[(idx.n - 1) * M + (i - 1)] * sines_[(idx.m - 1) * M + (j - 1)];
}

NodalField DiscreteSpectrum::eigenvector(ModeIndex idx) const {
    (void)eigenvalue(idx);  // range check
    std::vector<double> v(node_count(mesh_));
    if (std::holds_alternative<Mesh1D>(mesh_)) {
        for (int k = 1; k <= M_; ++k) v[k - 1] = eigenvector_value(idx, k);
    } else {
        const auto& m2 = std::get<Mesh2D>(mesh_);
        for (int i = 1; i <= M_; ++i) {
            for (int j = 1; j <= M_; ++j) v[m2.index(i, j)] = eigenvector_value(idx, i, j);
        }
    }
    return NodalField(mesh_, std::move(v));
}

std::vector<double> DiscreteSpectrum::analyze(const std::vector<double>& nodal) const {
    const std::size_t M = static_cast<std::size_t>(M_);
    if (nodal.size() != static_cast<std::size_t>(node_count(mesh_))) throw DomainError("nodal vector size mismatch");
    if (std::holds_alternative<Mesh1D>(mesh_)) {
        std::vector<double> c(M, 0.0);
        for (std::size_t a = 0; a < M; ++a) {
            const double* row = &sines_[a * M];
            double s = 0.0;
            for (std::size_t k = 0; k < M; ++k) s += row[k] * nodal[k];
            c[a] = scale({static_cast<int>(a) + 1, 0}) * s;
        }
        return c;
    }
    // separable transform: first along i, then along j
    std::vector<double> tmp(M * M, 0.0), c(M * M, 0.0);
    for (std::size_t n = 0; n < M; ++n) {
        for (std::size_t i = 0; i < M; ++i) {
            const double s = sines_[n * M + i];
            const double* src = &nodal[i * M];
            double* dst = &tmp[n * M];
            for (std::size_t j = 0; j < M; ++j) dst[j] += s * src[j];
        }
    }
    for (std::size_t n = 0; n < M; ++n) {
        for (std::size_t m = 0; m < M; ++m) {
            const double* row = &sines_[m * M];
            const double* t = &tmp[n * M];
            double s = 0.0;
            for (std::size_t j = 0; j < M; ++j) s += row[j] * t[j];
            c[n * M + m] = 2.0 * s;
        }
    }
    return c;
}

std::vector<double> DiscreteSpectrum::synthesize(const std::vector<double>& coeffs) const {
    // the sine matrix is symmetric, so synthesis is analysis with the same scaling
    if (std::holds_alternative<Mesh1D>(mesh_)) {
        const std::size_t M = static_cast<std::size_t>(M_);
        if (coeffs.size() != M) throw DomainError("coefficient vector size mismatch");
        std::vector<double> u(M, 0.0);
        for (std::size_t a = 0; a < M; ++a) {
            const double c = coeffs[a] * scale({static_cast<int>(a) + 1, 0});
            if (c == 0.0) continue;
            const double* row = &sines_[a * M];
            for (std::size_t k = 0; k < M; ++k) u[k] += c * row[k];
        }
        return u;
    }
    return analyze(coeffs);
}

std::vector<double> DiscreteSpectrum::apply_scheme_mass(const std::vector<double>& x) const {
    if (scheme_ == SchemeKind::Galerkin) return apply_mass(mesh_, x);
    std::vector<double> y = x;
    const double w = lumped_weight(mesh_);
    for (double& v : y) v *= w;
    return y;
}

SemidiscreteSolution::SemidiscreteSolution(const DiscreteSpectrum& spectrum, FracOrder alpha,
                                           const SourceTerm& source, Projection projection)
    : spectrum_(&spectrum), relax_(alpha), temporal_(source.temporal) {
    const auto fh = project_source(spectrum.mesh(), spectrum.scheme(), source.spatial, projection);
    coeffs_ = spectrum.analyze(spectrum.apply_scheme_mass(fh.values));
    const int M = spectrum.modes_per_axis();
    lambdas_.resize(coeffs_.size());
    if (std::holds_alternative<Mesh1D>(spectrum.mesh())) {
        for (int j = 1; j <= M; ++j) lambdas_[j - 1] = spectrum.eigenvalue({j, 0});
    } else {
        for (int n = 1; n <= M; ++n) {
            for (int m = 1; m <= M; ++m) lambdas_[(n - 1) * M + (m - 1)] = spectrum.eigenvalue({n, m});
        }
    }
}

NodalField SemidiscreteSolution::at(double t) const {
    std::vector<double> c(coeffs_.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        c[i] = coeffs_[i] == 0.0 ? 0.0 : coeffs_[i] * mode_response(relax_, lambdas_[i], temporal_, t);
    }
    return NodalField(spectrum_->mesh(), spectrum_->synthesize(c));
}

NodalField semidiscrete_solve(const DiscreteSpectrum& spectrum, FracOrder alpha, const SourceTerm& source,
                              double t, Projection projection) {
    return SemidiscreteSolution(spectrum, alpha, source, projection).at(t);
}

NodalField quadrature_error_apply(const NodalField& chi) {
    const auto& mesh = chi.mesh;
    auto rhs = apply_mass(mesh, chi.values);
    const double w = lumped_weight(mesh);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = w * chi.values[i] - rhs[i];
    return NodalField(mesh, stiffness_solve(mesh, rhs));
}

double fe_l2_norm_squared(const NodalField& u) { return dot(u.values, apply_mass(u.mesh, u.values)); }

double fe_h1_seminorm_squared(const NodalField& u) { return dot(u.values, apply_stiffness(u.mesh, u.values)); }

}  // namespace fracfem
