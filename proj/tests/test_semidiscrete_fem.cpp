#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fracfem/errors.hpp"
#include "fracfem/semidiscrete_fem.hpp"
#include "oracles.hpp"

using namespace fracfem;

namespace {
constexpr double pi = std::numbers::pi;

oracle::Dense dense_of(const Mesh& mesh, std::vector<double> (*op)(const Mesh&, const std::vector<double>&)) {
    const int n = node_count(mesh);
    oracle::Dense A(n);
    for (int c = 0; c < n; ++c) {
        std::vector<double> e(n, 0.0);
        e[c] = 1.0;
        const auto col = op(mesh, e);
        for (int r = 0; r < n; ++r) A(r, c) = col[r];
    }
    return A;
}

std::vector<double> sorted_spectrum(const DiscreteSpectrum& sp) {
    std::vector<double> ev;
    const int M = sp.modes_per_axis();
    if (std::holds_alternative<Mesh1D>(sp.mesh())) {
        for (int j = 1; j <= M; ++j) ev.push_back(sp.eigenvalue({j, 0}));
    } else {
        for (int n = 1; n <= M; ++n)
            for (int m = 1; m <= M; ++m) ev.push_back(sp.eigenvalue({n, m}));
    }
    std::sort(ev.begin(), ev.end());
    return ev;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
}  // namespace

TEST_CASE("closed-form discrete eigenvalues") {
    DiscreteSpectrum lumped(Mesh1D(1), SchemeKind::LumpedMass);
    DiscreteSpectrum galerkin(Mesh1D(1), SchemeKind::Galerkin);
    CHECK(lumped.eigenvalue({1, 0}) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(galerkin.eigenvalue({1, 0}) == doctest::Approx(12.0).epsilon(1e-14));
    DiscreteSpectrum fine(Mesh1D(2047), SchemeKind::Galerkin);
    CHECK(fine.eigenvalue({1, 0}) == doctest::Approx(pi * pi).epsilon(1e-6));
    CHECK_THROWS_AS(DiscreteSpectrum(Mesh2D(8), SchemeKind::Galerkin), UnsupportedError);
    CHECK_THROWS_AS(lumped.eigenvalue({2, 0}), DomainError);
}

TEST_CASE("eigenpairs against the dense generalized eigenproblem") {
    for (int N = 1; N <= 12; ++N) {
        const Mesh mesh = Mesh1D(N);
        const auto S = dense_of(mesh, apply_stiffness);
        const auto Mc = dense_of(mesh, apply_mass);
        oracle::Dense Ml(N);
        for (int i = 0; i < N; ++i) Ml(i, i) = lumped_weight(mesh);
        const auto eg = oracle::generalized_eigenvalues(S, Mc);
        const auto el = oracle::generalized_eigenvalues(S, Ml);
        const auto cg = sorted_spectrum(DiscreteSpectrum(mesh, SchemeKind::Galerkin));
        const auto cl = sorted_spectrum(DiscreteSpectrum(mesh, SchemeKind::LumpedMass));
        for (int j = 0; j < N; ++j) {
            CHECK(std::abs(eg[j] - cg[j]) < 1e-10);
            CHECK(std::abs(el[j] - cl[j]) < 1e-10);
        }
    }
    for (int N = 2; N <= 8; ++N) {
        const Mesh mesh = Mesh2D(N);
        const int n = node_count(mesh);
        const auto S = dense_of(mesh, apply_stiffness);
        oracle::Dense Ml(n);
        for (int i = 0; i < n; ++i) Ml(i, i) = lumped_weight(mesh);
        const auto el = oracle::generalized_eigenvalues(S, Ml);
        const auto cl = sorted_spectrum(DiscreteSpectrum(mesh, SchemeKind::LumpedMass));
        for (int j = 0; j < n; ++j) CHECK(std::abs(el[j] - cl[j]) < 1e-10);
    }
}

TEST_CASE("discrete orthonormality and eigen relation") {
    for (auto scheme : {SchemeKind::Galerkin, SchemeKind::LumpedMass}) {
        DiscreteSpectrum sp(Mesh1D(9), scheme);
        for (int i = 1; i <= 9; ++i) {
            const auto vi = sp.eigenvector({i, 0}).values;
            const auto Svi = apply_stiffness(sp.mesh(), vi);
            const auto Mvi = sp.apply_scheme_mass(vi);
            for (int k = 0; k < 9; ++k) CHECK(std::abs(Svi[k] - sp.eigenvalue({i, 0}) * Mvi[k]) < 1e-10);
            for (int j = 1; j <= 9; ++j) {
                const auto vj = sp.eigenvector({j, 0}).values;
                CHECK(std::abs(dot(vj, Mvi) - (i == j ? 1.0 : 0.0)) < 1e-10);
            }
        }
    }
    DiscreteSpectrum sp(Mesh2D(6), SchemeKind::LumpedMass);
    for (ModeIndex a : {ModeIndex{1, 1}, ModeIndex{2, 3}, ModeIndex{5, 4}}) {
        for (ModeIndex b : {ModeIndex{1, 1}, ModeIndex{3, 2}, ModeIndex{5, 4}}) {
            const double ip = dot(sp.eigenvector(a).values, sp.apply_scheme_mass(sp.eigenvector(b).values));
            CHECK(std::abs(ip - (a.n == b.n && a.m == b.m ? 1.0 : 0.0)) < 1e-10);
        }
    }
}

TEST_CASE("eigenvalue bracketing") {
    for (int N : {1, 2, 5, 16, 63, 200}) {
        DiscreteSpectrum g(Mesh1D(N), SchemeKind::Galerkin);
        DiscreteSpectrum l(Mesh1D(N), SchemeKind::LumpedMass);
        const double h = 1.0 / (N + 1);
        for (int j = 1; j <= N; ++j) {
            const double lam = j * j * pi * pi;
            CHECK(l.eigenvalue({j, 0}) <= lam);
            CHECK(lam <= g.eigenvalue({j, 0}));
            const double lb = l.eigenvalue({j, 0});
            const double denom = 1.0 - h * h * lb / 6.0;
            CHECK(denom > 1.0 / 3.0);
            CHECK(denom <= 1.0);
            if (j > 1) CHECK(g.eigenvalue({j, 0}) > g.eigenvalue({j - 1, 0}));
        }
    }
}

TEST_CASE("analysis and synthesis are inverse") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    for (const Mesh mesh : {Mesh(Mesh1D(13)), Mesh(Mesh2D(9))}) {
        for (auto scheme : {SchemeKind::Galerkin, SchemeKind::LumpedMass}) {
            if (std::holds_alternative<Mesh2D>(mesh) && scheme == SchemeKind::Galerkin) continue;
            DiscreteSpectrum sp(mesh, scheme);
            std::vector<double> x(node_count(mesh));
            for (auto& v : x) v = U(rng);
            const auto back = sp.synthesize(sp.analyze(sp.apply_scheme_mass(x)));
            for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("assembly") {
    auto one = [](double) { return 1.0; };
    auto zero = [](double) { return 0.0; };
    const auto mats = assemble_matrices(Mesh1D(3), one, zero);
    for (int k = 0; k < 3; ++k) {
        CHECK(mats.stiffness.diag[k] == doctest::Approx(8.0));
        CHECK(mats.lumped_mass[k] == doctest::Approx(0.25));
        CHECK(mats.mass.diag[k] == doctest::Approx(4 * 0.25 / 6));
    }
    CHECK(mats.stiffness.upper[0] == doctest::Approx(-4.0));
    CHECK(mats.stiffness.lower[2] == doctest::Approx(-4.0));
    CHECK(mats.mass.upper[1] == doctest::Approx(0.25 / 6));

    const int N = 63;
    const Mesh1D mesh(N);
    const double h = mesh.h();
    auto k = [](double x) { return 3.0 + std::sin(2 * pi * x); };
    const auto var = assemble_matrices(mesh, k, zero);
    using boost::math::quadrature::gauss_kronrod;
    for (int i = 1; i <= N; ++i) {
        const double left = gauss_kronrod<double, 31>::integrate(k, (i - 1) * h, i * h, 5, 1e-15);
        const double right = gauss_kronrod<double, 31>::integrate(k, i * h, (i + 1) * h, 5, 1e-15);
        CHECK(var.stiffness.diag[i - 1] == doctest::Approx((left + right) / (h * h)).epsilon(1e-12));
        if (i < N) CHECK(var.stiffness.upper[i - 1] == doctest::Approx(-right / (h * h)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(assemble_matrices(mesh, [](double x) { return x - 0.5; }, zero), DomainError);
    // reaction term adds the q-weighted mass
    const auto react = assemble_matrices(Mesh1D(3), one, [](double) { return 2.0; });
    CHECK(react.stiffness.diag[1] == doctest::Approx(8.0 + 2.0 * 4 * 0.25 / 6));
}

TEST_CASE("thomas solver") {
    Tridiagonal T(5);
    for (int i = 0; i < 5; ++i) {
        T.diag[i] = 4.0 + i;
        T.lower[i] = -1.0 - 0.1 * i;
        T.upper[i] = -0.5;
    }
    const std::vector<double> x{1, -2, 3, 0.5, 7};
    const auto y = T.solve(T.apply(x));
    for (int i = 0; i < 5; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-14));
}

TEST_CASE("load vectors reproduce moments") {
    // hats are a partition of unity and reproduce linears away from the boundary
    SUBCASE("1D interval") {
        const Mesh mesh = Mesh1D(20);
        const auto b = load_vector(mesh, SpatialProfile{CharInterval{0.23, 0.61}});
        double s0 = 0, s1 = 0;
        for (int k = 1; k <= 20; ++k) {
            s0 += b[k - 1];
            s1 += b[k - 1] * k / 21.0;
        }
        CHECK(s0 == doctest::Approx(0.61 - 0.23).epsilon(1e-14));
        CHECK(s1 == doctest::Approx((0.61 * 0.61 - 0.23 * 0.23) / 2).epsilon(1e-14));
    }
    SUBCASE("2D rectangle and curve, aligned and not") {
        for (auto [a, b, c, d] : {std::array{0.25, 0.75, 0.25, 0.75}, std::array{0.3, 0.71, 0.17, 0.66}}) {
            for (int N : {8, 13}) {
                const Mesh2D m2(N);
                const Mesh mesh = m2;
                const auto br = load_vector(mesh, SpatialProfile{CharRect{a, b, c, d}});
                const auto bc = load_vector(mesh, SpatialProfile{CurveMass{a, b, c, d}});
                double r0 = 0, rx = 0, ry = 0, c0 = 0, cx = 0, cy = 0;
                for (int i = 1; i < N; ++i)
                    for (int j = 1; j < N; ++j) {
                        const double x = double(i) / N, y = double(j) / N;
                        const double vr = br[m2.index(i, j)], vc = bc[m2.index(i, j)];
                        r0 += vr, rx += vr * x, ry += vr * y;
                        c0 += vc, cx += vc * x, cy += vc * y;
                    }
                CHECK(r0 == doctest::Approx((b - a) * (d - c)).epsilon(1e-13));
                CHECK(rx == doctest::Approx((b * b - a * a) / 2 * (d - c)).epsilon(1e-13));
                CHECK(ry == doctest::Approx((d * d - c * c) / 2 * (b - a)).epsilon(1e-13));
                CHECK(c0 == doctest::Approx(2 * (b - a) + 2 * (d - c)).epsilon(1e-13));
                // x-moment: horizontal edges give (b^2-a^2)/2 each, vertical edges a(d-c) and b(d-c)
                CHECK(cx == doctest::Approx((b * b - a * a) + (a + b) * (d - c)).epsilon(1e-13));
                CHECK(cy == doctest::Approx((d * d - c * c) + (c + d) * (b - a)).epsilon(1e-13));
            }
        }
    }
    SUBCASE("grid-aligned curve loads h per node") {
        const Mesh2D m2(16);
        const auto bc = load_vector(Mesh(m2), SpatialProfile{CurveMass{0.25, 0.75, 0.25, 0.75}});
        CHECK(bc[m2.index(4, 8)] == doctest::Approx(1.0 / 16));
        CHECK(bc[m2.index(8, 12)] == doctest::Approx(1.0 / 16));
        CHECK(bc[m2.index(4, 4)] == doctest::Approx(1.0 / 16));
        CHECK(bc[m2.index(8, 8)] == 0.0);
    }
}

TEST_CASE("projections") {
    SUBCASE("on-grid point mass, lumped") {
        const Mesh1D m(7);
        const auto f = project_source(Mesh(m), SchemeKind::LumpedMass, SpatialProfile{PointMass{0.5}});
        for (int k = 1; k <= 7; ++k) CHECK(f.values[k - 1] == doctest::Approx(k == 4 ? 1.0 / m.h() : 0.0));
    }
    SUBCASE("off-grid point mass") {
        const Mesh1D m(8);  // h = 1/9
        const auto f = project_source(Mesh(m), SchemeKind::LumpedMass, SpatialProfile{PointMass{0.5}});
        int nonzero = 0;
        for (double v : f.values) nonzero += v != 0.0;
        CHECK(nonzero == 2);
        CHECK(f.values[3] == doctest::Approx(0.5 * 9));
        CHECK(f.values[4] == doctest::Approx(0.5 * 9));
    }
    SUBCASE("Galerkin variational identity") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> U(-1, 1);
        for (const Mesh mesh : {Mesh(Mesh1D(15)), Mesh(Mesh2D(8))}) {
            const SpatialProfile prof = std::holds_alternative<Mesh1D>(mesh)
                                            ? SpatialProfile{CharInterval{0.0, 0.5}}
                                            : SpatialProfile{CurveMass{0.25, 0.75, 0.25, 0.75}};
            const auto fh = project_source(mesh, SchemeKind::LumpedMass, prof, Projection::L2);
            const auto load = load_vector(mesh, prof);
            for (int trial = 0; trial < 5; ++trial) {
                std::vector<double> chi(node_count(mesh));
                for (auto& v : chi) v = U(rng);
                const double lhs = dot(fh.values, apply_mass(mesh, chi));
                CHECK(lhs == doctest::Approx(dot(load, chi)).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(project_source(Mesh(Mesh2D(4)), SchemeKind::LumpedMass, SpatialProfile{PointMass{0.5}}),
                    UnsupportedError);
}

TEST_CASE("semidiscrete solve") {
    const TimeProfile tp({0.0, 0.5, 1.0}, {1.0, 2.0});
    const FracOrder a(0.5);
    SUBCASE("zero source") {
        DiscreteSpectrum sp(Mesh1D(7), SchemeKind::LumpedMass);
        const auto u = semidiscrete_solve(sp, a, SourceTerm{SpatialProfile{CharInterval{0, 0.5}, 0.0}, tp}, 0.7);
        for (double v : u.values) CHECK(v == 0.0);
    }
    SUBCASE("modal diagonalization") {
        for (auto scheme : {SchemeKind::Galerkin, SchemeKind::LumpedMass}) {
            DiscreteSpectrum sp(Mesh1D(15), scheme);
            SourceTerm src{SpatialProfile{CharInterval{0, 0.5}}, TimeProfile::constant(1.0, 1.0)};
            SemidiscreteSolution sol(sp, a, src);
            const auto u = sol.at(0.6);
            CHECK(sol.at(0.0).values == std::vector<double>(15, 0.0));
            const auto modal = sp.analyze(sp.apply_scheme_mass(u.values));
            for (int j = 1; j <= 15; ++j) {
                const double expect = step_response(sp.eigenvalue({j, 0}), a, 0.6) * sol.source_coefficients()[j - 1];
                CHECK(std::abs(modal[j - 1] - expect) < 1e-12);
            }
        }
    }
    SUBCASE("symmetric data gives symmetric solution") {
        DiscreteSpectrum sp(Mesh1D(31), SchemeKind::LumpedMass);
        const auto u = semidiscrete_solve(sp, a, SourceTerm{SpatialProfile{CharInterval{0.25, 0.75}}, tp}, 1.0);
        for (int k = 0; k < 31; ++k) CHECK(std::abs(u.values[k] - u.values[30 - k]) < 1e-15);
    }
    SUBCASE("alpha = 1 against backward Euler") {
        DiscreteSpectrum sp(Mesh1D(15), SchemeKind::Galerkin);
        SourceTerm src{SpatialProfile{CharInterval{0, 0.5}}, TimeProfile::constant(1.0, 1.0)};
        const auto exact = semidiscrete_solve(sp, FracOrder(1.0), src, 0.3);
        const auto mats = assemble_matrices(Mesh1D(15), [](double) { return 1.0; }, [](double) { return 0.0; });
        const auto load = load_vector(sp.mesh(), src.spatial);
        auto euler = [&](int steps) {
            const double tau = 0.3 / steps;
            Tridiagonal A = mats.stiffness;
            for (int i = 0; i < 15; ++i) {
                A.diag[i] += mats.mass.diag[i] / tau;
                A.lower[i] += mats.mass.lower[i] / tau;
                A.upper[i] += mats.mass.upper[i] / tau;
            }
            std::vector<double> u(15, 0.0);
            for (int n = 0; n < steps; ++n) {
                auto rhs = mats.mass.apply(u);
                for (int i = 0; i < 15; ++i) rhs[i] = rhs[i] / tau + load[i];
                u = A.solve(rhs);
            }
            double err = 0.0;
            for (int i = 0; i < 15; ++i) err = std::max(err, std::abs(u[i] - exact.values[i]));
            return err;
        };
        const double e1 = euler(1000), e2 = euler(2000);
        CHECK(e1 < 1e-4);
        CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
    }
}

TEST_CASE("quadrature error operator") {
    const Mesh1D m1(31);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    std::vector<double> x(31);
    for (auto& v : x) v = U(rng);
    const auto q = quadrature_error_apply(NodalField(Mesh(m1), x));
    // in 1D the lumping error is (h^2/6) times the stiffness form
    for (int k = 0; k < 31; ++k) CHECK(q.values[k] == doctest::Approx(m1.h() * m1.h() / 6 * x[k]).epsilon(1e-12));
    const auto z = quadrature_error_apply(NodalField::zero(Mesh(Mesh2D(8))));
    for (double v : z.values) CHECK(v == 0.0);

    // first discrete eigenvector: ||grad Q_h chi|| <= C h ||grad chi||
    DiscreteSpectrum sp(Mesh(m1), SchemeKind::LumpedMass);
    const auto phi = sp.eigenvector({1, 0});
    const auto qphi = quadrature_error_apply(phi);
    CHECK(std::sqrt(fe_h1_seminorm_squared(qphi)) <= m1.h() * std::sqrt(fe_h1_seminorm_squared(phi)));

    // symmetric 2D meshes: ||Q_h chi|| / (h^2 ||chi||) stays bounded under refinement
    std::vector<double> constants;
    for (int N : {8, 16, 32, 64}) {
        const Mesh mesh = Mesh2D(N);
        std::vector<double> chi(node_count(mesh));
        for (auto& v : chi) v = U(rng);
        const NodalField c(mesh, chi);
        const auto qc = quadrature_error_apply(c);
        // defining identity
        const auto lhs = apply_stiffness(mesh, qc.values);
        auto rhs = apply_mass(mesh, chi);
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = lumped_weight(mesh) * chi[i] - rhs[i];
        double num = 0, den = 0;
        for (std::size_t i = 0; i < rhs.size(); ++i) {
            num += (lhs[i] - rhs[i]) * (lhs[i] - rhs[i]);
            den += rhs[i] * rhs[i];
        }
        CHECK(std::sqrt(num / den) < 1e-12);
        const double h = 1.0 / N;
        constants.push_back(std::sqrt(fe_l2_norm_squared(qc) / fe_l2_norm_squared(c)) / (h * h));
    }
    const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
    CHECK(*hi / *lo < 1.5);
}
