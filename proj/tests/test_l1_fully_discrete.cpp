#include "doctest.h"

#include <cmath>
#include <random>

#include "fracfem/errors.hpp"
#include "fracfem/l1_fully_discrete.hpp"

using namespace fracfem;

namespace {
double one(double) { return 1.0; }
double zero(double) { return 0.0; }

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}
}  // namespace

TEST_CASE("L1 weights") {
    const auto b = l1_weights(FracOrder(0.5), 100);
    CHECK(b[0] == 1.0);
    CHECK(b[1] == doctest::Approx(0.41421356237).epsilon(1e-10));
    double partial = 0.0;
    for (int n = 1; n <= 100; ++n) {
        partial += b[n - 1];
        CHECK(partial == doctest::Approx(std::sqrt(double(n))).epsilon(1e-13));
        if (n > 1) CHECK(b[n - 1] < b[n - 2]);
    }
    const auto be = l1_weights(FracOrder(1.0), 5);
    CHECK(be == std::vector<double>{1, 0, 0, 0, 0});
    CHECK_THROWS_AS(l1_weights(FracOrder(0.5), 0), DomainError);
    CHECK_THROWS_AS(L1Scheme(FracOrder(0.5), 0.3, 1.0), DomainError);
    CHECK_THROWS_AS(L1Scheme(FracOrder(0.5), -0.1, 1.0), DomainError);
}

TEST_CASE("L1 is exact on linear functions") {
    for (double a : {0.1, 0.5, 0.95}) {
        const L1Scheme l1(FracOrder(a), 1.0 / 64, 1.0);
        std::vector<double> u(65);
        for (int n = 0; n <= 64; ++n) u[n] = n / 64.0;
        for (int n : {1, 2, 7, 33, 64}) {
            const double t = n / 64.0;
            const double caputo = std::pow(t, 1 - a) / std::tgamma(2 - a);
            CHECK(std::abs(l1.derivative(u, n) - caputo) <= 1e-12 * std::max(1.0, caputo));
        }
    }
}

TEST_CASE("L1 march basics") {
    const Mesh1D mesh(15);
    const TimeProfile tp({0.0, 0.5, 1.0}, {1.0, 2.0});
    SUBCASE("zero source") {
        const auto tr = l1_march(mesh, one, zero, SchemeKind::LumpedMass, FracOrder(0.5),
                                 SourceTerm{SpatialProfile{CharInterval{0, 0.5}, 0.0}, tp}, 0.05, 1.0);
        CHECK(tr.steps() == 20);
        for (const auto& s : tr.states)
            for (double v : s) CHECK(v == 0.0);
    }
    SUBCASE("nonnegative source keeps lumped solution nonnegative") {
        auto k = [](double x) { return 3.0 + std::sin(2 * M_PI * x); };
        const auto tr = l1_march(mesh, k, zero, SchemeKind::LumpedMass, FracOrder(0.3),
                                 SourceTerm{SpatialProfile{CharInterval{0, 0.5}}, tp}, 0.01, 1.0);
        for (const auto& s : tr.states)
            for (double v : s) CHECK(v >= 0.0);
        CHECK(tr.final_state().values[3] > 0.0);
    }
    SUBCASE("indefinite system is rejected") {
        CHECK_THROWS_AS(l1_march(mesh, one, [](double) { return -1e4; }, SchemeKind::LumpedMass, FracOrder(0.5),
                                 SourceTerm{SpatialProfile{CharInterval{0, 0.5}}, tp}, 0.5, 1.0),
                        DomainError);
        CHECK_THROWS_AS(l1_march(mesh, one, zero, SchemeKind::LumpedMass, FracOrder(0.5),
                                 SourceTerm{SpatialProfile{CharInterval{0, 0.5}}, tp}, 0.1, 2.0),
                        DomainError);
    }
    SUBCASE("alpha = 1 is backward Euler") {
        const auto tr = l1_march(mesh, one, zero, SchemeKind::Galerkin, FracOrder(1.0),
                                 SourceTerm{SpatialProfile{CharInterval{0, 0.5}}, TimeProfile::constant(1.0, 1.0)},
                                 0.1, 0.2);
        const auto mats = assemble_matrices(mesh, one, zero);
        const auto load = load_vector(Mesh(mesh), SpatialProfile{CharInterval{0, 0.5}});
        auto step = [&](const std::vector<double>& u) {
            Tridiagonal A = mats.stiffness;
            for (int i = 0; i < 15; ++i) {
                A.diag[i] += mats.mass.diag[i] / 0.1;
                A.lower[i] += mats.mass.lower[i] / 0.1;
                A.upper[i] += mats.mass.upper[i] / 0.1;
            }
            auto rhs = mats.mass.apply(u);
            for (int i = 0; i < 15; ++i) rhs[i] = rhs[i] / 0.1 + load[i];
            return A.solve(rhs);
        };
        const auto u1 = step(std::vector<double>(15, 0.0));
        const auto u2 = step(u1);
        CHECK(max_diff(tr.states[2], u2) < 1e-14);
    }
}

TEST_CASE("L1 converges to the semidiscrete solution in tau") {
    const Mesh1D mesh(15);
    const SourceTerm src{SpatialProfile{CharInterval{0, 0.5}}, TimeProfile({0.0, 0.5, 1.0}, {1.0, 2.0})};
    DiscreteSpectrum sp(Mesh(mesh), SchemeKind::LumpedMass);
    const auto exact = semidiscrete_solve(sp, FracOrder(0.5), src, 1.0);
    std::vector<double> errs;
    for (int n : {50, 100, 200, 400}) {
        const auto tr = l1_march(mesh, one, zero, SchemeKind::LumpedMass, FracOrder(0.5), src, 1.0 / n, 1.0);
        errs.push_back(max_diff(tr.final_state().values, exact.values));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double rate = std::log2(errs[i - 1] / errs[i]);
        // first order at fixed t > 0: the t^alpha layer at t = 0 caps the local 2 - alpha order
        CHECK(rate > 0.9);
        CHECK(rate < 1.1);
    }
}

TEST_CASE("L1 stability over many steps") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(0.5, 2.0);
    const double k0 = U(rng), k1 = U(rng) * 0.2, q0 = U(rng);
    auto k = [&](double x) { return k0 + k1 * std::cos(3 * x); };
    auto q = [&](double) { return q0; };
    const Mesh1D mesh(7);
    const auto tr = l1_march(mesh, k, q, SchemeKind::Galerkin, FracOrder(0.4),
                             SourceTerm{SpatialProfile{CharInterval{0.2, 0.9}}, TimeProfile::constant(1.0, 1.0)},
                             1e-4, 1.0);
    CHECK(tr.steps() == 10000);
    double peak = 0.0;
    for (const auto& s : tr.states)
        for (double v : s) peak = std::max(peak, std::abs(v));
    // the stationary solution of -(k u')' + q u = 1 is bounded by 1/(8 k_min) in the sup norm
    CHECK(std::isfinite(peak));
    CHECK(peak < 1.0 / (8 * (k0 - k1)));
}
