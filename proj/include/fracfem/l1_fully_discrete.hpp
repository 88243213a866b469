#pragma once

#include <vector>

#include "fracfem/semidiscrete_fem.hpp"

namespace fracfem {

/// b_j = (j+1)^{1-alpha} - j^{1-alpha} for j = 0..n-1.
std::vector<double> l1_weights(FracOrder alpha, int n);

/// Uniform L1 time grid t_n = n tau on [0, T].
class L1Scheme {
public:
    /// Throws DomainError unless tau > 0 and T / tau is an integer (to 1e-9).
    L1Scheme(FracOrder alpha, double tau, double T);

    FracOrder alpha() const noexcept { return alpha_; }
    double tau() const noexcept { return tau_; }
    int n_steps() const noexcept { return n_; }
    double final_time() const noexcept { return tau_ * n_; }
    const std::vector<double>& weights() const noexcept { return b_; }
    /// 1 / (Gamma(2 - alpha) tau^alpha)
    double scale() const noexcept { return scale_; }

    /// L1 approximation of the Caputo derivative at t_n from samples u(t_0..t_n).
    double derivative(const std::vector<double>& samples, int n) const;

private:
    FracOrder alpha_;
    double tau_;
    int n_;
    std::vector<double> b_;
    double scale_;
};

struct L1Trajectory {
    Mesh1D mesh;
    double tau;
    std::vector<std::vector<double>> states;  // U^0 .. U^n

    int steps() const noexcept { return static_cast<int>(states.size()) - 1; }
    NodalField at_step(int n) const;
    NodalField final_state() const { return at_step(steps()); }
};

/// Fully discrete solution of the problem with coefficients k, q:
/// (c M + S) U^n = c M (U^{n-1} - sum_{j=1}^{n-1} b_j (U^{n-j} - U^{n-j-1})) + F^n,
/// c = 1 / (Gamma(2-alpha) tau^alpha), M consistent or lumped per scheme, F^n the
/// load of f(., t_n) with the time profile's right-continuous value.
/// Throws DomainError when the system matrix is not positive definite.
L1Trajectory l1_march(const Mesh1D& mesh, const Coefficient& k, const Coefficient& q, SchemeKind scheme,
                      FracOrder alpha, const SourceTerm& source, double tau, double T);

}  // namespace fracfem
