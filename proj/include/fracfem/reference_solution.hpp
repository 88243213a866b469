#pragma once

#include "fracfem/special_functions.hpp"
#include "fracfem/spectral_basis.hpp"

namespace fracfem {

/// Exact response of one mode with eigenvalue lambda to a piecewise-constant
/// time profile: sum_i c_i [s((t - t_{i-1})_+) - s((t - t_i)_+)] with s the
/// step response.
double mode_response(const Relaxation& relax, double lambda, const TimeProfile& temporal, double t);
double mode_response(double lambda, FracOrder alpha, const TimeProfile& temporal, double t);

/// Doubling policy for the spectral truncation J. The (J, 2J] increment of
/// the norm must stay below tolerance times the leading-mode contribution.
struct TruncationPolicy {
    double l2_tolerance = 1e-10;
    double h1_tolerance = 1e-6;
    int initial = 64;
    int max_1d = 1 << 22;
    int max_2d = 4096;
};

class ReferenceSolution {
public:
    ReferenceSolution(SourceTerm source, FracOrder alpha, TruncationPolicy policy = {});

    Domain domain() const { return source_.spatial.domain(); }
    const SourceTerm& source() const noexcept { return source_; }
    const Relaxation& relaxation() const noexcept { return relax_; }
    double alpha() const noexcept { return relax_.alpha(); }
    const TruncationPolicy& policy() const noexcept { return policy_; }

    /// Coefficient u_idx(t) = g_idx * mode_response(lambda_idx, t).
    double coefficient(ModeIndex idx, double t) const;

    /// Truncated field with explicit J.
    SpectralField solution_at(double t, int J) const;

    /// Truncated field with J from the L2 policy.
    SpectralField solution_at(double t) const;

    /// Smallest doubled J whose (J, 2J] increment in the H^p norm (p in {0, 1})
    /// passes the policy; throws EvaluationError when the cap is reached.
    int truncation_for(double t, int p) const;

private:
    SourceTerm source_;
    Relaxation relax_;
    TruncationPolicy policy_;
};

}  // namespace fracfem
