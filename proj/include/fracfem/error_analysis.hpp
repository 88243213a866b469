#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fracfem/reference_solution.hpp"
#include "fracfem/semidiscrete_fem.hpp"

namespace fracfem {

enum class NormKind { L2, H1 };
enum class TimeAggregation { AtTime, L2Time, LinfTime };

int norm_order(NormKind norm) noexcept;
std::string to_string(NormKind norm);
std::string to_string(TimeAggregation aggregation);

struct ErrorRecord {
    int level = 0;
    double h = 0.0;
    NormKind norm = NormKind::L2;
    TimeAggregation aggregation = TimeAggregation::AtTime;
    double value = 0.0;
    bool degraded = false;
};

struct RateFit {
    double rate = 0.0;
    double residual = 0.0;  // RMS of the log residuals
};

/// Least-squares slope of log(error) against log of the nominal mesh size
/// 2^-level. Throws DomainError with fewer than 3 levels or non-positive errors.
RateFit fit_rate(const std::vector<ErrorRecord>& records);

struct ConvergenceReport {
    std::vector<ErrorRecord> records;
    RateFit fit;
};

/// Exact sine coefficients (u_h, phi_idx) of a piecewise-linear function for
/// any mode, from periodic node sums (period 2(N+1) in 1D, 2N per axis in 2D).
class FeSineTransform {
public:
    explicit FeSineTransform(const NodalField& u);

    Domain domain() const noexcept { return domain_; }
    /// Modes repeat their node sums with this period.
    int period() const noexcept { return period_; }
    double coefficient(ModeIndex idx) const;
    /// Exact ||u_h||^2 (p = 0) or ||grad u_h||^2 (p = 1).
    double norm_squared(int p) const { return p == 0 ? l2_ : h1_; }

private:
    Domain domain_;
    int period_;
    double h_;
    std::vector<double> sin_sums_;  // 1D: S_r; 2D: S(r, s) row-major
    std::vector<double> cos_sums_;  // 2D only
    double l2_ = 0.0, h1_ = 0.0;
};

SpectralField fe_sine_coefficients(const NodalField& u_h, int J);

/// (sum_{idx <= J} lambda^p (u_idx - c_idx)^2)^{1/2} with J the reference truncation.
double error_norm(const NodalField& u_h, const SpectralField& ref, int p);

/// Difference of two finite element functions on the same mesh, exact.
double fe_error_norm(const NodalField& a, const NodalField& b, int p);

/// Coarse 1D field interpolated onto a nested fine mesh.
NodalField prolongate(const NodalField& coarse, const Mesh1D& fine);

struct ErrorPolicy {
    double target = 1e-4;  // relative change of the extrapolated error between shells
    double guard = 1e-2;   // largest accepted relative change between the last estimates at the cap
    int initial = 64;
    int max_1d = 1 << 22;
    int max_2d = 2048;
};

struct ErrorEstimate {
    double value = 0.0;
    double tail_share = 0.0;  // effect of the extrapolated tail on value, relative
    int truncation = 0;
    bool degraded = false;
};

struct FieldErrors {
    ErrorEstimate l2, h1;

    const ErrorEstimate& operator[](NormKind n) const { return n == NormKind::L2 ? l2 : h1; }
};

/// ||u_h - u(t)|| in L2 and H1 for several fields against one reference. The
/// exact ||u_h||_p is combined with shells of sum lambda^p (u^2 - 2 u c) over
/// doubling J; the remaining tail is extrapolated from the geometric decay of
/// the shell increments. Converged once two successive extrapolated values
/// change by at most `target`. At the cap a cell is flagged degraded when the
/// last change exceeds `guard` or the extrapolated tail carries more than half
/// of the value.
std::vector<FieldErrors> spectral_errors(const ReferenceSolution& ref, double t, const std::vector<NodalField>& fields,
                                         const ErrorPolicy& policy = {});

struct AggregationPolicy {
    int layers = 8;          // geometric layers toward each singular point, ratio 1/4
    int linf_points = 257;
    double stability = 5e-3;  // accepted change under time-grid doubling
};

/// Aggregates a vector of norms over [0, T]: value at T, L2(0, T) by 8-point
/// Gauss-Legendre on a graded partition, or L-infinity over a sample grid refined near 0 and jumps.
/// The computation is repeated on a doubled grid; throws EvaluationError
/// ("aggregation") when the two disagree beyond the stability tolerance.
std::vector<double> time_aggregate(const std::function<std::vector<double>(double)>& norm_fn,
                                   TimeAggregation aggregation, double T, const std::vector<double>& jumps,
                                   const AggregationPolicy& policy = {});
double time_aggregate(const std::function<double(double)>& norm_fn, TimeAggregation aggregation, double T,
                      const std::vector<double>& jumps, const AggregationPolicy& policy = {});

}  // namespace fracfem
