#pragma once

#include <memory>
#include <string>

namespace fracfem {

/// Order of the Caputo derivative. Admissible range is (0, 1]; the endpoint
/// 1 is the classical (exponential) limit and is accepted for checks only.
class FracOrder {
public:
    explicit FracOrder(double alpha);

    double value() const noexcept { return alpha_; }
    bool classical() const noexcept { return alpha_ == 1.0; }

private:
    double alpha_;
};

struct QuadratureRule;

/// Parameters (alpha, beta) of the two-parameter Mittag-Leffler function.
struct MLParams {
    double alpha;
    double beta;

    /// Throws DomainError unless alpha in (0, 2) and beta is finite.
    void validate() const;
};

/// Reciprocal gamma function, exact zero at the poles of Gamma.
double rgamma(double z);

/// Evaluator for x -> E_{alpha,beta}(-x) on x >= 0.
///
/// Three regimes: the Taylor series near zero, a real-line integral
/// representation in the middle and the algebraic asymptotic expansion for
/// large x. Thresholds are fixed at construction so that the adjacent methods
/// agree to 1e-11 relative at each boundary. Immutable after construction and
/// safe to share between threads.
class MittagLeffler {
public:
    enum class Regime { ClosedForm, Taylor, Integral, Asymptotic };

    explicit MittagLeffler(MLParams params);

    double operator()(double x) const;

    Regime regime(double x) const;
    double taylor_threshold() const noexcept { return taylor_max_; }
    double asymptotic_threshold() const noexcept { return asymptotic_min_; }
    const MLParams& params() const noexcept { return params_; }

    // Individual regimes, exposed for boundary-agreement checks.
    double taylor(double x) const;
    double integral(double x) const;
    double asymptotic(double x) const;

private:
    double integral_reduced(double beta, double x) const;
    double asymptotic_with_estimate(double x, double* rel_error) const;

    MLParams params_;
    double taylor_max_ = 0.0;
    double asymptotic_min_ = 0.0;
    bool has_integral_ = false;
    static constexpr int kMaxAsymptoticTerms = 64;
    double asym_coeff_[kMaxAsymptoticTerms + 1] = {};
    std::shared_ptr<const QuadratureRule> quad_;
};

/// E_{alpha,beta}(-x) for x >= 0.
double ml_eval(const MLParams& params, double x);

/// High-precision reference for E_{alpha,beta}(-x) with absolute error at most
/// 10^-digits. Uses the defining series in MPFR arithmetic with a rigorous
/// tail bound when the working precision fits the budget; for alpha < 1 and
/// large x it switches to the algebraic expansion carried in MPFR arithmetic,
/// truncated well before its smallest term. Throws DomainError when neither
/// branch can certify the requested digits.
double ml_oracle(const MLParams& params, double x, int digits);

/// Same as ml_oracle but returns the value as a decimal string with `digits`
/// digits after the point.
std::string ml_oracle_decimal(const MLParams& params, double x, int digits);

/// Mittag-Leffler building blocks for a fixed fractional order.
class Relaxation {
public:
    explicit Relaxation(FracOrder alpha);

    double alpha() const noexcept { return alpha_; }

    /// t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha); throws DomainError at t = 0.
    double kernel(double lambda, double t) const;

    /// (1 - E_{alpha,1}(-lambda t^alpha)) / lambda, the response of one mode
    /// to a unit source switched on at time zero.
    double step(double lambda, double t) const;

    const MittagLeffler& e_one() const noexcept { return e_one_; }
    const MittagLeffler& e_alpha() const noexcept { return e_alpha_; }

private:
    double alpha_;
    MittagLeffler e_one_;
    MittagLeffler e_alpha_;
};

double relaxation_kernel(double lambda, FracOrder alpha, double t);
double step_response(double lambda, FracOrder alpha, double t);

}  // namespace fracfem
