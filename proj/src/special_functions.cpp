#include "fracfem/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracfem/errors.hpp"
#include "fracfem/trig.hpp"

namespace fracfem {

struct QuadratureRule {
    mutable boost::math::quadrature::tanh_sinh<double> rule{15};
};

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kIntegralUpper = 60.0;  // e^{-60} below double resolution of any result

/// Compensated (Kahan) accumulator.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double relative_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

std::string describe(const MLParams& p, double x) {
    std::ostringstream os;
    os.precision(17);
    os << "E_{" << p.alpha << "," << p.beta << "}(-" << x << ")";
    return os.str();
}

}  // namespace

FracOrder::FracOrder(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "fractional order must lie in (0, 1], got " << alpha;
        throw DomainError(os.str());
    }
}

void MLParams::validate() const {
    if (!(alpha > 0.0 && alpha < 2.0) || !std::isfinite(beta)) {
        std::ostringstream os;
        os << "Mittag-Leffler parameters outside alpha in (0,2), finite beta: alpha=" << alpha
           << " beta=" << beta;
        throw DomainError(os.str());
    }
}

double rgamma(double z) {
    if (z <= 0.0 && z == std::floor(z)) return 0.0;
    if (z < 0.5) {
        // reflection: 1/Gamma(z) = sin(pi z) Gamma(1-z) / pi
        return sin_pi(z) * std::tgamma(1.0 - z) / kPi;
    }
    if (z > 171.0) return 0.0;
    return 1.0 / std::tgamma(z);
}

MittagLeffler::MittagLeffler(MLParams params) : params_(params) {
    params_.validate();
    const double a = params_.alpha;
    const double b = params_.beta;

    for (int k = 1; k <= kMaxAsymptoticTerms; ++k) asym_coeff_[k] = rgamma(b - a * k);

    if (a == 1.0 && (b == 1.0 || b == 2.0)) {
        taylor_max_ = 0.0;
        asymptotic_min_ = std::numeric_limits<double>::infinity();
        return;
    }

    has_integral_ = a < 1.0;
    if (has_integral_) quad_ = std::make_shared<QuadratureRule>();

    // Taylor boundary: largest x <= 1/2 where the series agrees with the integral.
    double xt = 0.5;
    if (has_integral_) {
        bool agreed = false;
        for (int i = 0; i < 12 && !agreed; ++i) {
            try {
                agreed = relative_gap(taylor(xt), integral(xt)) <= 1e-11;
            } catch (const EvaluationError&) {
            }
            if (!agreed) xt *= 0.5;
        }
        if (!agreed) {
            throw EvaluationError("taylor", "series and integral never agree for " + describe(params_, xt));
        }
    } else {
        // alpha >= 1: accept the series while cancellation stays below 10^3
        xt = 8.0;
        for (int i = 0; i < 20; ++i, xt *= 0.75) {
            try {
                (void)taylor(xt);
                break;
            } catch (const EvaluationError&) {
            }
        }
    }
    taylor_max_ = xt;

    // Asymptotic boundary: smallest x (geometric scan) where the expansion
    // certifies itself and, when available, matches the integral.
    const double step = std::pow(2.0, 0.25);
    double exp_guard = 0.0;
    if (a >= 1.0) {
        // exponentially small terms exp(x^{1/a} cos(pi/a)) must be negligible
        const double c = std::abs(std::cos(kPi / a));
        exp_guard = c > 0.0 ? std::pow(40.0 / c, a) : std::numeric_limits<double>::infinity();
    }
    double xa = std::max(1.0, taylor_max_);
    bool found = false;
    for (; xa < 1e7; xa *= step) {
        if (xa < exp_guard) continue;
        double est = 1.0;
        const double av = asymptotic_with_estimate(xa, &est);
        if (est > 1e-15) continue;
        if (!has_integral_ || relative_gap(av, integral(xa)) <= 1e-11) {
            found = true;
            break;
        }
    }
    if (!found) {
        throw EvaluationError("asymptotic",
                              "no asymptotic threshold found for " + describe(params_, xa));
    }
    asymptotic_min_ = xa;
}

MittagLeffler::Regime MittagLeffler::regime(double x) const {
    if (params_.alpha == 1.0 && (params_.beta == 1.0 || params_.beta == 2.0)) return Regime::ClosedForm;
    if (x <= taylor_max_) return Regime::Taylor;
    if (x >= asymptotic_min_) return Regime::Asymptotic;
    return Regime::Integral;
}

double MittagLeffler::operator()(double x) const {
    if (!(x >= 0.0)) throw DomainError("Mittag-Leffler evaluation needs x >= 0, got " + describe(params_, x));
    switch (regime(x)) {
    case Regime::ClosedForm:
        if (params_.beta == 1.0) return std::exp(-x);
        return x == 0.0 ? 1.0 : -std::expm1(-x) / x;
    case Regime::Taylor:
        return taylor(x);
    case Regime::Asymptotic:
        return asymptotic(x);
    case Regime::Integral:
        if (!has_integral_) {
            throw EvaluationError("integral", "integral representation needs alpha < 1 for " +
                                                  describe(params_, x));
        }
        return integral(x);
    }
    return 0.0;
}

double MittagLeffler::taylor(double x) const {
    const double a = params_.alpha;
    const double b = params_.beta;
    KahanSum sum;
    double abs_sum = 0.0;
    double power = 1.0;  // (-x)^k
    int small_run = 0;
    for (int k = 0; k < 4000; ++k) {
        const double term = power * rgamma(a * k + b);
        sum.add(term);
        abs_sum += std::abs(term);
        if (k > 0 && std::abs(term) <= 1e-17 * std::abs(sum.sum)) {
            if (++small_run == 2) break;
        } else {
            small_run = 0;
        }
        power *= -x;
        if (power == 0.0) break;
    }
    if (abs_sum > 1e3 * std::abs(sum.sum)) {
        throw EvaluationError("taylor", "cancellation in Taylor series for " + describe(params_, x));
    }
    return sum.sum;
}

double MittagLeffler::asymptotic_with_estimate(double x, double* rel_error) const {
    // E(-x) ~ -sum_{k>=1} (-x)^{-k} / Gamma(beta - alpha k)
    const double q = -1.0 / x;
    double power = 1.0;
    KahanSum sum;
    double last = std::numeric_limits<double>::infinity();
    double estimate = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= kMaxAsymptoticTerms; ++k) {
        power *= q;
        const double term = -power * asym_coeff_[k];
        if (term == 0.0) continue;
        const double mag = std::abs(term);
        if (mag > last) {
            estimate = last / std::abs(sum.sum);
            break;
        }
        sum.add(term);
        last = mag;
        if (mag <= 1e-17 * std::abs(sum.sum)) {
            estimate = mag / std::abs(sum.sum);
            break;
        }
        estimate = mag / std::abs(sum.sum);
    }
    if (rel_error) *rel_error = estimate;
    return sum.sum;
}

double MittagLeffler::asymptotic(double x) const {
    return asymptotic_with_estimate(x, nullptr);
}

double MittagLeffler::integral(double x) const {
    if (!has_integral_) throw EvaluationError("integral", "integral representation needs alpha < 1");
    return integral_reduced(params_.beta, x);
}

double MittagLeffler::integral_reduced(double beta, double x) const {
    const double a = params_.alpha;
    if (x == 0.0) return rgamma(beta);

    // Contour integral over the ray [eps, inf) and the arc |zeta| = eps, |arg| <= alpha pi.
    // For beta < 1 + alpha the arc vanishes as eps -> 0 and the ray starts at zero.
    const bool with_arc = beta >= 1.0 + a;
    const double eps = with_arc ? 1.0 : 0.0;

    const double s1 = sin_pi(1.0 - beta);
    const double s2 = sin_pi(1.0 - beta + a);
    const double c = std::cos(kPi * a);
    const double power = (1.0 - beta) / a;
    const double inv_a = 1.0 / a;
    auto ray = [=](double chi) {
        if (chi <= 0.0) return 0.0;
        const double num = chi * s1 + x * s2;
        const double den = chi * chi + 2.0 * chi * x * c + x * x;
        return std::pow(chi, power) * std::exp(-std::pow(chi, inv_a)) * num / den;
    };

    const double upper = std::pow(kIntegralUpper, a);
    std::vector<double> cuts{eps};
    if (c < 0.0) {
        const double peak = -x * c;
        if (peak > eps && peak < upper) cuts.push_back(peak);
    }
    cuts.push_back(upper);

    double total = 0.0;
    double err_total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        double l1 = 0.0;
        total += quad_->rule.integrate(ray, cuts[i], cuts[i + 1], 1e-14, &err, &l1);
        err_total += err;
    }
    if (with_arc) {
        const double e_inv = std::pow(eps, inv_a);
        const double pref = std::pow(eps, 1.0 + power) / 2.0;
        auto arc = [=](double phi) {
            const double omega = e_inv * std::sin(phi / a) + phi * (1.0 + power);
            const double re = eps * std::cos(phi) + x;
            const double im = eps * std::sin(phi);
            const double mag = std::exp(e_inv * std::cos(phi / a));
            return pref * mag * (std::cos(omega) * re + std::sin(omega) * im) / (re * re + im * im);
        };
        double err = 0.0;
        double l1 = 0.0;
        total += quad_->rule.integrate(arc, -a * kPi, a * kPi, 1e-14, &err, &l1);
        err_total += err;
    }
    const double value = total / (a * kPi);
    if (!std::isfinite(value) || err_total > 1e-10 * std::abs(total)) {
        throw EvaluationError("integral", "quadrature did not converge for " + describe(params_, x));
    }
    return value;
}

double ml_eval(const MLParams& params, double x) {
    return MittagLeffler(params)(x);
}

Relaxation::Relaxation(FracOrder alpha)
    : alpha_(alpha.value()),
      e_one_(MLParams{alpha.value(), 1.0}),
      e_alpha_(MLParams{alpha.value(), alpha.value()}) {}

double Relaxation::kernel(double lambda, double t) const {
    if (!(lambda > 0.0)) throw DomainError("relaxation kernel needs lambda > 0");
    if (!(t > 0.0)) throw DomainError("relaxation kernel is singular at t = 0");
    if (alpha_ == 1.0) return std::exp(-lambda * t);
    return std::pow(t, alpha_ - 1.0) * e_alpha_(lambda * std::pow(t, alpha_));
}

double Relaxation::step(double lambda, double t) const {
    if (!(lambda > 0.0)) throw DomainError("step response needs lambda > 0");
    if (!(t >= 0.0)) throw DomainError("step response needs t >= 0");
    if (t == 0.0) return 0.0;
    const double x = lambda * std::pow(t, alpha_);
    if (alpha_ == 1.0) return -std::expm1(-x) / lambda;
    if (x < 1e-4) {
        // 1 - E(-x) = x/Gamma(1+a) - x^2/Gamma(1+2a) + ...
        KahanSum sum;
        double power = x;
        for (int k = 1; k < 12; ++k) {
            sum.add(power * rgamma(1.0 + alpha_ * k));
            power *= -x;
        }
        return sum.sum / lambda;
    }
    return (1.0 - e_one_(x)) / lambda;
}

double relaxation_kernel(double lambda, FracOrder alpha, double t) {
    return Relaxation(alpha).kernel(lambda, t);
}

double step_response(double lambda, FracOrder alpha, double t) {
    return Relaxation(alpha).step(lambda, t);
}

}  // namespace fracfem
