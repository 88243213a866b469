#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <mpfr.h>

#include "fracfem/errors.hpp"
#include "fracfem/special_functions.hpp"

namespace fracfem {

namespace {

constexpr double kLog2of10 = 3.321928094887362;
constexpr int kMaxSeriesDigits = 5000;
constexpr double kPi = std::numbers::pi;
constexpr double kAsymptoticSwitch = 200.0;  // x^{1/alpha} above which the series is abandoned

class Mp {
public:
    explicit Mp(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
    Mp(mpfr_prec_t bits, double d) : Mp(bits) { mpfr_set_d(v_, d, MPFR_RNDN); }
    ~Mp() { mpfr_clear(v_); }
    Mp(const Mp&) = delete;
    Mp& operator=(const Mp&) = delete;

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

// 1/Gamma(z) for z given exactly as a double expression a*k+b at working precision
void rgamma_mp(mpfr_ptr out, mpfr_srcptr z) {
    if (mpfr_integer_p(z) && mpfr_sgn(z) <= 0) {
        mpfr_set_zero(out, 1);
        return;
    }
    mpfr_gamma(out, z, MPFR_RNDN);
    mpfr_ui_div(out, 1, out, MPFR_RNDN);
}

void set_argument(mpfr_ptr z, const MLParams& p, long k, long sign) {
    // z = beta + sign*alpha*k, formed at full precision from the double inputs
    mpfr_set_d(z, p.alpha, MPFR_RNDN);
    mpfr_mul_si(z, z, sign * k, MPFR_RNDN);
    mpfr_add_d(z, z, p.beta, MPFR_RNDN);
}

std::string range_message(const MLParams& p, double x, int digits, const char* why) {
    std::ostringstream os;
    os.precision(17);
    os << "oracle cannot certify " << digits << " digits for E_{" << p.alpha << "," << p.beta
       << "}(-" << x << "): " << why;
    return os.str();
}

// Largest log10 |x^k / Gamma(alpha k + beta)| over k, used to size the precision.
double peak_log10_term(const MLParams& p, double x) {
    if (x <= 0.0) return 0.0;
    double peak = 0.0;
    const double lx = std::log10(x);
    const long kmax = static_cast<long>(4.0 * std::pow(x, 1.0 / p.alpha)) + 64;
    for (long k = 0; k <= kmax; ++k) {
        const double z = p.alpha * static_cast<double>(k) + p.beta;
        if (z <= 0.0) continue;
        const double v = static_cast<double>(k) * lx - std::lgamma(z) / std::log(10.0);
        peak = std::max(peak, v);
    }
    return peak;
}

void series(mpfr_ptr result, const MLParams& p, double x, int digits) {
    const double peak = peak_log10_term(p, x);
    if (peak + digits > kMaxSeriesDigits) {
        throw DomainError(range_message(p, x, digits, "series precision budget exceeded"));
    }
    const auto bits = static_cast<mpfr_prec_t>((peak + digits + 15.0) * kLog2of10) + 64;
    mpfr_set_prec(result, bits);

    Mp sum(bits, 0.0), power(bits, 1.0), z(bits), g0(bits), g1(bits), g2(bits), term(bits),
        ratio(bits), bound(bits), eps(bits);
    mpfr_set_ui(eps.get(), 10, MPFR_RNDN);
    mpfr_pow_si(eps.get(), eps.get(), -(digits + 2), MPFR_RNDN);

    // g0, g1, g2 hold 1/Gamma(a k + b) for k, k+1, k+2; power holds x^k
    set_argument(z.get(), p, 0, 1);
    rgamma_mp(g0.get(), z.get());
    set_argument(z.get(), p, 1, 1);
    rgamma_mp(g1.get(), z.get());
    const long limit = static_cast<long>(8.0 * std::pow(std::max(x, 1.0), 1.0 / p.alpha)) + 4096;
    for (long k = 0; k < limit; ++k) {
        set_argument(z.get(), p, k + 2, 1);
        rgamma_mp(g2.get(), z.get());

        mpfr_mul(term.get(), g0.get(), power.get(), MPFR_RNDN);
        if (k % 2 == 0) {
            mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
        } else {
            mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
        }
        mpfr_mul_d(power.get(), power.get(), x, MPFR_RNDN);

        // tail from k+1 on is bounded by |t_{k+1}| / (1 - r) once the term ratio
        // r = x g_{k+2} / g_{k+1} is below one; it decreases for a(k+1)+b > 0
        if (p.alpha * static_cast<double>(k + 1) + p.beta > 0.0 && !mpfr_zero_p(g1.get())) {
            mpfr_div(ratio.get(), g2.get(), g1.get(), MPFR_RNDN);
            mpfr_mul_d(ratio.get(), ratio.get(), x, MPFR_RNDN);
            mpfr_abs(ratio.get(), ratio.get(), MPFR_RNDN);
            if (mpfr_cmp_ui(ratio.get(), 1) < 0) {
                mpfr_mul(bound.get(), g1.get(), power.get(), MPFR_RNDN);
                mpfr_abs(bound.get(), bound.get(), MPFR_RNDN);
                mpfr_ui_sub(ratio.get(), 1, ratio.get(), MPFR_RNDN);
                mpfr_div(bound.get(), bound.get(), ratio.get(), MPFR_RNDN);
                if (mpfr_cmp(bound.get(), eps.get()) <= 0) {
                    mpfr_set(result, sum.get(), MPFR_RNDN);
                    return;
                }
            }
        }
        mpfr_swap(g0.get(), g1.get());
        mpfr_swap(g1.get(), g2.get());
    }
    throw DomainError(range_message(p, x, digits, "series did not terminate"));
}

void asymptotic(mpfr_ptr result, const MLParams& p, double x, int digits) {
    const auto bits = static_cast<mpfr_prec_t>((digits + 20.0) * kLog2of10) + 64;
    mpfr_set_prec(result, bits);

    Mp sum(bits, 0.0), power(bits, 1.0), q(bits, -1.0), z(bits), term(bits);
    mpfr_div_d(q.get(), q.get(), x, MPFR_RNDN);

    // Term magnitudes oscillate with sin(pi(beta - alpha k)); control uses the
    // envelope Gamma(alpha k + 1 - beta) x^{-k} / pi from the reflection formula.
    const double target = -(digits + 3) * std::log(10.0);
    const double lx = std::log(x);
    double last = std::numeric_limits<double>::infinity();
    for (long k = 1; k < 1000000; ++k) {
        mpfr_mul(power.get(), power.get(), q.get(), MPFR_RNDN);
        const double envelope =
            std::lgamma(p.alpha * static_cast<double>(k) + 1.0 - p.beta) - k * lx - std::log(kPi);
        if (p.alpha * static_cast<double>(k) + 1.0 - p.beta >= 2.0) {
            if (envelope > last) {
                throw DomainError(range_message(p, x, digits, "asymptotic terms grow before converging"));
            }
            last = envelope;
            if (envelope < target) {
                mpfr_set(result, sum.get(), MPFR_RNDN);
                return;
            }
        }
        set_argument(z.get(), p, k, -1);
        rgamma_mp(term.get(), z.get());
        mpfr_mul(term.get(), term.get(), power.get(), MPFR_RNDN);
        mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    }
    throw DomainError(range_message(p, x, digits, "asymptotic expansion did not terminate"));
}

void oracle(mpfr_ptr result, const MLParams& params, double x, int digits) {
    params.validate();
    if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError("oracle needs finite x >= 0");
    if (digits < 1) throw DomainError("oracle needs at least one digit");
    if (x == 0.0) {
        const auto bits = static_cast<mpfr_prec_t>((digits + 20.0) * kLog2of10) + 64;
        mpfr_set_prec(result, bits);
        Mp z(bits, params.beta);
        rgamma_mp(result, z.get());
        return;
    }
    if (params.alpha < 1.0 && std::pow(x, 1.0 / params.alpha) > kAsymptoticSwitch) {
        asymptotic(result, params, x, digits);
    } else {
        series(result, params, x, digits);
    }
}

}  // namespace

double ml_oracle(const MLParams& params, double x, int digits) {
    Mp r(64);
    oracle(r.get(), params, x, digits);
    return mpfr_get_d(r.get(), MPFR_RNDN);
}

std::string ml_oracle_decimal(const MLParams& params, double x, int digits) {
    Mp r(64);
    oracle(r.get(), params, x, digits);
    char* buf = nullptr;
    if (mpfr_asprintf(&buf, "%.*Rf", digits, r.get()) < 0) {
        throw Error("formatting oracle value failed");
    }
    std::string out(buf);
    mpfr_free_str(buf);
    return out;
}

}  // namespace fracfem
