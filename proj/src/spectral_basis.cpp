#include "fracfem/spectral_basis.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "fracfem/errors.hpp"
#include "fracfem/trig.hpp"

namespace fracfem {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSqrt2 = std::sqrt(2.0);

void check_index(Domain domain, ModeIndex idx) {
    if (idx.n < 1 || (domain == Domain::Square01 && idx.m < 1)) {
        std::ostringstream os;
        os << "mode indices must be positive, got (" << idx.n << ", " << idx.m << ")";
        throw DomainError(os.str());
    }
}

// integral of sin(n pi x) over [a, b]
double sine_integral(int n, double a, double b) {
    return (cos_pi(n * a) - cos_pi(n * b)) / (n * kPi);
}

void check_unit(double lo, double hi, const char* what) {
    if (!(0.0 <= lo && lo < hi && hi <= 1.0)) {
        std::ostringstream os;
        os << what << " needs 0 <= lo < hi <= 1, got [" << lo << ", " << hi << "]";
        throw DomainError(os.str());
    }
}

}  // namespace

int dimension(Domain d) noexcept { return d == Domain::Interval01 ? 1 : 2; }

double eigenvalue(Domain domain, ModeIndex idx) {
    check_index(domain, idx);
    const double n = idx.n;
    if (domain == Domain::Interval01) return n * n * kPi * kPi;
    const double m = idx.m;
    return (n * n + m * m) * kPi * kPi;
}

double eigenfunction_value(Domain domain, ModeIndex idx, double x, double y) {
    check_index(domain, idx);
    if (domain == Domain::Interval01) return kSqrt2 * sin_pi(idx.n * x);
    return 2.0 * sin_pi(idx.n * x) * sin_pi(idx.m * y);
}

Domain SpatialProfile::domain() const {
    if (std::holds_alternative<CharInterval>(shape) || std::holds_alternative<PointMass>(shape)) {
        return Domain::Interval01;
    }
    return Domain::Square01;
}

void SpatialProfile::validate() const {
    if (!std::isfinite(amplitude)) throw DomainError("profile amplitude must be finite");
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CharInterval>) {
                check_unit(s.a, s.b, "CharInterval");
            } else if constexpr (std::is_same_v<T, PointMass>) {
                if (!(s.x0 > 0.0 && s.x0 < 1.0)) throw DomainError("PointMass location must lie in (0, 1)");
            } else {
                check_unit(s.a, s.b, "rectangle x-range");
                check_unit(s.c, s.d, "rectangle y-range");
            }
        },
        shape);
}

double profile_coefficient(const SpatialProfile& profile, ModeIndex idx) {
    const Domain domain = profile.domain();
    check_index(domain, idx);
    const int n = idx.n;
    const int m = idx.m;
    const double value = std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CharInterval>) {
                return kSqrt2 * sine_integral(n, s.a, s.b);
            } else if constexpr (std::is_same_v<T, PointMass>) {
                return kSqrt2 * sin_pi(n * s.x0);
            } else if constexpr (std::is_same_v<T, CharRect>) {
                return 2.0 * sine_integral(n, s.a, s.b) * sine_integral(m, s.c, s.d);
            } else {
                // horizontal edges y = c, d and vertical edges x = a, b
                const double horizontal = (sin_pi(m * s.c) + sin_pi(m * s.d)) * sine_integral(n, s.a, s.b);
                const double vertical = (sin_pi(n * s.a) + sin_pi(n * s.b)) * sine_integral(m, s.c, s.d);
                return 2.0 * (horizontal + vertical);
            }
        },
        profile.shape);
    return profile.amplitude * value;
}

TimeProfile::TimeProfile(std::vector<double> breakpoints, std::vector<double> levels)
    : breaks_(std::move(breakpoints)), levels_(std::move(levels)) {
    if (breaks_.size() < 2 || levels_.size() + 1 != breaks_.size()) {
        throw DomainError("time profile needs m+1 breakpoints for m levels, m >= 1");
    }
    if (breaks_.front() != 0.0) throw DomainError("time profile must start at t = 0");
    for (std::size_t i = 1; i < breaks_.size(); ++i) {
        if (!(breaks_[i] > breaks_[i - 1]) || !std::isfinite(breaks_[i])) {
            throw DomainError("time profile breakpoints must be finite and strictly ascending");
        }
    }
    for (double c : levels_) {
        if (!std::isfinite(c)) throw DomainError("time profile levels must be finite");
    }
}

TimeProfile TimeProfile::constant(double level, double T) { return TimeProfile({0.0, T}, {level}); }

double TimeProfile::value(double t) const {
    if (t < 0.0 || t > breaks_.back()) {
        std::ostringstream os;
        os << "time " << t << " outside [0, " << breaks_.back() << "]";
        throw DomainError(os.str());
    }
    for (std::size_t i = 1; i + 1 < breaks_.size(); ++i) {
        if (t < breaks_[i]) return levels_[i - 1];
    }
    return levels_.back();
}

std::vector<double> TimeProfile::jumps() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < levels_.size(); ++i) {
        if (levels_[i] != levels_[i - 1]) out.push_back(breaks_[i]);
    }
    return out;
}

SpectralField::SpectralField(Domain domain, int truncation)
    : domain_(domain), J_(truncation) {
    if (truncation < 1) throw DomainError("spectral truncation must be at least 1");
    const std::size_t J = static_cast<std::size_t>(truncation);
    coeffs_.assign(domain == Domain::Interval01 ? J : J * J, 0.0);
}

SpectralField::SpectralField(Domain domain, int truncation, std::vector<double> coeffs)
    : SpectralField(domain, truncation) {
    if (coeffs.size() != coeffs_.size()) throw DomainError("coefficient count does not match truncation");
    coeffs_ = std::move(coeffs);
}

std::size_t SpectralField::offset(ModeIndex idx) const {
    check_index(domain_, idx);
    if (idx.n > J_ || (domain_ == Domain::Square01 && idx.m > J_)) {
        throw DomainError("mode index beyond the field's truncation");
    }
    if (domain_ == Domain::Interval01) return static_cast<std::size_t>(idx.n - 1);
    return static_cast<std::size_t>(idx.n - 1) * static_cast<std::size_t>(J_) +
           static_cast<std::size_t>(idx.m - 1);
}

double& SpectralField::operator[](ModeIndex idx) { return coeffs_[offset(idx)]; }

double SpectralField::operator[](ModeIndex idx) const { return coeffs_[offset(idx)]; }

double SpectralField::value_at(double x, double y) const {
    double sum = 0.0;
    if (domain_ == Domain::Interval01) {
        for (int j = 1; j <= J_; ++j) sum += coeffs_[j - 1] * eigenfunction_value(domain_, {j, 0}, x);
        return sum;
    }
    std::vector<double> sy(J_);
    for (int m = 1; m <= J_; ++m) sy[m - 1] = sin_pi(m * y);
    for (int n = 1; n <= J_; ++n) {
        const double sx = sin_pi(n * x);
        const double* row = &coeffs_[static_cast<std::size_t>(n - 1) * J_];
        for (int m = 1; m <= J_; ++m) sum += 2.0 * sx * sy[m - 1] * row[m - 1];
    }
    return sum;
}

SpectralField expand_profile(const SpatialProfile& profile, int J) {
    profile.validate();
    SpectralField field(profile.domain(), J);
    if (field.domain() == Domain::Interval01) {
        for (int j = 1; j <= J; ++j) field[{j, 0}] = profile_coefficient(profile, {j, 0});
    } else {
        for (int n = 1; n <= J; ++n) {
            for (int m = 1; m <= J; ++m) field[{n, m}] = profile_coefficient(profile, {n, m});
        }
    }
    return field;
}

double norm_dotH(const SpectralField& field, double s) {
    if (!(s >= -2.0 && s <= 3.0)) {
        std::ostringstream os;
        os << "Sobolev index " << s << " outside [-2, 3]";
        throw DomainError(os.str());
    }
    const int J = field.truncation();
    double sum = 0.0;
    if (field.domain() == Domain::Interval01) {
        for (int j = 1; j <= J; ++j) {
            const double c = field[{j, 0}];
            sum += std::pow(eigenvalue(Domain::Interval01, {j, 0}), s) * c * c;
        }
    } else {
        for (int n = 1; n <= J; ++n) {
            for (int m = 1; m <= J; ++m) {
                const double c = field[{n, m}];
                sum += std::pow(eigenvalue(Domain::Square01, {n, m}), s) * c * c;
            }
        }
    }
    return std::sqrt(sum);
}

}  // namespace fracfem
