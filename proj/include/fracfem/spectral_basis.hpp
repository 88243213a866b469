#pragma once

#include <string>
#include <variant>
#include <vector>

namespace fracfem {

enum class Domain { Interval01, Square01 };

int dimension(Domain d) noexcept;

/// Mode index; `m` is ignored (and conventionally 0) on the interval.
struct ModeIndex {
    int n = 1;
    int m = 0;
};

/// Dirichlet Laplacian eigenvalue, (j pi)^2 or (n^2 + m^2) pi^2.
double eigenvalue(Domain domain, ModeIndex idx);

/// sqrt(2) sin(j pi x) on the interval, 2 sin(n pi x) sin(m pi y) on the square.
double eigenfunction_value(Domain domain, ModeIndex idx, double x, double y = 0.0);

struct CharInterval {
    double a = 0.0;
    double b = 1.0;
};

struct PointMass {
    double x0 = 0.5;
};

struct CharRect {
    double a = 0.0, b = 1.0, c = 0.0, d = 1.0;
};

/// Line mass on the boundary of the rectangle [a,b] x [c,d].
struct CurveMass {
    double a = 0.0, b = 1.0, c = 0.0, d = 1.0;
};

using ProfileShape = std::variant<CharInterval, PointMass, CharRect, CurveMass>;

struct SpatialProfile {
    ProfileShape shape;
    double amplitude = 1.0;

    Domain domain() const;
    /// Throws DomainError on degenerate or out-of-range geometry.
    void validate() const;
};

/// Coefficient (g, phi_idx) of a spatial profile, in closed form.
double profile_coefficient(const SpatialProfile& profile, ModeIndex idx);

/// Piecewise-constant, right-continuous function on [0, T].
class TimeProfile {
public:
    /// `breakpoints` t_0 = 0 < t_1 < ... < t_m = T, `levels` c_1..c_m on [t_{i-1}, t_i).
    TimeProfile(std::vector<double> breakpoints, std::vector<double> levels);

    static TimeProfile constant(double level, double T);

    double value(double t) const;
    double final_time() const noexcept { return breaks_.back(); }
    const std::vector<double>& breakpoints() const noexcept { return breaks_; }
    const std::vector<double>& levels() const noexcept { return levels_; }
    /// Interior breakpoints where the level actually changes.
    std::vector<double> jumps() const;

private:
    std::vector<double> breaks_;
    std::vector<double> levels_;
};

struct SourceTerm {
    SpatialProfile spatial;
    TimeProfile temporal;
};

/// Dense truncated sine-series coefficients. On the interval index j maps to
/// coeffs[j-1]; on the square (n, m) maps to coeffs[(n-1) J + (m-1)].
class SpectralField {
public:
    SpectralField(Domain domain, int truncation);
    SpectralField(Domain domain, int truncation, std::vector<double> coeffs);

    Domain domain() const noexcept { return domain_; }
    int truncation() const noexcept { return J_; }
    double& operator[](ModeIndex idx);
    double operator[](ModeIndex idx) const;
    const std::vector<double>& coeffs() const noexcept { return coeffs_; }

    /// Partial sum of the series at a point.
    double value_at(double x, double y = 0.0) const;

private:
    std::size_t offset(ModeIndex idx) const;

    Domain domain_;
    int J_;
    std::vector<double> coeffs_;
};

SpectralField expand_profile(const SpatialProfile& profile, int J);

/// (sum lambda^s coeff^2)^{1/2}; s must lie in [-2, 3].
double norm_dotH(const SpectralField& field, double s);

}  // namespace fracfem
