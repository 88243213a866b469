#pragma once

#include <cmath>
#include <numbers>

namespace fracfem {

/// sin(pi z) with exact zeros at the integers and reduction before scaling.
inline double sin_pi(double z) {
    const double r = std::remainder(z, 2.0);  // in [-1, 1]
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r == 0.5) return 1.0;
    if (r == -0.5) return -1.0;
    return std::sin(std::numbers::pi * r);
}

inline double cos_pi(double z) {
    const double r = std::abs(std::remainder(z, 2.0));  // in [0, 1]
    if (r == 0.5) return 0.0;
    return std::cos(std::numbers::pi * r);
}

/// sin(z) / z.
inline double sinc(double z) {
    if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
}

}  // namespace fracfem
