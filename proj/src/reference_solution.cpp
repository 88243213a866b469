#include "fracfem/reference_solution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracfem/errors.hpp"

namespace fracfem {

double mode_response(const Relaxation& relax, double lambda, const TimeProfile& temporal, double t) {
    const auto& br = temporal.breakpoints();
    const auto& lv = temporal.levels();
    if (t < 0.0 || t > br.back()) throw DomainError("mode response requested outside [0, T]");
    double sum = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        if (t <= br[i]) break;
        const double on = relax.step(lambda, t - br[i]);
        const double off = relax.step(lambda, std::max(t - br[i + 1], 0.0));
        sum += lv[i] * (on - off);
    }
    return sum;
}

double mode_response(double lambda, FracOrder alpha, const TimeProfile& temporal, double t) {
    return mode_response(Relaxation(alpha), lambda, temporal, t);
}

ReferenceSolution::ReferenceSolution(SourceTerm source, FracOrder alpha, TruncationPolicy policy)
    : source_(std::move(source)), relax_(alpha), policy_(policy) {
    source_.spatial.validate();
}

double ReferenceSolution::coefficient(ModeIndex idx, double t) const {
    const double g = profile_coefficient(source_.spatial, idx);
    if (g == 0.0) return 0.0;
    return g * mode_response(relax_, eigenvalue(domain(), idx), source_.temporal, t);
}

SpectralField ReferenceSolution::solution_at(double t, int J) const {
    SpectralField field(domain(), J);
    if (domain() == Domain::Interval01) {
        for (int j = 1; j <= J; ++j) field[{j, 0}] = coefficient({j, 0}, t);
    } else {
        for (int n = 1; n <= J; ++n) {
            for (int m = 1; m <= J; ++m) field[{n, m}] = coefficient({n, m}, t);
        }
    }
    return field;
}

SpectralField ReferenceSolution::solution_at(double t) const {
    return solution_at(t, truncation_for(t, 0));
}

int ReferenceSolution::truncation_for(double t, int p) const {
    if (p != 0 && p != 1) throw DomainError("truncation is defined for p = 0 or p = 1");
    const Domain d = domain();
    const double tol = p == 0 ? policy_.l2_tolerance : policy_.h1_tolerance;
    const int cap = d == Domain::Interval01 ? policy_.max_1d : policy_.max_2d;
    auto weight = [&](ModeIndex idx) { return p == 0 ? 1.0 : eigenvalue(d, idx); };

    // leading contribution: largest weighted coefficient among the first modes
    double leading = 0.0;
    for (int n = 1; n <= 4; ++n) {
        for (int m = (d == Domain::Interval01 ? 0 : 1); m <= (d == Domain::Interval01 ? 0 : 4); ++m) {
            const double u = coefficient({n, m}, t);
            leading = std::max(leading, std::sqrt(weight({n, m})) * std::abs(u));
        }
    }
    if (leading == 0.0) return 1;

    for (int J = std::max(policy_.initial, 1); J <= cap / 2; J *= 2) {
        double shell = 0.0;
        if (d == Domain::Interval01) {
            for (int j = J + 1; j <= 2 * J; ++j) {
                const double u = coefficient({j, 0}, t);
                shell += weight({j, 0}) * u * u;
            }
        } else {
            for (int n = 1; n <= 2 * J; ++n) {
                for (int m = (n > J ? 1 : J + 1); m <= 2 * J; ++m) {
                    const double u = coefficient({n, m}, t);
                    shell += weight({n, m}) * u * u;
                }
            }
        }
        if (std::sqrt(shell) <= tol * leading) return J;
    }
    std::ostringstream os;
    os << "reference truncation cannot meet tolerance " << tol << " in the H^" << p
       << " norm below J = " << cap;
    throw EvaluationError("truncation", os.str());
}

}  // namespace fracfem
