#include "fracfem/l1_fully_discrete.hpp"

#include <cmath>

#include "fracfem/errors.hpp"

namespace fracfem {

std::vector<double> l1_weights(FracOrder alpha, int n) {
    if (n < 1) throw DomainError("L1 weights need n >= 1");
    const double e = 1.0 - alpha.value();
    std::vector<double> b(n);
    double prev = 0.0;
    for (int j = 0; j < n; ++j) {
        const double next = std::pow(j + 1.0, e);
        b[j] = next - prev;
        prev = next;
    }
    return b;
}

L1Scheme::L1Scheme(FracOrder alpha, double tau, double T) : alpha_(alpha), tau_(tau) {
    if (!(tau > 0.0) || !(T > 0.0)) throw DomainError("L1 scheme needs tau > 0 and T > 0");
    const double steps = T / tau;
    n_ = static_cast<int>(std::lround(steps));
    if (n_ < 1 || std::abs(steps - n_) > 1e-9 * steps) throw DomainError("T must be an integer multiple of tau");
    b_ = l1_weights(alpha, n_);
    scale_ = 1.0 / (std::tgamma(2.0 - alpha.value()) * std::pow(tau, alpha.value()));
}

double L1Scheme::derivative(const std::vector<double>& samples, int n) const {
    if (n < 1 || n > n_ || static_cast<int>(samples.size()) <= n) throw DomainError("L1 derivative index out of range");
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += b_[j] * (samples[n - j] - samples[n - j - 1]);
    return scale_ * s;
}

NodalField L1Trajectory::at_step(int n) const {
    if (n < 0 || n > steps()) throw DomainError("L1 step out of range");
    return NodalField(Mesh(mesh), states[n]);
}

namespace {

// LDL^T-style Thomas factorization of a symmetric tridiagonal matrix, reused every step
class SpdTridiagonal {
public:
    explicit SpdTridiagonal(const Tridiagonal& A) : A_(A), c_(A.size()), piv_(A.size()) {
        for (std::size_t i = 0; i < A.size(); ++i) {
            piv_[i] = A.diag[i] - (i > 0 ? A.lower[i] * c_[i - 1] : 0.0);
            if (!(piv_[i] > 0.0)) throw DomainError("L1 system matrix is not positive definite");
            c_[i] = i + 1 < A.size() ? A.upper[i] / piv_[i] : 0.0;
        }
    }

    void solve(std::vector<double>& x) const {
        const std::size_t n = x.size();
        x[0] /= piv_[0];
        for (std::size_t i = 1; i < n; ++i) x[i] = (x[i] - A_.lower[i] * x[i - 1]) / piv_[i];
        for (std::size_t i = n - 1; i-- > 0;) x[i] -= c_[i] * x[i + 1];
    }

private:
    Tridiagonal A_;
    std::vector<double> c_, piv_;
};

}  // namespace

L1Trajectory l1_march(const Mesh1D& mesh, const Coefficient& k, const Coefficient& q, SchemeKind scheme,
                      FracOrder alpha, const SourceTerm& source, double tau, double T) {
    if (source.spatial.domain() != Domain::Interval01) throw UnsupportedError("the L1 solver is one-dimensional");
    if (T > source.temporal.final_time() * (1 + 1e-12)) throw DomainError("march extends past the time profile");
    const L1Scheme l1(alpha, tau, T);
    const int N = mesh.interior();
    const int steps = l1.n_steps();
    const auto mats = assemble_matrices(mesh, k, q);

    Tridiagonal M(N);
    if (scheme == SchemeKind::Galerkin) {
        M = mats.mass;
    } else {
        M.diag = mats.lumped_mass;
    }
    const double c = l1.scale();
    Tridiagonal A = mats.stiffness;
    for (int i = 0; i < N; ++i) {
        A.diag[i] += c * M.diag[i];
        A.lower[i] += c * M.lower[i];
        A.upper[i] += c * M.upper[i];
    }
    const SpdTridiagonal solver(A);
    const auto load = load_vector(Mesh(mesh), source.spatial);
    const auto& b = l1.weights();

    L1Trajectory traj{mesh, tau, {}};
    traj.states.assign(steps + 1, std::vector<double>(N, 0.0));
    std::vector<double> hist(N);
    for (int n = 1; n <= steps; ++n) {
        hist = traj.states[n - 1];
        for (int j = 1; j < n; ++j) {
            const auto& hi = traj.states[n - j];
            const auto& lo = traj.states[n - j - 1];
            const double w = b[j];
            for (int i = 0; i < N; ++i) hist[i] -= w * (hi[i] - lo[i]);
        }
        auto rhs = M.apply(hist);
        const double level = source.temporal.value(std::min(T * n / steps, source.temporal.final_time()));
        for (int i = 0; i < N; ++i) rhs[i] = c * rhs[i] + level * load[i];
        solver.solve(rhs);
        traj.states[n] = std::move(rhs);
    }
    return traj;
}

}  // namespace fracfem
