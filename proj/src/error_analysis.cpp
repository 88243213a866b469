#include "fracfem/error_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "fracfem/errors.hpp"
#include "fracfem/trig.hpp"

namespace fracfem {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(pi z) / (pi z)
double sinc_pi(double z) {
    if (std::abs(z) < 1e-5) return 1.0 - kPi * kPi * z * z / 6.0;
    return sin_pi(z) / (kPi * z);
}

int wrap(int j, int period) {
    const int r = j % period;
    return r < 0 ? r + period : r;
}

}  // namespace

int norm_order(NormKind norm) noexcept { return norm == NormKind::L2 ? 0 : 1; }

std::string to_string(NormKind norm) { return norm == NormKind::L2 ? "L2" : "H1"; }

std::string to_string(TimeAggregation aggregation) {
    switch (aggregation) {
        case TimeAggregation::AtTime: return "at-t";
        case TimeAggregation::L2Time: return "L2(0,T)";
        case TimeAggregation::LinfTime: return "Linf(0,T)";
    }
    return "?";
}

RateFit fit_rate(const std::vector<ErrorRecord>& records) {
    if (records.size() < 3) throw DomainError("a rate needs at least 3 levels");
    const double n = static_cast<double>(records.size());
    double sx = 0, sy = 0;
    for (const auto& r : records) {
        if (!(r.value > 0.0) || !std::isfinite(r.value)) throw DomainError("rate fit needs positive finite errors");
        sx += -r.level * std::numbers::ln2;
        sy += std::log(r.value);
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (const auto& r : records) {
        const double dx = -r.level * std::numbers::ln2 - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(r.value) - my);
    }
    if (sxx == 0.0) throw DomainError("rate fit needs distinct levels");
    RateFit fit;
    fit.rate = sxy / sxx;
    double ss = 0;
    for (const auto& r : records) {
        const double x = -r.level * std::numbers::ln2;
        const double res = std::log(r.value) - (my + fit.rate * (x - mx));
        ss += res * res;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

FeSineTransform::FeSineTransform(const NodalField& u)
    : domain_(mesh_domain(u.mesh)), h_(mesh_size(u.mesh)) {
    l2_ = fe_l2_norm_squared(u);
    h1_ = fe_h1_seminorm_squared(u);
    if (const auto* m1 = std::get_if<Mesh1D>(&u.mesh)) {
        const int N = m1->interior();
        period_ = 2 * (N + 1);
        sin_sums_.assign(period_, 0.0);
        for (int r = 0; r < period_; ++r) {
            double s = 0.0;
            for (int k = 1; k <= N; ++k) s += u.values[k - 1] * sin_pi(static_cast<double>(r) * k / (N + 1));
            sin_sums_[r] = std::numbers::sqrt2 * s;
        }
        return;
    }
    const auto& m2 = std::get<Mesh2D>(u.mesh);
    const int N = m2.subdivisions();
    const int M = m2.per_axis();
    period_ = 2 * N;
    const std::size_t P = static_cast<std::size_t>(period_);
    std::vector<double> st(P * M), ct(P * M);  // [r][i]
    for (int r = 0; r < period_; ++r) {
        for (int i = 1; i <= M; ++i) {
            st[r * M + (i - 1)] = sin_pi(static_cast<double>(r) * i / N);
            ct[r * M + (i - 1)] = cos_pi(static_cast<double>(r) * i / N);
        }
    }
    // partial transforms along i, then along j
    std::vector<double> ts(P * M, 0.0), tc(P * M, 0.0);  // [r][j]
    for (int r = 0; r < period_; ++r) {
        for (int i = 1; i <= M; ++i) {
            const double s = st[r * M + (i - 1)], c = ct[r * M + (i - 1)];
            const double* row = &u.values[m2.index(i, 1)];
            for (int j = 0; j < M; ++j) {
                ts[r * M + j] += s * row[j];
                tc[r * M + j] += c * row[j];
            }
        }
    }
    sin_sums_.assign(P * P, 0.0);
    cos_sums_.assign(P * P, 0.0);
    for (std::size_t r = 0; r < P; ++r) {
        for (std::size_t q = 0; q < P; ++q) {
            double s = 0.0, c = 0.0;
            for (int j = 0; j < M; ++j) {
                s += ts[r * M + j] * st[q * M + j];
                c += tc[r * M + j] * ct[q * M + j];
            }
            sin_sums_[r * P + q] = s;
            cos_sums_[r * P + q] = c;
        }
    }
}

double FeSineTransform::coefficient(ModeIndex idx) const {
    if (domain_ == Domain::Interval01) {
        if (idx.n < 1) throw DomainError("mode index must be positive");
        const double s = sinc_pi(0.5 * idx.n * h_);
        return h_ * s * s * sin_sums_[wrap(idx.n, period_)];
    }
    if (idx.n < 1 || idx.m < 1) throw DomainError("mode index must be positive");
    const double sn = sinc_pi(0.5 * idx.n * h_), sm = sinc_pi(0.5 * idx.m * h_);
    const double sig_minus = sinc_pi(0.5 * (idx.n - idx.m) * h_);
    const double sig_plus = sinc_pi(0.5 * (idx.n + idx.m) * h_);
    const std::size_t P = static_cast<std::size_t>(period_);
    const std::size_t k = static_cast<std::size_t>(wrap(idx.n, period_)) * P + wrap(idx.m, period_);
    return h_ * h_ * sn * sm * ((sig_minus + sig_plus) * sin_sums_[k] + (sig_minus - sig_plus) * cos_sums_[k]);
}

SpectralField fe_sine_coefficients(const NodalField& u_h, int J) {
    const FeSineTransform tr(u_h);
    SpectralField field(tr.domain(), J);
    if (tr.domain() == Domain::Interval01) {
        for (int j = 1; j <= J; ++j) field[{j, 0}] = tr.coefficient({j, 0});
    } else {
        for (int n = 1; n <= J; ++n) {
            for (int m = 1; m <= J; ++m) field[{n, m}] = tr.coefficient({n, m});
        }
    }
    return field;
}

double error_norm(const NodalField& u_h, const SpectralField& ref, int p) {
    if (p != 0 && p != 1) throw DomainError("error norms are defined for p = 0 or p = 1");
    if (mesh_domain(u_h.mesh) != ref.domain()) throw DomainError("field and reference live on different domains");
    const FeSineTransform tr(u_h);
    const int J = ref.truncation();
    double sum = 0.0;
    auto add = [&](ModeIndex idx) {
        const double d = ref[idx] - tr.coefficient(idx);
        sum += (p == 0 ? 1.0 : eigenvalue(ref.domain(), idx)) * d * d;
    };
    if (ref.domain() == Domain::Interval01) {
        for (int j = 1; j <= J; ++j) add({j, 0});
    } else {
        for (int n = 1; n <= J; ++n) {
            for (int m = 1; m <= J; ++m) add({n, m});
        }
    }
    return std::sqrt(sum);
}

double fe_error_norm(const NodalField& a, const NodalField& b, int p) {
    if (a.values.size() != b.values.size() || mesh_size(a.mesh) != mesh_size(b.mesh) ||
        mesh_domain(a.mesh) != mesh_domain(b.mesh)) {
        throw DomainError("fields live on different meshes");
    }
    std::vector<double> d(a.values.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.values[i] - b.values[i];
    const NodalField diff(a.mesh, std::move(d));
    return std::sqrt(p == 0 ? fe_l2_norm_squared(diff) : fe_h1_seminorm_squared(diff));
}

NodalField prolongate(const NodalField& coarse, const Mesh1D& fine) {
    const auto* mc = std::get_if<Mesh1D>(&coarse.mesh);
    if (!mc) throw DomainError("prolongation is one-dimensional");
    const int nc = mc->interior() + 1, nf = fine.interior() + 1;
    if (nf % nc != 0) throw DomainError("fine mesh is not nested in the coarse mesh");
    const int r = nf / nc;
    auto coarse_value = [&](int k) { return k <= 0 || k >= nc ? 0.0 : coarse.values[k - 1]; };
    std::vector<double> v(fine.interior());
    for (int i = 1; i < nf; ++i) {
        const int k = i / r, off = i % r;
        const double w = static_cast<double>(off) / r;
        v[i - 1] = (1.0 - w) * coarse_value(k) + w * coarse_value(k + 1);
    }
    return NodalField(Mesh(fine), std::move(v));
}

namespace {

// Reference coefficients u_idx(t), grown on demand. 2D storage is a square of
// side `cap_` in row-major order.
class ReferenceStore {
public:
    ReferenceStore(const ReferenceSolution& ref, double t) : ref_(ref), t_(t), d_(ref.domain()) {}

    void ensure(int J) {
        if (J <= J_) return;
        if (d_ == Domain::Interval01) {
            data_.resize(J);
            for (int j = J_ + 1; j <= J; ++j) data_[j - 1] = ref_.coefficient({j, 0}, t_);
            J_ = J;
            return;
        }
        std::vector<double> grown(static_cast<std::size_t>(J) * J, 0.0);
        for (int n = 1; n <= J_; ++n) {
            std::copy_n(&data_[static_cast<std::size_t>(n - 1) * J_], J_, &grown[static_cast<std::size_t>(n - 1) * J]);
        }
        const auto& rel = ref_.relaxation();
        const auto& sp = ref_.source().spatial;
        const auto& tp = ref_.source().temporal;
        for (int n = 1; n <= J; ++n) {
            for (int m = n; m <= J; ++m) {
                if (n <= J_ && m <= J_) continue;
                const double g1 = profile_coefficient(sp, {n, m});
                const double g2 = n == m ? g1 : profile_coefficient(sp, {m, n});
                if (g1 == 0.0 && g2 == 0.0) continue;
                const double resp = mode_response(rel, eigenvalue(d_, {n, m}), tp, t_);
                grown[static_cast<std::size_t>(n - 1) * J + (m - 1)] = g1 * resp;
                grown[static_cast<std::size_t>(m - 1) * J + (n - 1)] = g2 * resp;
            }
        }
        data_ = std::move(grown);
        J_ = J;
    }

    double operator()(int n, int m) const {
        if (d_ == Domain::Interval01) return data_[n - 1];
        return data_[static_cast<std::size_t>(n - 1) * J_ + (m - 1)];
    }

private:
    const ReferenceSolution& ref_;
    double t_;
    Domain d_;
    int J_ = 0;
    std::vector<double> data_;
};

// Above this share of the reported value the extrapolation is not trusted.
constexpr double kMaxTailShare = 0.5;

struct NormTrack {
    double exact = 0.0;            // ||u_h||_p^2
    long double partial = 0.0L;    // sum lambda^p (u^2 - 2 u c)
    std::vector<double> values;    // V_i at each checkpoint
    std::vector<double> estimates; // extrapolated errors
    ErrorEstimate result;
    bool done = false;
};

// Extrapolated error and tail share after the latest checkpoint.
void update(NormTrack& nt, const ErrorPolicy& policy, int J) {
    const auto& V = nt.values;
    const std::size_t i = V.size() - 1;
    double tail = 0.0;
    bool geometric = false;
    if (i >= 2) {
        const double d1 = V[i] - V[i - 1], d0 = V[i - 1] - V[i - 2];
        if (d1 == 0.0) {
            geometric = true;
        } else if (d0 != 0.0) {
            const double r = d1 / d0;
            if (r > 0.0 && r < 0.9) {
                tail = d1 * r / (1.0 - r);
                geometric = true;
            }
        }
    }
    const double raw = std::sqrt(std::max(V[i], 0.0));
    const double value = std::sqrt(std::max(V[i] + tail, 0.0));
    nt.estimates.push_back(value);
    nt.result.value = value;
    nt.result.truncation = J;
    nt.result.tail_share = value > 0.0 ? std::abs(value - raw) / value : 0.0;
    if (V[i] == 0.0 && i >= 1 && V[i - 1] == 0.0) {
        nt.done = true;
        return;
    }
    // two consecutive small changes of a positive extrapolated value
    if (i >= 3 && geometric && value > 0.0 && nt.estimates[i - 2] > 0.0) {
        const auto& e = nt.estimates;
        const double change = std::max(std::abs(e[i] - e[i - 1]), std::abs(e[i - 1] - e[i - 2]));
        if (change <= policy.target * value && nt.result.tail_share <= kMaxTailShare) nt.done = true;
    }
}

void finalize_at_cap(NormTrack& nt, const ErrorPolicy& policy) {
    const auto& e = nt.estimates;
    const std::size_t i = e.size() - 1;
    const bool agree = i >= 1 && e[i] > 0.0 && std::abs(e[i] - e[i - 1]) <= policy.guard * e[i];
    nt.result.degraded = !(agree && nt.result.tail_share <= kMaxTailShare);
    nt.done = true;
}

}  // namespace

std::vector<FieldErrors> spectral_errors(const ReferenceSolution& ref, double t, const std::vector<NodalField>& fields,
                                         const ErrorPolicy& policy) {
    const Domain d = ref.domain();
    const int cap = d == Domain::Interval01 ? policy.max_1d : policy.max_2d;
    struct Track {
        FeSineTransform tr;
        int last = 0;
        int checkpoint = 0;
        NormTrack norms[2];
    };
    std::vector<Track> tracks;
    tracks.reserve(fields.size());
    for (const auto& f : fields) {
        if (mesh_domain(f.mesh) != d) throw DomainError("field and reference live on different domains");
        Track tk{FeSineTransform(f), 0, 0, {}};
        const int P = tk.tr.period();
        tk.checkpoint = P * ((std::max(policy.initial, 1) + P - 1) / P);
        tk.norms[0].exact = tk.tr.norm_squared(0);
        tk.norms[1].exact = tk.tr.norm_squared(1);
        tracks.push_back(std::move(tk));
    }

    ReferenceStore store(ref, t);
    auto active = [](const Track& tk) { return !tk.norms[0].done || !tk.norms[1].done; };
    while (true) {
        int next = 0;
        for (const auto& tk : tracks) {
            if (active(tk)) next = next == 0 ? tk.checkpoint : std::min(next, tk.checkpoint);
        }
        if (next == 0) break;
        if (next > cap) {
            for (auto& tk : tracks) {
                for (auto& nt : tk.norms) {
                    if (!nt.done) finalize_at_cap(nt, policy);
                }
            }
            break;
        }
        store.ensure(next);
        for (auto& tk : tracks) {
            if (!active(tk) || tk.checkpoint != next) continue;
            long double s0 = 0.0L, s1 = 0.0L;
            auto add = [&](int n, int m) {
                const double u = store(n, m);
                const double c = tk.tr.coefficient({n, m});
                const double w = u * (u - 2.0 * c);
                s0 += w;
                s1 += eigenvalue(d, {n, m}) * w;
            };
            if (d == Domain::Interval01) {
                for (int j = tk.last + 1; j <= next; ++j) add(j, 0);
            } else {
                for (int n = 1; n <= next; ++n) {
                    for (int m = n <= tk.last ? tk.last + 1 : 1; m <= next; ++m) add(n, m);
                }
            }
            tk.norms[0].partial += s0;
            tk.norms[1].partial += s1;
            for (auto& nt : tk.norms) {
                if (nt.done) continue;
                nt.values.push_back(static_cast<double>(nt.partial + nt.exact));
                update(nt, policy, next);
            }
            tk.last = next;
            tk.checkpoint = 2 * next;
        }
    }

    std::vector<FieldErrors> out;
    out.reserve(tracks.size());
    for (const auto& tk : tracks) out.push_back({tk.norms[0].result, tk.norms[1].result});
    return out;
}

namespace {

using Gauss8 = boost::math::quadrature::gauss<double, 8>;

// 8-point Gauss-Legendre nodes and weights on [a, b].
void gauss_on(double a, double b, std::vector<double>& t, std::vector<double>& w) {
    const auto& x = Gauss8::abscissa();
    const auto& wt = Gauss8::weights();
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double wi = wt[i];
        if (x[i] == 0.0) {
            t.push_back(c);
            w.push_back(r * wi);
            continue;
        }
        t.push_back(c - r * x[i]);
        w.push_back(r * wi);
        t.push_back(c + r * x[i]);
        w.push_back(r * wi);
    }
}

// Graded rule on [0, T] clustering at 0 and at each breakpoint from both sides.
void graded_rule(double T, const std::vector<double>& jumps, int layers, double ratio, std::vector<double>& t,
                 std::vector<double>& w) {
    std::vector<double> br{0.0};
    for (double j : jumps) {
        if (j > 0.0 && j < T) br.push_back(j);
    }
    br.push_back(T);
    std::sort(br.begin(), br.end());
    for (std::size_t p = 0; p + 1 < br.size(); ++p) {
        const double a = br[p], b = br[p + 1], mid = 0.5 * (a + b), half = mid - a;
        // toward a
        double outer = 1.0;
        for (int l = 0; l < layers; ++l) {
            gauss_on(a + half * outer * ratio, a + half * outer, t, w);
            outer *= ratio;
        }
        gauss_on(a, a + half * outer, t, w);
        // toward b
        outer = 1.0;
        for (int l = 0; l < layers; ++l) {
            gauss_on(b - half * outer, b - half * outer * ratio, t, w);
            outer *= ratio;
        }
        gauss_on(b - half * outer, b, t, w);
    }
}

std::vector<double> sample_grid(double T, const std::vector<double>& jumps, int intervals) {
    std::vector<double> t;
    const double dt = T / intervals;
    for (int i = 0; i <= intervals; ++i) t.push_back(T * i / intervals);
    std::vector<double> spots{0.0};
    for (double j : jumps) {
        if (j > 0.0 && j < T) spots.push_back(j);
    }
    for (double s : spots) {
        for (int q = 1; q < 4; ++q) {
            if (s + q * dt / 4 <= T) t.push_back(s + q * dt / 4);
            if (s > 0.0) t.push_back(s - q * dt / 4);
        }
    }
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

std::vector<double> aggregate_once(const std::function<std::vector<double>(double)>& norm_fn,
                                   TimeAggregation aggregation, double T, const std::vector<double>& jumps,
                                   const AggregationPolicy& policy, bool refined) {
    std::vector<double> acc;
    auto accumulate = [&](const std::vector<double>& v, double weight, bool square) {
        if (acc.empty()) acc.assign(v.size(), 0.0);
        if (v.size() != acc.size()) throw DomainError("norm function changed its output size");
        for (std::size_t i = 0; i < v.size(); ++i) {
            acc[i] = square ? acc[i] + weight * v[i] * v[i] : std::max(acc[i], v[i]);
        }
    };
    if (aggregation == TimeAggregation::L2Time) {
        std::vector<double> t, w;
        graded_rule(T, jumps, refined ? 2 * policy.layers : policy.layers, refined ? 0.5 : 0.25, t, w);
        for (std::size_t i = 0; i < t.size(); ++i) accumulate(norm_fn(t[i]), w[i], true);
        for (double& a : acc) a = std::sqrt(a);
        return acc;
    }
    const int intervals = std::max(policy.linf_points - 1, 1) * (refined ? 2 : 1);
    for (double s : sample_grid(T, jumps, intervals)) accumulate(norm_fn(s), 0.0, false);
    return acc;
}

}  // namespace

std::vector<double> time_aggregate(const std::function<std::vector<double>(double)>& norm_fn,
                                   TimeAggregation aggregation, double T, const std::vector<double>& jumps,
                                   const AggregationPolicy& policy) {
    if (!(T > 0.0)) throw DomainError("aggregation needs T > 0");
    if (aggregation == TimeAggregation::AtTime) return norm_fn(T);
    const auto base = aggregate_once(norm_fn, aggregation, T, jumps, policy, false);
    const auto fine = aggregate_once(norm_fn, aggregation, T, jumps, policy, true);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const double scale = std::max(std::abs(fine[i]), 1e-300);
        if (std::abs(fine[i] - base[i]) > policy.stability * scale) {
            std::ostringstream os;
            os << to_string(aggregation) << " aggregate changed from " << base[i] << " to " << fine[i]
               << " under time-grid doubling";
            throw EvaluationError("aggregation", os.str());
        }
    }
    return fine;
}

double time_aggregate(const std::function<double(double)>& norm_fn, TimeAggregation aggregation, double T,
                      const std::vector<double>& jumps, const AggregationPolicy& policy) {
    return time_aggregate([&](double t) { return std::vector<double>{norm_fn(t)}; }, aggregation, T, jumps,
                          policy)[0];
}

}  // namespace fracfem
