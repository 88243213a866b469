#include "fracfem/study_harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "fracfem/errors.hpp"
#include "fracfem/l1_fully_discrete.hpp"

namespace fracfem {

using nlohmann::json;

namespace {

const std::vector<std::pair<ExampleId, std::string>> kExamples{
    {ExampleId::E1a, "1a"},
    {ExampleId::E1bOffGrid, "1b-offgrid"},
    {ExampleId::E1bOnGrid, "1b-ongrid"},
    {ExampleId::E1c, "1c"},
    {ExampleId::E2a, "2a"},
    {ExampleId::E2b, "2b"},
    {ExampleId::E2bConsistent, "2b-consistent-projection"},
};

bool two_dimensional(ExampleId id) {
    return id == ExampleId::E2a || id == ExampleId::E2b || id == ExampleId::E2bConsistent;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

[[noreturn]] void invalid(const std::string& what) { throw ValidationError(what); }

NormKind parse_norm(const std::string& s) {
    if (s == "L2") return NormKind::L2;
    if (s == "H1") return NormKind::H1;
    invalid("unknown norm '" + s + "' (expected L2 or H1)");
}

TimeAggregation parse_aggregation(const std::string& s) {
    for (auto a : {TimeAggregation::AtTime, TimeAggregation::L2Time, TimeAggregation::LinfTime}) {
        if (to_string(a) == s) return a;
    }
    invalid("unknown aggregation '" + s + "' (expected at-t, L2(0,T) or Linf(0,T))");
}

std::string scheme_name(SchemeKind s) { return s == SchemeKind::Galerkin ? "galerkin" : "lumped"; }

SchemeKind parse_scheme(const std::string& s) {
    if (s == "galerkin") return SchemeKind::Galerkin;
    if (s == "lumped") return SchemeKind::LumpedMass;
    invalid("unknown scheme '" + s + "' (expected lumped or galerkin)");
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) invalid("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
T get_as(const json& obj, const std::string& key) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        invalid("bad value for '" + key + "': " + e.what());
    }
}

}  // namespace

std::string to_string(ExampleId id) {
    for (const auto& [e, name] : kExamples) {
        if (e == id) return name;
    }
    return "?";
}

ExampleId parse_example(const std::string& name) {
    for (const auto& [e, n] : kExamples) {
        if (n == name) return e;
    }
    invalid("unknown example '" + name + "'");
}

void StudyConfig::validate() const {
    if (alphas.empty()) invalid("alpha list is empty");
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) invalid("alpha values must lie in (0, 1), got " + fmt6(a));
    }
    if (std::set<double>(alphas.begin(), alphas.end()).size() != alphas.size()) invalid("alpha values repeat");
    if (levels.empty()) invalid("level list is empty");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 1 || levels[i] > 20) invalid("levels must lie in [1, 20]");
        if (i > 0 && levels[i] <= levels[i - 1]) invalid("levels must be strictly ascending");
    }
    if (two_dimensional(example)) {
        if (scheme != SchemeKind::LumpedMass) invalid("2D examples support only the lumped mass scheme");
        if (levels.back() > 10) invalid("2D levels must not exceed 10");
    }
    if (example == ExampleId::E1c) {
        if (aggregation != TimeAggregation::AtTime) invalid("example 1c supports only the at-t aggregation");
        if (levels.back() >= tolerances.benchmark_level) invalid("levels must stay below the benchmark level");
        if (tolerances.benchmark_level > 14) invalid("benchmark level must not exceed 14");
        if (!(tolerances.tau > 0.0)) invalid("tau must be positive");
        const double steps = time / tolerances.tau;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps) invalid("time must be a multiple of tau");
    }
    if (norms.empty()) invalid("norm list is empty");
    if (std::set<NormKind>(norms.begin(), norms.end()).size() != norms.size()) invalid("norms repeat");
    if (!(time > 0.0 && time <= 1.0)) invalid("time must lie in (0, 1]");
    if (workers < 1) invalid("workers must be at least 1");
    if (output_dir.empty()) invalid("output_dir is empty");
    const auto& e = tolerances.error;
    if (!(e.target > 0.0) || !(e.guard > 0.0) || e.initial < 1 || e.max_1d < e.initial || e.max_2d < 2) {
        invalid("error tolerances must be positive with caps above the initial truncation");
    }
    const auto& a = tolerances.aggregation;
    if (a.layers < 1 || a.linf_points < 3 || !(a.stability > 0.0)) invalid("aggregation tolerances out of range");
}

StudyConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        invalid(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) invalid("config must be a JSON object");
    reject_unknown(doc,
                   {"schema_version", "name", "example", "alphas", "levels", "scheme", "norms", "aggregation", "time",
                    "tolerances", "workers", "output_dir"},
                   "config");
    if (!doc.contains("schema_version")) invalid("missing schema_version");
    if (get_as<int>(doc, "schema_version") != kSchemaVersion) {
        invalid("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    for (const char* required : {"example", "alphas", "levels"}) {
        if (!doc.contains(required)) invalid(std::string("missing ") + required);
    }
    StudyConfig c;
    c.example = parse_example(get_as<std::string>(doc, "example"));
    c.alphas = get_as<std::vector<double>>(doc, "alphas");
    c.levels = get_as<std::vector<int>>(doc, "levels");
    if (doc.contains("name")) c.name = get_as<std::string>(doc, "name");
    if (doc.contains("scheme")) c.scheme = parse_scheme(get_as<std::string>(doc, "scheme"));
    if (doc.contains("norms")) {
        c.norms.clear();
        for (const auto& n : get_as<std::vector<std::string>>(doc, "norms")) c.norms.push_back(parse_norm(n));
    }
    if (doc.contains("aggregation")) c.aggregation = parse_aggregation(get_as<std::string>(doc, "aggregation"));
    if (doc.contains("time")) c.time = get_as<double>(doc, "time");
    if (doc.contains("workers")) c.workers = get_as<int>(doc, "workers");
    if (doc.contains("output_dir")) c.output_dir = get_as<std::string>(doc, "output_dir");
    if (doc.contains("tolerances")) {
        const auto& t = doc.at("tolerances");
        if (!t.is_object()) invalid("tolerances must be an object");
        reject_unknown(t,
                       {"error_target", "error_guard", "error_initial", "max_truncation_1d", "max_truncation_2d",
                        "aggregation_layers", "linf_points", "aggregation_stability", "tau", "benchmark_level"},
                       "tolerances");
        auto& tol = c.tolerances;
        if (t.contains("error_target")) tol.error.target = get_as<double>(t, "error_target");
        if (t.contains("error_guard")) tol.error.guard = get_as<double>(t, "error_guard");
        if (t.contains("error_initial")) tol.error.initial = get_as<int>(t, "error_initial");
        if (t.contains("max_truncation_1d")) tol.error.max_1d = get_as<int>(t, "max_truncation_1d");
        if (t.contains("max_truncation_2d")) tol.error.max_2d = get_as<int>(t, "max_truncation_2d");
        if (t.contains("aggregation_layers")) tol.aggregation.layers = get_as<int>(t, "aggregation_layers");
        if (t.contains("linf_points")) tol.aggregation.linf_points = get_as<int>(t, "linf_points");
        if (t.contains("aggregation_stability")) tol.aggregation.stability = get_as<double>(t, "aggregation_stability");
        if (t.contains("tau")) tol.tau = get_as<double>(t, "tau");
        if (t.contains("benchmark_level")) tol.benchmark_level = get_as<int>(t, "benchmark_level");
    }
    c.validate();
    return c;
}

StudyConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const StudyConfig& c) {
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["name"] = c.name;
    doc["example"] = to_string(c.example);
    doc["alphas"] = c.alphas;
    doc["levels"] = c.levels;
    doc["scheme"] = scheme_name(c.scheme);
    std::vector<std::string> norms;
    for (auto n : c.norms) norms.push_back(to_string(n));
    doc["norms"] = norms;
    doc["aggregation"] = to_string(c.aggregation);
    doc["time"] = c.time;
    doc["workers"] = c.workers;
    doc["output_dir"] = c.output_dir;
    const auto& t = c.tolerances;
    doc["tolerances"] = {
        {"error_target", t.error.target},
        {"error_guard", t.error.guard},
        {"error_initial", t.error.initial},
        {"max_truncation_1d", t.error.max_1d},
        {"max_truncation_2d", t.error.max_2d},
        {"aggregation_layers", t.aggregation.layers},
        {"linf_points", t.aggregation.linf_points},
        {"aggregation_stability", t.aggregation.stability},
        {"tau", t.tau},
        {"benchmark_level", t.benchmark_level},
    };
    return doc.dump(2) + "\n";
}

std::string config_hash(const StudyConfig& config) {
    // workers and output location do not change the numbers
    StudyConfig c = config;
    c.workers = 1;
    c.output_dir = "out";
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : config_to_json(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Mesh study_mesh(ExampleId example, int level) {
    if (level < 1) throw DomainError("level must be positive");
    if (two_dimensional(example)) return Mesh2D(1 << level);
    if (example == ExampleId::E1bOffGrid) return Mesh1D(1 << level);
    return Mesh1D((1 << level) - 1);
}

SourceTerm study_source(ExampleId example) {
    const TimeProfile temporal({0.0, 0.5, 1.0}, {1.0, 2.0});
    switch (example) {
        case ExampleId::E1a:
        case ExampleId::E1c: return {SpatialProfile{CharInterval{0.0, 0.5}}, temporal};
        case ExampleId::E1bOffGrid:
        case ExampleId::E1bOnGrid: return {SpatialProfile{PointMass{0.5}}, temporal};
        case ExampleId::E2a: return {SpatialProfile{CharRect{0.25, 0.75, 0.25, 0.75}}, temporal};
        case ExampleId::E2b:
        case ExampleId::E2bConsistent: return {SpatialProfile{CurveMass{0.25, 0.75, 0.25, 0.75}}, temporal};
    }
    throw DomainError("unknown example");
}

bool TableArtifact::any_degraded() const {
    return std::any_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.degraded; });
}

std::vector<TableRow> TableArtifact::group(double alpha, NormKind norm) const {
    std::vector<TableRow> out;
    for (const auto& r : rows) {
        if (r.alpha == alpha && r.norm == norm) out.push_back(r);
    }
    return out;
}

namespace {

struct CellResult {
    // [level][norm order]
    std::vector<std::array<ErrorEstimate, 2>> errors;
};

CellResult spectral_cell(const StudyConfig& cfg, double alpha) {
    const SourceTerm src = study_source(cfg.example);
    const ReferenceSolution ref(src, FracOrder(alpha));
    const Projection projection = cfg.example == ExampleId::E2bConsistent ? Projection::L2 : Projection::SchemeDefault;
    std::vector<std::unique_ptr<DiscreteSpectrum>> spectra;
    std::vector<SemidiscreteSolution> sols;
    for (int k : cfg.levels) {
        spectra.push_back(std::make_unique<DiscreteSpectrum>(study_mesh(cfg.example, k), cfg.scheme));
        sols.emplace_back(*spectra.back(), FracOrder(alpha), src, projection);
    }
    const std::size_t L = cfg.levels.size();
    CellResult res;
    res.errors.assign(L, {});
    auto norms_at = [&](double t) {
        std::vector<NodalField> fields;
        for (const auto& s : sols) fields.push_back(s.at(t));
        const auto errs = spectral_errors(ref, t, fields, cfg.tolerances.error);
        std::vector<double> out;
        for (std::size_t l = 0; l < L; ++l) {
            for (int p = 0; p < 2; ++p) {
                const auto& e = p == 0 ? errs[l].l2 : errs[l].h1;
                auto& acc = res.errors[l][p];
                acc.degraded = acc.degraded || e.degraded;
                acc.truncation = std::max(acc.truncation, e.truncation);
                acc.tail_share = std::max(acc.tail_share, e.tail_share);
                out.push_back(e.value);
            }
        }
        return out;
    };
    const auto values = time_aggregate(norms_at, cfg.aggregation, cfg.time, src.temporal.jumps(),
                                       cfg.tolerances.aggregation);
    for (std::size_t l = 0; l < L; ++l) {
        for (int p = 0; p < 2; ++p) res.errors[l][p].value = values[2 * l + p];
    }
    return res;
}

CellResult l1_cell(const StudyConfig& cfg, double alpha) {
    const SourceTerm src = study_source(cfg.example);
    auto k = [](double x) { return 3.0 + std::sin(2.0 * std::numbers::pi * x); };
    auto q = [](double) { return 0.0; };
    const double tau = cfg.tolerances.tau;
    const Mesh1D fine((1 << cfg.tolerances.benchmark_level) - 1);
    const auto bench = l1_march(fine, k, q, cfg.scheme, FracOrder(alpha), src, tau, cfg.time).final_state();
    CellResult res;
    for (int level : cfg.levels) {
        const Mesh1D coarse((1 << level) - 1);
        const auto u = l1_march(coarse, k, q, cfg.scheme, FracOrder(alpha), src, tau, cfg.time).final_state();
        const auto up = prolongate(u, fine);
        std::array<ErrorEstimate, 2> e{};
        e[0].value = fe_error_norm(up, bench, 0);
        e[1].value = fe_error_norm(up, bench, 1);
        res.errors.push_back(e);
    }
    return res;
}

}  // namespace

TableArtifact run_study(const StudyConfig& cfg) {
    cfg.validate();
    const std::size_t n_alpha = cfg.alphas.size();
    std::vector<CellResult> cells(n_alpha);
    std::vector<std::exception_ptr> failures(n_alpha);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n_alpha; i = next++) {
            try {
                cells[i] = cfg.example == ExampleId::E1c ? l1_cell(cfg, cfg.alphas[i]) : spectral_cell(cfg, cfg.alphas[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const int nthreads = static_cast<int>(std::min<std::size_t>(cfg.workers, n_alpha));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }

    TableArtifact art;
    art.name = cfg.name;
    art.example = to_string(cfg.example);
    art.aggregation = to_string(cfg.aggregation);
    art.time = cfg.time;
    art.config_hash = config_hash(cfg);
    for (std::size_t i = 0; i < n_alpha; ++i) {
        for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
            for (NormKind norm : cfg.norms) {
                const auto& e = cells[i].errors[l][norm_order(norm)];
                TableRow row;
                row.alpha = cfg.alphas[i];
                row.norm = norm;
                row.level = cfg.levels[l];
                row.h = mesh_size(study_mesh(cfg.example, cfg.levels[l]));
                row.error = e.value;
                row.degraded = e.degraded;
                row.truncation = e.truncation;
                art.rows.push_back(row);
            }
        }
    }
    std::sort(art.rows.begin(), art.rows.end(), [](const TableRow& a, const TableRow& b) {
        return std::tie(a.alpha, a.norm, a.level) < std::tie(b.alpha, b.norm, b.level);
    });
    for (double a : cfg.alphas) {
        for (NormKind norm : cfg.norms) {
            std::vector<ErrorRecord> recs;
            for (const auto& r : art.group(a, norm)) {
                recs.push_back({r.level, r.h, norm, cfg.aggregation, r.error, r.degraded});
            }
            const bool fittable = recs.size() >= 3 && std::all_of(recs.begin(), recs.end(), [](const ErrorRecord& r) {
                return r.value > 0.0 && std::isfinite(r.value);
            });
            if (fittable) art.rates[{a, norm}] = fit_rate(recs);
        }
    }
    return art;
}

std::string artifact_to_json(const TableArtifact& art) {
    json doc;
    doc["name"] = art.name;
    doc["example"] = art.example;
    doc["aggregation"] = art.aggregation;
    doc["time"] = art.time;
    doc["config_hash"] = art.config_hash;
    doc["version"] = art.version;
    doc["rows"] = json::array();
    for (const auto& r : art.rows) {
        doc["rows"].push_back({{"alpha", r.alpha},
                               {"norm", to_string(r.norm)},
                               {"k", r.level},
                               {"h", r.h},
                               {"error", r.error},
                               {"degraded", r.degraded},
                               {"truncation", r.truncation}});
    }
    doc["rates"] = json::array();
    for (const auto& [key, fit] : art.rates) {
        doc["rates"].push_back(
            {{"alpha", key.first}, {"norm", to_string(key.second)}, {"rate", fit.rate}, {"residual", fit.residual}});
    }
    return doc.dump(2) + "\n";
}

TableArtifact artifact_from_json(const std::string& text) {
    try {
        const json doc = json::parse(text);
        TableArtifact art;
        art.name = doc.at("name").get<std::string>();
        art.example = doc.at("example").get<std::string>();
        art.aggregation = doc.at("aggregation").get<std::string>();
        art.time = doc.at("time").get<double>();
        art.config_hash = doc.at("config_hash").get<std::string>();
        art.version = doc.at("version").get<std::string>();
        for (const auto& r : doc.at("rows")) {
            TableRow row;
            row.alpha = r.at("alpha").get<double>();
            row.norm = parse_norm(r.at("norm").get<std::string>());
            row.level = r.at("k").get<int>();
            row.h = r.at("h").get<double>();
            row.error = r.at("error").get<double>();
            row.degraded = r.at("degraded").get<bool>();
            row.truncation = r.at("truncation").get<int>();
            art.rows.push_back(row);
        }
        for (const auto& r : doc.at("rates")) {
            art.rates[{r.at("alpha").get<double>(), parse_norm(r.at("norm").get<std::string>())}] =
                RateFit{r.at("rate").get<double>(), r.at("residual").get<double>()};
        }
        return art;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed artifact: ") + e.what());
    }
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << content;
    out.close();
    if (!out) throw Error("write to '" + path + "' failed");
}

double guide_slope(double rate) { return std::round(rate * 2.0) / 2.0; }

}  // namespace

void emit_csv(const TableArtifact& art, const std::string& path) {
    const bool flag = art.any_degraded();
    std::string out = flag ? "alpha,norm,k,h,error,rate,degraded\n" : "alpha,norm,k,h,error,rate\n";
    for (const auto& r : art.rows) {
        const auto it = art.rates.find({r.alpha, r.norm});
        out += fmt6(r.alpha) + "," + to_string(r.norm) + "," + std::to_string(r.level) + "," + fmt6(r.h) + "," +
               fmt6(r.error) + "," + (it == art.rates.end() ? std::string() : fmt6(it->second.rate));
        if (flag) out += r.degraded ? ",1" : ",0";
        out += "\n";
    }
    write_file(path, out);
}

std::vector<std::string> emit_plot(const TableArtifact& art, const std::string& stem) {
    std::vector<double> alphas;
    for (const auto& r : art.rows) {
        if (std::find(alphas.begin(), alphas.end(), r.alpha) == alphas.end()) alphas.push_back(r.alpha);
    }
    const std::string base = std::filesystem::path(stem).filename().string();
    std::vector<std::string> written;
    std::string script = "# run from this directory: gnuplot " + base + ".gp\n";
    script += "set terminal svg size 800,600\nset logscale xy\nset xlabel \"h\"\nset ylabel \"error\"\n";
    script += "set key left top\nset format y \"%.0e\"\n";
    for (double a : alphas) {
        const std::string data = base + "_alpha" + fmt6(a) + ".dat";
        std::string body = "# " + art.name + " example " + art.example + " alpha " + fmt6(a) + "\n";
        std::vector<NormKind> norms;
        for (NormKind n : {NormKind::L2, NormKind::H1}) {
            const auto rows = art.group(a, n);
            if (rows.empty()) continue;
            if (!norms.empty()) body += "\n\n";
            norms.push_back(n);
            body += "# norm " + to_string(n) + "\n# h error\n";
            for (const auto& r : rows) body += fmt6(r.h) + " " + fmt6(r.error) + "\n";
        }
        const std::string path = (std::filesystem::path(stem).parent_path() / data).string();
        write_file(path, body);
        written.push_back(path);

        script += "\nset output \"" + base + "_alpha" + fmt6(a) + ".svg\"\n";
        script += "set title \"" + art.example + ", alpha = " + fmt6(a) + "\"\n";
        std::string plot = "plot";
        for (std::size_t i = 0; i < norms.size(); ++i) {
            plot += (i ? ", \\\n     " : " ") + std::string("\"") + data + "\" index " + std::to_string(i) +
                    " using 1:2 with linespoints title \"" + to_string(norms[i]) + "\"";
        }
        for (NormKind n : norms) {
            const auto it = art.rates.find({a, n});
            if (it == art.rates.end()) continue;
            const auto rows = art.group(a, n);
            const double s = guide_slope(it->second.rate);
            const double c = rows.back().error / std::pow(rows.back().h, s);
            plot += ", \\\n     " + fmt6(c) + "*x**" + fmt6(s) + " with lines dashtype 2 title \"O(h^{" + fmt6(s) +
                    "})\"";
        }
        script += plot + "\n";
    }
    const std::string gp = stem + ".gp";
    write_file(gp, script);
    written.push_back(gp);
    return written;
}

std::string resolve_output_dir(const StudyConfig& config, const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    if (const char* env = std::getenv("FRACFEM_OUT"); env && *env) return env;
    return config.output_dir;
}

}  // namespace fracfem
