#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "fracfem/errors.hpp"
#include "fracfem/l1_fully_discrete.hpp"
#include "fracfem/special_functions.hpp"
#include "fracfem/study_harness.hpp"

using namespace fracfem;
namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << text;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string nodal_csv(const NodalField& u) {
    std::string out;
    if (const auto* m = std::get_if<Mesh1D>(&u.mesh)) {
        out = "x,u\n";
        for (int i = 0; i < m->interior(); ++i) out += g17(m->node(i + 1)) + "," + g17(u.values[i]) + "\n";
    } else {
        const auto& m2 = std::get<Mesh2D>(u.mesh);
        const int n = m2.subdivisions();
        out = "x,y,u\n";
        for (int i = 1; i < n; ++i) {
            for (int j = 1; j < n; ++j) {
                out += g17(double(i) / n) + "," + g17(double(j) / n) + "," + g17(u.values[m2.index(i, j)]) +
                       "\n";
            }
        }
    }
    return out;
}

struct SolveArgs {
    std::string example = "1a";
    double alpha = 0.5;
    int level = 3;
    std::string scheme = "lumped";
    double time = 1.0;
    double tau = 2e-4;
    std::string out;
};

int run_solve(const SolveArgs& a) {
    StudyConfig cfg;
    cfg.example = parse_example(a.example);
    cfg.alphas = {a.alpha};
    cfg.levels = {a.level};
    cfg.scheme = a.scheme == "galerkin" ? SchemeKind::Galerkin : SchemeKind::LumpedMass;
    cfg.time = a.time;
    cfg.tolerances.tau = a.tau;
    cfg.tolerances.benchmark_level = std::max(cfg.tolerances.benchmark_level, a.level + 1);
    cfg.validate();

    const SourceTerm src = study_source(cfg.example);
    const FracOrder alpha(a.alpha);
    const Mesh mesh = study_mesh(cfg.example, a.level);
    NodalField u = NodalField::zero(mesh);
    if (cfg.example == ExampleId::E1c) {
        auto k = [](double x) { return 3.0 + std::sin(2.0 * std::numbers::pi * x); };
        auto q = [](double) { return 0.0; };
        u = l1_march(std::get<Mesh1D>(mesh), k, q, cfg.scheme, alpha, src, a.tau, a.time).final_state();
    } else {
        const DiscreteSpectrum spectrum(mesh, cfg.scheme);
        const Projection proj = cfg.example == ExampleId::E2bConsistent ? Projection::L2 : Projection::SchemeDefault;
        u = semidiscrete_solve(spectrum, alpha, src, a.time, proj);
        const ReferenceSolution ref(src, alpha);
        const auto err = spectral_errors(ref, a.time, {u}).front();
        std::printf("L2 error %.6g%s\nH1 error %.6g%s\n", err.l2.value, err.l2.degraded ? " (degraded)" : "",
                    err.h1.value, err.h1.degraded ? " (degraded)" : "");
    }
    const std::string dir = resolve_output_dir(cfg, a.out);
    char name[96];
    std::snprintf(name, sizeof name, "solution_%s_alpha%g_k%d.csv", a.example.c_str(), a.alpha, a.level);
    const fs::path path = fs::path(dir) / name;
    write_file(path, nodal_csv(u));
    std::printf("wrote %s\n", path.string().c_str());
    return 0;
}

int run_study_verb(const std::string& config_path, int workers, const std::string& out) {
    StudyConfig cfg = load_config(config_path);
    if (workers > 0) cfg.workers = workers;
    cfg.validate();
    const fs::path dir = resolve_output_dir(cfg, out);
    const TableArtifact art = run_study(cfg);
    write_file(dir / (cfg.name + ".json"), artifact_to_json(art));
    emit_csv(art, (dir / (cfg.name + ".csv")).string());
    emit_plot(art, (dir / cfg.name).string());
    for (double a : cfg.alphas) {
        for (NormKind n : cfg.norms) {
            const auto it = art.rates.find({a, n});
            if (it != art.rates.end()) std::printf("alpha %g %s rate %.3f\n", a, to_string(n).c_str(), it->second.rate);
        }
    }
    if (art.any_degraded()) std::printf("warning: some cells are degraded\n");
    std::printf("wrote %s/%s.{json,csv,gp}\n", dir.string().c_str(), cfg.name.c_str());
    return 0;
}

int run_emit(const std::string& format, const std::string& artifact_path, const std::string& out) {
    const TableArtifact art = artifact_from_json(read_file(artifact_path));
    fs::path dir = out;
    if (dir.empty()) {
        const char* env = std::getenv("FRACFEM_OUT");
        dir = env && *env ? fs::path(env) : fs::path(artifact_path).parent_path();
    }
    const std::string stem = fs::path(artifact_path).stem().string();
    if (format == "csv") {
        const auto path = dir / (stem + ".csv");
        emit_csv(art, path.string());
        std::printf("wrote %s\n", path.string().c_str());
    } else {
        for (const auto& p : emit_plot(art, (dir / stem).string())) std::printf("wrote %s\n", p.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite element study runner for time-fractional diffusion"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    double ml_alpha = 0.5, ml_beta = 1.0, ml_x = 0.0;
    auto* ml = app.add_subcommand("ml-eval", "Evaluate E_{alpha,beta}(-x)");
    ml->add_option("--alpha", ml_alpha, "order alpha in (0, 2)")->required();
    ml->add_option("--beta", ml_beta, "second parameter")->required();
    ml->add_option("--x", ml_x, "argument x >= 0")->required();

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "Solve one example on one mesh and write the nodal values");
    solve->add_option("--example", solve_args.example, "1a, 1b-offgrid, 1b-ongrid, 1c, 2a, 2b, 2b-consistent-projection");
    solve->add_option("--alpha", solve_args.alpha, "fractional order");
    solve->add_option("--level", solve_args.level, "mesh level k");
    solve->add_option("--scheme", solve_args.scheme, "lumped or galerkin")->check(CLI::IsMember({"lumped", "galerkin"}));
    solve->add_option("--time", solve_args.time, "evaluation time");
    solve->add_option("--tau", solve_args.tau, "L1 time step (example 1c)");
    solve->add_option("--out", solve_args.out, "output directory");

    std::string config_path, study_out;
    int workers = 0;
    auto* study = app.add_subcommand("study", "Run a convergence study from a JSON config");
    study->add_option("--config", config_path, "config file")->required();
    study->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    study->add_option("--out", study_out, "output directory");

    std::string format, artifact_path, emit_out;
    auto* emit = app.add_subcommand("emit", "Re-emit a study artifact as CSV or plot files");
    emit->add_option("--format", format, "csv or plot")->required()->check(CLI::IsMember({"csv", "plot"}));
    emit->add_option("--artifact", artifact_path, "artifact JSON written by study")->required();
    emit->add_option("--out", emit_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*ml) {
            std::printf("%.17g\n", ml_eval(MLParams{ml_alpha, ml_beta}, ml_x));
            return 0;
        }
        if (*solve) return run_solve(solve_args);
        if (*study) return run_study_verb(config_path, workers, study_out);
        return run_emit(format, artifact_path, emit_out);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
