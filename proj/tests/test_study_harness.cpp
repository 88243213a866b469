#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fracfem/errors.hpp"
#include "fracfem/study_harness.hpp"

using namespace fracfem;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("fracfem_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

StudyConfig small_study() {
    StudyConfig c;
    c.example = ExampleId::E1a;
    c.alphas = {0.3, 0.7};
    c.levels = {2, 3, 4};
    return c;
}

const char* kMinimal = R"({"schema_version": 1, "example": "1a", "alphas": [0.5], "levels": [2, 3]})";

std::string with(const std::string& extra) {
    std::string s = kMinimal;
    s.pop_back();
    return s + ", " + extra + "}";
}

}  // namespace

TEST_CASE("config round trip and defaults") {
    const auto c = parse_config(kMinimal);
    CHECK(c.scheme == SchemeKind::LumpedMass);
    CHECK(c.norms.size() == 2);
    CHECK(c.aggregation == TimeAggregation::AtTime);
    CHECK(c.time == 1.0);

    StudyConfig full = small_study();
    full.example = ExampleId::E1c;
    full.scheme = SchemeKind::Galerkin;
    full.norms = {NormKind::H1};
    full.tolerances.tau = 1e-3;
    full.tolerances.benchmark_level = 6;
    full.tolerances.error.target = 3e-5;
    full.name = "rt";
    const auto back = parse_config(config_to_json(full));
    CHECK(config_to_json(back) == config_to_json(full));
    CHECK(config_hash(back) == config_hash(full));
    CHECK(config_hash(back).size() == 16);
}

TEST_CASE("config hash ignores workers and output location only") {
    auto a = small_study();
    auto b = a;
    b.workers = 4;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    b.alphas = {0.3, 0.71};
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(parse_config(with(R"("colour": "red")")), ValidationError);
    CHECK_THROWS_AS(parse_config(with(R"("tolerances": {"tua": 1e-3})")), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"example": "1a", "alphas": [0.5], "levels": [2]})"), ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2, "example": "1a", "alphas": [0.5], "levels": [2]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "example": "1a", "alphas": [0.5], "levels": []})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "example": "1a", "alphas": [0.5], "levels": [3, 2]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "example": "1a", "alphas": [1.0], "levels": [2]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "example": "3z", "alphas": [0.5], "levels": [2]})"),
                    ValidationError);
    CHECK_THROWS_AS(
        parse_config(R"({"schema_version": 1, "example": "2a", "alphas": [0.5], "levels": [2], "scheme": "galerkin"})"),
        ValidationError);
    CHECK_THROWS_AS(parse_config(
                        R"j({"schema_version": 1, "example": "1c", "alphas": [0.5], "levels": [2], "aggregation": "L2(0,T)"})j"),
                    ValidationError);
    CHECK_THROWS_AS(parse_config(with(R"("norms": ["L2", "L2"])")), ValidationError);
    CHECK_THROWS_AS(parse_config(with(R"("time": 0)")), ValidationError);
    CHECK_THROWS_AS(parse_config(with(R"("workers": 0)")), ValidationError);
    CHECK_THROWS_AS(parse_config(with(R"("alphas": "half")")), ValidationError);
    CHECK_THROWS_AS(parse_config("{not json"), ValidationError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("study meshes") {
    CHECK(mesh_size(study_mesh(ExampleId::E1a, 4)) == doctest::Approx(1.0 / 16));
    CHECK(mesh_size(study_mesh(ExampleId::E1bOffGrid, 4)) == doctest::Approx(1.0 / 17));
    CHECK(node_count(study_mesh(ExampleId::E2a, 3)) == 49);
    CHECK(std::get<Mesh1D>(study_mesh(ExampleId::E1bOnGrid, 3)).interior() == 7);
}

TEST_CASE("study rows, rates and determinism across worker counts") {
    auto cfg = small_study();
    const auto serial = run_study(cfg);
    REQUIRE(serial.rows.size() == 12);
    for (std::size_t i = 1; i < serial.rows.size(); ++i) {
        const auto& a = serial.rows[i - 1];
        const auto& b = serial.rows[i];
        CHECK(std::tie(a.alpha, a.norm, a.level) < std::tie(b.alpha, b.norm, b.level));
    }
    for (const auto& r : serial.rows) {
        CHECK(r.h == doctest::Approx(std::ldexp(1.0, -r.level)));
        CHECK(r.error > 0.0);
    }
    // the L2 error of the smooth-in-space example converges at second order
    CHECK(serial.rates.at({0.3, NormKind::L2}).rate == doctest::Approx(2.0).epsilon(0.1));
    CHECK(serial.rates.at({0.7, NormKind::H1}).rate == doctest::Approx(1.0).epsilon(0.3));

    cfg.workers = 2;
    const auto parallel = run_study(cfg);
    const auto dir = scratch("determinism");
    emit_csv(serial, (dir / "a.csv").string());
    emit_csv(parallel, (dir / "b.csv").string());
    CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
    CHECK(artifact_to_json(serial) == artifact_to_json(parallel));
}

TEST_CASE("cells do not depend on their neighbours") {
    auto both = small_study();
    auto alone = small_study();
    alone.alphas = {0.7};
    const auto a = run_study(both);
    const auto b = run_study(alone);
    const auto ga = a.group(0.7, NormKind::H1);
    const auto gb = b.group(0.7, NormKind::H1);
    REQUIRE(ga.size() == gb.size());
    for (std::size_t i = 0; i < ga.size(); ++i) CHECK(ga[i].error == gb[i].error);
}

TEST_CASE("table shaped study has one row per alpha, level and norm") {
    StudyConfig c;
    c.example = ExampleId::E1bOnGrid;
    c.alphas = {0.1, 0.5, 0.9};
    c.levels = {1, 2, 3, 4, 5};
    const auto art = run_study(c);
    CHECK(art.rows.size() == 30);
    CHECK(art.rates.size() == 6);
}

TEST_CASE("artifact json round trip") {
    auto art = run_study(small_study());
    art.rows[2].degraded = true;
    const auto back = artifact_from_json(artifact_to_json(art));
    CHECK(artifact_to_json(back) == artifact_to_json(art));
    CHECK(back.any_degraded());
    CHECK_THROWS_AS(artifact_from_json("{}"), ValidationError);
}

TEST_CASE("csv layout") {
    const auto dir = scratch("csv");
    TableArtifact empty;
    emit_csv(empty, (dir / "empty.csv").string());
    CHECK(slurp(dir / "empty.csv") == "alpha,norm,k,h,error,rate\n");

    TableArtifact art;
    art.rows = {{0.5, NormKind::L2, 3, 0.125, 1.5e-3, false, 64}, {0.5, NormKind::L2, 4, 0.0625, 3.75e-4, false, 64},
                {0.5, NormKind::H1, 3, 0.125, 2e-2, false, 64}};
    art.rates[{0.5, NormKind::L2}] = RateFit{2.0, 0.0};
    emit_csv(art, (dir / "t.csv").string());
    CHECK(slurp(dir / "t.csv") ==
          "alpha,norm,k,h,error,rate\n"
          "0.5,L2,3,0.125,0.0015,2\n"
          "0.5,L2,4,0.0625,0.000375,2\n"
          "0.5,H1,3,0.125,0.02,\n");

    art.rows[2].degraded = true;
    emit_csv(art, (dir / "d.csv").string());
    const auto text = slurp(dir / "d.csv");
    CHECK(text.rfind("alpha,norm,k,h,error,rate,degraded\n", 0) == 0);
    CHECK(text.find("0.5,H1,3,0.125,0.02,,1\n") != std::string::npos);
    CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("plot guide slopes") {
    const auto dir = scratch("plot");
    TableArtifact art;
    art.example = "1a";
    for (int k = 3; k <= 5; ++k) {
        const double h = std::ldexp(1.0, -k);
        art.rows.push_back({0.5, NormKind::L2, k, h, 0.3 * std::pow(h, 1.97), false, 64});
        art.rows.push_back({0.5, NormKind::H1, k, h, 0.3 * std::pow(h, 0.8), false, 64});
    }
    art.rows.push_back({0.9, NormKind::L2, 3, 0.125, 1e-3, false, 64});
    art.rates[{0.5, NormKind::L2}] = RateFit{1.97, 0.0};
    art.rates[{0.5, NormKind::H1}] = RateFit{0.8, 0.0};
    const auto paths = emit_plot(art, (dir / "fig").string());
    REQUIRE(paths.size() == 3);
    const auto gp = slurp(dir / "fig.gp");
    CHECK(gp.find("x**2 ") != std::string::npos);
    CHECK(gp.find("x**1 ") != std::string::npos);
    CHECK(gp.find("set logscale xy") != std::string::npos);
    // the anchored guide passes through the finest point
    const double c = 0.3 * std::pow(1.0 / 32, 1.97) / std::pow(1.0 / 32, 2.0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g*x**2", c);
    CHECK(gp.find(buf) != std::string::npos);

    const auto dat = slurp(dir / "fig_alpha0.5.dat");
    CHECK(dat.find("\n\n\n# norm H1") != std::string::npos);
    // single level, no rate, no guide
    const auto tail = gp.substr(gp.find("fig_alpha0.9.svg"));
    CHECK(tail.find("x**") == std::string::npos);
}

TEST_CASE("output directory precedence") {
    StudyConfig c = small_study();
    c.output_dir = "from_config";
    unsetenv("FRACFEM_OUT");
    CHECK(resolve_output_dir(c) == "from_config");
    setenv("FRACFEM_OUT", "from_env", 1);
    CHECK(resolve_output_dir(c) == "from_env");
    CHECK(resolve_output_dir(c, "from_flag") == "from_flag");
    unsetenv("FRACFEM_OUT");
}
