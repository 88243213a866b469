#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fracfem/error_analysis.hpp"

namespace fracfem {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "fracfem 1.0.0";

enum class ExampleId { E1a, E1bOffGrid, E1bOnGrid, E1c, E2a, E2b, E2bConsistent };

std::string to_string(ExampleId id);
ExampleId parse_example(const std::string& name);

struct StudyTolerances {
    ErrorPolicy error;
    AggregationPolicy aggregation;
    double tau = 2e-4;        // L1 time step (example 1c)
    int benchmark_level = 9;  // fine self-benchmark h = 2^-level (example 1c)
};

struct StudyConfig {
    ExampleId example = ExampleId::E1a;
    std::vector<double> alphas;
    std::vector<int> levels;
    SchemeKind scheme = SchemeKind::LumpedMass;
    std::vector<NormKind> norms{NormKind::L2, NormKind::H1};
    TimeAggregation aggregation = TimeAggregation::AtTime;
    double time = 1.0;
    StudyTolerances tolerances;
    int workers = 1;
    std::string output_dir = "out";
    std::string name = "study";

    /// Throws ValidationError on any inconsistency.
    void validate() const;
};

/// Parses the versioned JSON document; unknown keys and bad values raise ValidationError.
StudyConfig parse_config(const std::string& json_text);
StudyConfig load_config(const std::string& path);
std::string config_to_json(const StudyConfig& config);
/// FNV-1a 64 of the canonical JSON form, as 16 hex digits.
std::string config_hash(const StudyConfig& config);

/// Mesh of a level: 1D N = 2^k - 1 (h = 2^-k), N = 2^k for the off-grid delta
/// (h = 1/(2^k + 1)); 2D 2^k subdivisions per axis.
Mesh study_mesh(ExampleId example, int level);
SourceTerm study_source(ExampleId example);

struct TableRow {
    double alpha = 0.0;
    NormKind norm = NormKind::L2;
    int level = 0;
    double h = 0.0;
    double error = 0.0;
    bool degraded = false;
    int truncation = 0;
};

struct TableArtifact {
    std::string name;
    std::string example;
    std::string aggregation;
    double time = 1.0;
    std::string config_hash;
    std::string version = kVersion;
    std::vector<TableRow> rows;  // sorted by (alpha, norm, level)
    std::map<std::pair<double, NormKind>, RateFit> rates;

    bool any_degraded() const;
    std::vector<TableRow> group(double alpha, NormKind norm) const;
};

TableArtifact run_study(const StudyConfig& config);

std::string artifact_to_json(const TableArtifact& artifact);
TableArtifact artifact_from_json(const std::string& json_text);

/// Writes the CSV table; a trailing `degraded` column appears only when some cell is degraded.
void emit_csv(const TableArtifact& artifact, const std::string& path);
/// Writes one `<stem>_alpha<a>.dat` per alpha (one index block per norm, columns `h error`)
/// and `<stem>.gp`, a gnuplot script with guide slopes. Returns the written paths.
std::vector<std::string> emit_plot(const TableArtifact& artifact, const std::string& stem);

/// Output directory: explicit override, then FRACFEM_OUT, then the configured one.
std::string resolve_output_dir(const StudyConfig& config, const std::string& override_dir = "");

}  // namespace fracfem
