#pragma once
// Run configuration and the month-by-month nowcast pipeline:
// index -> reweight -> transitions -> tax-transfer -> statistics -> decomposition.

#include "nowcast/core_data.hpp"
#include "nowcast/decompose.hpp"
#include "nowcast/indexation.hpp"
#include "nowcast/reweight.hpp"
#include "nowcast/stats.hpp"
#include "nowcast/synthpop.hpp"
#include "nowcast/taxben.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nowcast {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr std::string_view kOutputDirEnv = "NOWCAST_OUTPUT_DIR";

struct FileSources {
    std::filesystem::path survey_persons;
    std::filesystem::path survey_households;
    std::filesystem::path panel_persons;
    std::filesystem::path panel_households;
    std::filesystem::path payroll;
};

struct RunConfig {
    std::filesystem::path base_dir; // relative paths resolve against this
    std::uint64_t seed = 20200201;
    MonthId baseline_month{2020, 2};
    std::vector<MonthId> analysis_months;
    std::optional<SynthConfig> synthetic; // exactly one of synthetic / files
    std::optional<FileSources> files;
    std::filesystem::path p0_path;
    std::filesystem::path p1_path;
    std::filesystem::path index_series;
    double awe_factor = 1.0;
    double cpi_uprating = 1.0;
    double annual_real_return = 0.025;
    std::map<MonthId, double> jobkeeper_anchors;
    double jobkeeper_noise = 1.0;
    double eligibility_noise = 1.0;
    std::optional<double> trim_quantile = 0.995;
    PovertyUnit poverty_unit = PovertyUnit::person;
    std::filesystem::path output_dir = "out";

    // Canonical JSON of the effective settings (hashed into the manifest).
    std::string canonical_json() const;
    std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses a run configuration. Throws ConfigError naming the file and key.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir,
                           std::string_view origin = "config");
RunConfig load_run_config(const std::filesystem::path& path);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::vector<MonthId>> months;
};

// Precedence for the output directory: --out, then the environment variable, then the file.
void apply_overrides(RunConfig& cfg, const RunOverrides& overrides);

/// Dry-run checks: month ordering, referenced files, regime files, and
/// row-level data findings. Never throws; returns one line per problem.
std::vector<std::string> validate_config(const RunConfig& cfg);
std::vector<std::string> validate_config_file(const std::filesystem::path& path, const RunOverrides& overrides = {});

struct InputData {
    WeightedSample survey;
    std::map<MonthId, WeightedSample> panel;
    IndexTables tables;
    PolicyRegime p0;
    PolicyRegime p1;
};

InputData load_inputs(const RunConfig& cfg);

struct MonthResult {
    MonthId month;
    ReweightDiagnostics diagnostics;
    LabourShares panel_labour;
    LabourShares modelled_labour;
    double jobkeeper_target = 0.0;
    double jobkeeper_selected = 0.0;   // weighted
    double eligibility_target = 0.0;
    double eligibility_selected = 0.0; // weighted
    WeightedSample reweighted; // after transitions
};

// One month prepared independently of every other month.
MonthResult prepare_month(const RunConfig& cfg, const InputData& in, MonthId month);

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> files; // written, in manifest order
    MonthResult baseline;
    std::vector<MonthResult> months;
    std::vector<ScenarioSet> scenarios; // aligned with months
    PovertyLine poverty_line;
    QuintileMap quintiles;
};

// Runs every analysis month and writes the tables plus manifest.json.
RunResult run_pipeline(const RunConfig& cfg);

// Writes the synthetic inputs as CSV files into dir; returns the paths written.
std::vector<std::filesystem::path> write_synthetic_inputs(const SynthConfig& cfg, const std::filesystem::path& dir);

} // namespace nowcast
