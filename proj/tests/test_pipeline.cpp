#include "support.hpp"

#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"
#include "nowcast/pipeline.hpp"
#include "nowcast/record_io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace nowcast;
namespace fs = std::filesystem;

namespace {

fs::path config_dir() { return nowcast::test::source_dir() / "config"; }

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("nowcast_test_pipeline_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string small_config(const std::string& months = R"(["2020-04", "2020-05"])")
{
    return R"({
  "seed": 7,
  "baseline_month": "2020-02",
  "analysis_months": )" + months + R"(,
  "data": {"synthetic": {"n_households": 1500, "n_panel_waves": 5, "rotation_retention": 0.83, "shock": "covid_default"}},
  "regimes": {"p0": "baseline_feb2020.json", "p1": "covid_package.json"},
  "index": {"series": "index_series.csv", "awe_factor": 1.049, "cpi_uprating": 1.028},
  "alignment": {"jobkeeper": {"anchors": {"2020-04": 3500000}, "noise_scale": 1.0}, "eligibility": {"noise_scale": 1.0}},
  "output_dir": "unused"
})";
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Lines of a table whose first field is `month`.
std::vector<std::string> month_rows(const fs::path& p, const std::string& month)
{
    std::vector<std::string> out;
    std::istringstream in(slurp(p));
    for (std::string line; std::getline(in, line);)
        if (line.rfind(month + ",", 0) == 0) out.push_back(line);
    return out;
}

struct EnvGuard {
    EnvGuard() { unsetenv(std::string(kOutputDirEnv).c_str()); }
    ~EnvGuard() { unsetenv(std::string(kOutputDirEnv).c_str()); }
};

} // namespace

TEST_CASE("the shipped demo config parses and validates cleanly")
{
    const auto cfg = load_run_config(config_dir() / "demo.json");
    CHECK(cfg.synthetic);
    CHECK(cfg.synthetic->n_households == 10000);
    CHECK(cfg.analysis_months.size() == 4);
    CHECK(validate_config(cfg).empty());
}

TEST_CASE("config errors name the problem")
{
    CHECK_THROWS_WITH_AS(parse_run_config("{not json", config_dir(), "bad.json"),
                         doctest::Contains("bad.json: invalid JSON"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_run_config(R"({"baseline_month": "2020-02"})", config_dir(), "c.json"),
                         "c.json: missing key 'analysis_months'", ConfigError);
    CHECK_THROWS_AS(parse_run_config(R"({"baseline_month": "2020-13", "analysis_months": []})", config_dir()), ConfigError);
    std::string both = small_config();
    both.replace(both.find("\"data\": {"), 9, "\"data\": {\"files\": {}, ");
    CHECK_THROWS_WITH_AS(parse_run_config(both, config_dir(), "c.json"), doctest::Contains("exactly one of"), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/run.json"), ConfigError);
}

TEST_CASE("validation reports month ordering and missing files")
{
    auto cfg = parse_run_config(small_config(R"(["2020-05", "2020-04"])"), config_dir());
    auto findings = validate_config(cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0] == "analysis months out of order at 2020-04");

    cfg = parse_run_config(small_config(R"(["2020-01"])"), config_dir());
    findings = validate_config(cfg);
    REQUIRE(findings.size() == 2);
    CHECK(findings[0] == "analysis month 2020-01 does not follow the baseline month 2020-02");
    CHECK(findings[1] == "index series has no factors for 2020-01");

    cfg = parse_run_config(small_config(), config_dir());
    cfg.p1_path = "missing_regime.json";
    findings = validate_config(cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0] == "regime file p1 not found: " + (config_dir() / "missing_regime.json").string());

    cfg = parse_run_config(small_config(R"(["2020-07"])"), config_dir());
    findings = validate_config(cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0] == "synthetic panel ends at 2020-06; cannot analyse 2020-07");
}

TEST_CASE("validation reports row-level data findings in file-based configs")
{
    const auto dir = scratch("files");
    SynthConfig sc;
    sc.n_households = 200;
    write_synthetic_inputs(sc, dir);
    for (const char* f : {"baseline_feb2020.json", "covid_package.json", "index_series.csv"})
        fs::copy_file(config_dir() / f, dir / f);
    const std::string text = R"({
  "baseline_month": "2020-02",
  "analysis_months": ["2020-04"],
  "data": {"files": {"survey_persons": "survey_persons.csv", "survey_households": "survey_households.csv",
                     "panel_persons": "panel_persons.csv", "panel_households": "panel_households.csv",
                     "payroll": "payroll.csv"}},
  "regimes": {"p0": "baseline_feb2020.json", "p1": "covid_package.json"},
  "index": {"series": "index_series.csv"}
})";
    auto cfg = parse_run_config(text, dir);
    CHECK(validate_config(cfg).empty());

    // Corrupt one industry code in the survey persons file.
    auto persons = csv::read_file(dir / "survey_persons.csv");
    const auto col = persons.column("industry");
    REQUIRE(col);
    std::size_t row = 0;
    while (persons.rows[row][*col].empty()) ++row;
    persons.rows[row][*col] = "Z";
    csv::Writer w(persons.header);
    for (const auto& r : persons.rows) w.row(r);
    w.save(dir / "survey_persons.csv");

    const auto findings = validate_config(cfg);
    REQUIRE(findings.size() == 1);
    CHECK(findings[0] == "survey_persons.csv row " + std::to_string(row + 2) + ": unknown industry code 'Z'");
}

TEST_CASE("overrides: flag over environment over file")
{
    EnvGuard guard;
    auto base = parse_run_config(small_config(), config_dir());
    CHECK(base.output_dir == "unused");

    auto cfg = base;
    apply_overrides(cfg, {});
    CHECK(cfg.output_dir == "unused");

    setenv(std::string(kOutputDirEnv).c_str(), "/tmp/from_env", 1);
    cfg = base;
    apply_overrides(cfg, {});
    CHECK(cfg.output_dir == fs::path("/tmp/from_env"));

    cfg = base;
    apply_overrides(cfg, {.seed = 99, .output_dir = fs::path("/tmp/from_flag"), .months = std::vector<MonthId>{{2020, 6}}});
    CHECK(cfg.output_dir == fs::path("/tmp/from_flag"));
    CHECK(cfg.seed == 99);
    CHECK(cfg.synthetic->seed == 99);
    CHECK(cfg.analysis_months == std::vector<MonthId>{{2020, 6}});
}

TEST_CASE("the output directory does not enter the config hash")
{
    auto a = parse_run_config(small_config(), config_dir());
    auto b = a;
    b.output_dir = "/elsewhere";
    CHECK(a.canonical_json() == b.canonical_json());
    b.seed = 8;
    CHECK(a.canonical_json() != b.canonical_json());
}

TEST_CASE("each month is processed independently of the others")
{
    EnvGuard guard;
    auto both = parse_run_config(small_config(), config_dir());
    auto one = parse_run_config(small_config(R"(["2020-05"])"), config_dir());
    both.output_dir = scratch("both");
    one.output_dir = scratch("one");
    const auto rb = run_pipeline(both);
    const auto ro = run_pipeline(one);
    CHECK(rb.poverty_line.value == ro.poverty_line.value);
    for (const auto& path : ro.files) {
        const auto name = path.filename();
        if (name == "manifest.json") continue;
        INFO(name.string());
        const auto a = month_rows(path, "2020-05");
        CHECK(a == month_rows(both.output_dir / name, "2020-05"));
        if (name.string().rfind("table1_validation_", 0) == 0) CHECK(slurp(path) == slurp(both.output_dir / name));
    }
    CHECK(!month_rows(one.output_dir / "table10_disposable_gini.csv", "2020-05").empty());
}

TEST_CASE("pipeline results satisfy the alignment and identity contracts")
{
    EnvGuard guard;
    auto cfg = parse_run_config(small_config(), config_dir());
    cfg.output_dir = scratch("contracts");
    const auto r = run_pipeline(cfg);
    REQUIRE(r.months.size() == 2);
    for (const auto& m : r.months) {
        double max_w = 0.0;
        for (const auto& h : m.reweighted.households) max_w = std::max(max_w, h.weight);
        CHECK(m.jobkeeper_target == 3.5e6);
        CHECK(m.jobkeeper_selected >= m.jobkeeper_target);
        CHECK(m.jobkeeper_selected - m.jobkeeper_target < max_w);
        CHECK(m.eligibility_selected >= m.eligibility_target);
        CHECK(m.eligibility_selected - m.eligibility_target < max_w);
    }
    CHECK(fs::exists(cfg.output_dir / "manifest.json"));
    CHECK(r.files.size() == 13);
}
