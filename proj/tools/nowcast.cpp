// nowcast: command-line front end.
//
//   nowcast run       --config <file> [--seed N] [--out DIR] [--months 2020-04,2020-05]
//   nowcast validate  --config <file>
//   nowcast gen-synth [--config <file>] [--seed N] --out DIR
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include "nowcast/error.hpp"
#include "nowcast/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

std::vector<nowcast::MonthId> parse_months(const std::string& list)
{
    std::vector<nowcast::MonthId> out;
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto end = std::min(list.find(',', start), list.size());
        if (end > start) out.push_back(nowcast::MonthId::parse(std::string_view(list).substr(start, end - start)));
        start = end + 1;
    }
    if (out.empty()) throw nowcast::ConfigError("--months: empty month list");
    return out;
}

int fail(std::string_view kind, const std::exception& e, int code)
{
    fmt::print(stderr, "nowcast: {} error: {}\n", kind, e.what());
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Household income distribution nowcast"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> months;

    auto* run = app.add_subcommand("run", "Run the nowcast and write tables plus manifest.json");
    run->add_option("--config", config, "Run configuration (JSON)")->required();
    run->add_option("--seed", seed, "Master seed (overrides the config)");
    run->add_option("--out", out_dir, "Output directory (overrides NOWCAST_OUTPUT_DIR and the config)");
    run->add_option("--months", months, "Comma-separated analysis months, YYYY-MM");

    auto* validate = app.add_subcommand("validate", "Check a configuration and its inputs without running");
    validate->add_option("--config", config, "Run configuration (JSON)")->required();
    validate->add_option("--seed", seed, "Master seed");
    validate->add_option("--months", months, "Comma-separated analysis months, YYYY-MM");

    auto* gen = app.add_subcommand("gen-synth", "Write synthetic survey, panel and payroll CSV files");
    gen->add_option("--config", config, "Run configuration whose data.synthetic block is used");
    gen->add_option("--seed", seed, "Master seed");
    gen->add_option("--out", out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    nowcast::RunOverrides overrides;
    try {
        overrides.seed = seed;
        if (out_dir) overrides.output_dir = *out_dir;
        if (months) overrides.months = parse_months(*months);
    } catch (const nowcast::ConfigError& e) {
        return fail("config", e, kExitConfig);
    }

    try {
        if (*run) {
            auto cfg = nowcast::load_run_config(config);
            nowcast::apply_overrides(cfg, overrides);
            const auto result = nowcast::run_pipeline(cfg);
            fmt::print("wrote {} files to {}\n", result.files.size(), result.output_dir.string());
            return kExitOk;
        }
        if (*validate) {
            const auto findings = nowcast::validate_config_file(config, overrides);
            for (const auto& f : findings) fmt::print("{}\n", f);
            if (!findings.empty()) return kExitConfig;
            fmt::print("ok\n");
            return kExitOk;
        }
        if (*gen) {
            nowcast::SynthConfig sc;
            if (!config.empty()) {
                const auto cfg = nowcast::load_run_config(config);
                if (!cfg.synthetic) throw nowcast::ConfigError(fmt::format("{}: no data.synthetic block", config));
                sc = *cfg.synthetic;
            }
            if (seed) sc.seed = *seed;
            std::filesystem::path dir = "synth";
            if (out_dir) dir = *out_dir;
            else if (const char* env = std::getenv(nowcast::kOutputDirEnv.data()); env && *env) dir = env;
            const auto files = nowcast::write_synthetic_inputs(sc, dir);
            for (const auto& f : files) fmt::print("{}\n", f.string());
            return kExitOk;
        }
    } catch (const nowcast::ConfigError& e) {
        return fail("config", e, kExitConfig);
    } catch (const nowcast::DataError& e) {
        return fail("data", e, kExitRuntime);
    } catch (const nowcast::ConvergenceError& e) {
        return fail("convergence", e, kExitRuntime);
    } catch (const nowcast::InfeasibleAlignmentError& e) {
        return fail("alignment", e, kExitRuntime);
    } catch (const std::exception& e) {
        return fail("runtime", e, kExitRuntime);
    }
    return kExitRuntime;
}
