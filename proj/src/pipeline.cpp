#include "nowcast/pipeline.hpp"

#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"
#include "nowcast/record_io.hpp"
#include "nowcast/rng.hpp"
#include "nowcast/transitions.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace nowcast {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(std::string_view origin, std::string_view what)
{
    throw ConfigError(fmt::format("{}: {}", origin, what));
}

const json& need(const json& j, const char* key, std::string_view origin)
{
    if (!j.is_object() || !j.contains(key)) bad(origin, fmt::format("missing key '{}'", key));
    return j.at(key);
}

double number_or(const json& j, const char* key, double fallback, std::string_view origin)
{
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) bad(origin, fmt::format("'{}' must be a number", key));
    return j.at(key).get<double>();
}

std::string string_of(const json& j, const char* key, std::string_view origin)
{
    const auto& v = need(j, key, origin);
    if (!v.is_string()) bad(origin, fmt::format("'{}' must be a string", key));
    return v.get<std::string>();
}

MonthId month_of(const json& v, std::string_view origin)
{
    if (!v.is_string()) bad(origin, "months must be \"YYYY-MM\" strings");
    try {
        return MonthId::parse(v.get<std::string>());
    } catch (const ConfigError& e) {
        bad(origin, e.what());
    }
}

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hex64(std::uint64_t v) { return fmt::format("{:016x}", v); }

// ---- tables ---------------------------------------------------------------

std::string money(double v) { return csv::fixed(v, 4); }
std::string ratio(double v) { return csv::fixed(v, 8); }

struct Measures {
    QuintileMap quintiles;
    PovertyLine line;
    PovertyUnit unit = PovertyUnit::person;

    Measure quintile_mean(Concept c, int q) const // q = 0..4, 5 = all
    {
        return [this, c, q](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
            const auto t = quintile_table(s, quintiles, household_concept(s, r, c));
            return q == 5 ? t.all : t.means[static_cast<std::size_t>(q)];
        };
    }
    Measure market_gini() const
    {
        return [](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
            const auto u = market_income_15_64(s, r);
            return gini(u.values, u.weights);
        };
    }
    Measure disposable_gini() const
    {
        return [](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
            const auto u = unit_values(s, household_concept(s, r, Concept::equivalised_disposable), PovertyUnit::person);
            return gini(u.values, u.weights);
        };
    }
    Measure poverty() const
    {
        return [this](const WeightedSample& s, std::span<const DisposableIncomeResult> r) {
            return poverty_rate(s, household_concept(s, r, Concept::equivalised_after_housing), line, unit);
        };
    }
};

std::string quintile_label(int q) { return q == 5 ? "all" : std::to_string(q + 1); }

void quintile_rows(csv::Writer& w, const std::string& month, const std::string& scenario, const QuintileTable& t,
                   const QuintileTable& pre)
{
    std::vector<std::string> row = {month, scenario, "mean_monthly"};
    for (double v : t.means) row.push_back(money(v));
    row.push_back(money(t.all));
    w.row(row);
    const auto pct = percent_change(t, pre);
    row = {month, scenario, "pct_change_vs_pre_shock"};
    for (double v : pct.means) row.push_back(csv::fixed(v, 4));
    row.push_back(csv::fixed(pct.all, 4));
    w.row(row);
}

std::string quintile_panel(const RunResult& r, const Measures& m, Concept c)
{
    csv::Writer w({"month", "scenario", "measure", "q1", "q2", "q3", "q4", "q5", "all"});
    const auto table_of = [&](const Evaluated& e) { return quintile_table(e.sample, m.quintiles, household_concept(e.sample, e.results, c)); };
    const auto pre = table_of(r.scenarios.front().pre);
    quintile_rows(w, r.baseline.month.to_string(), "pre_shock", pre, pre);
    for (const auto& s : r.scenarios) {
        const auto month = s.month.to_string();
        quintile_rows(w, month, "nowcast", table_of(s.nowcast), pre);
        for (Bound b : kBounds)
            quintile_rows(w, month, std::string(bound_name(b)), table_of(s.counterfactual[static_cast<std::size_t>(b)]), pre);
    }
    return w.str();
}

std::string effects_panel(const RunResult& r, const Measures& m, Concept c)
{
    csv::Writer w({"month", "bound", "label", "quintile", "pre_shock", "nowcast", "counterfactual", "effect_a", "effect_b",
                   "effect_a_pct", "effect_b_pct", "identity_residual"});
    for (const auto& s : r.scenarios)
        for (int q = 0; q <= 5; ++q) {
            const auto d = run_decomposition(s, m.quintile_mean(c, q));
            for (Bound b : kBounds) {
                const auto& e = d.at(b);
                w.row({s.month.to_string(), std::string(bound_name(b)), std::string(bound_estimate_label(b)), quintile_label(q),
                       money(d.pre), money(d.nowcast), money(e.counterfactual), money(e.a), money(e.b),
                       csv::fixed(100.0 * e.a / d.pre, 4), csv::fixed(100.0 * e.b / d.pre, 4), csv::num(e.residual)});
            }
        }
    return w.str();
}

std::string breakdown_panel(const RunResult& r, const Measures& m)
{
    csv::Writer w({"month", "quintile", "total_change", "gross_income", "free_childcare", "rest", "total_pct",
                   "gross_income_pct", "free_childcare_pct", "rest_pct"});
    for (const auto& s : r.scenarios)
        for (int q = 0; q <= 5; ++q) {
            const auto measure = m.quintile_mean(Concept::equivalised_disposable_after_childcare, q);
            const double pre = measure(s.pre.sample, s.pre.results);
            const auto b = breakdown_disposable(s, measure);
            w.row({s.month.to_string(), quintile_label(q), money(b.total), money(b.gross_income), money(b.free_childcare),
                   money(b.rest), csv::fixed(100.0 * b.total / pre, 4), csv::fixed(100.0 * b.gross_income / pre, 4),
                   csv::fixed(100.0 * b.free_childcare / pre, 4), csv::fixed(100.0 * b.rest / pre, 4)});
        }
    return w.str();
}

std::string series_panel(const RunResult& r, const Measure& measure, bool with_line, double line)
{
    std::vector<std::string> header = {"month", "bound", "label", "pre_shock", "nowcast", "counterfactual", "effect_a",
                                       "effect_b", "identity_residual"};
    if (with_line) header.push_back("poverty_line_monthly");
    csv::Writer w(header);
    for (const auto& s : r.scenarios) {
        const auto d = run_decomposition(s, measure);
        for (Bound b : kBounds) {
            const auto& e = d.at(b);
            std::vector<std::string> row = {s.month.to_string(), std::string(bound_name(b)), std::string(bound_impact_label(b)),
                                            ratio(d.pre), ratio(d.nowcast), ratio(e.counterfactual), ratio(e.a), ratio(e.b),
                                            csv::num(e.residual)};
            if (with_line) row.push_back(money(line * kFortnightToMonth));
            w.row(row);
        }
    }
    return w.str();
}

std::string unemployment_panel(const RunResult& r)
{
    csv::Writer w({"month", "panel_unemployment_rate", "modelled_unemployment_rate", "difference_pp",
                   "jobkeeper_target", "jobkeeper_selected", "eligibility_target", "eligibility_selected"});
    const auto row = [&](const MonthResult& m) {
        w.row({m.month.to_string(), ratio(m.panel_labour.unemployment_rate), ratio(m.modelled_labour.unemployment_rate),
               csv::fixed(100.0 * (m.modelled_labour.unemployment_rate - m.panel_labour.unemployment_rate), 4),
               csv::fixed(m.jobkeeper_target, 1), csv::fixed(m.jobkeeper_selected, 1), csv::fixed(m.eligibility_target, 1),
               csv::fixed(m.eligibility_selected, 1)});
    };
    row(r.baseline);
    for (const auto& m : r.months) row(m);
    return w.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw Error(fmt::format("write failed for '{}'", path.string()));
}

double selected_weight(const WeightedSample& s, const std::set<PersonId>& ids)
{
    double w = 0.0;
    for (const auto& h : s.households)
        for (const auto& p : h.members)
            if (ids.contains(p.person_id)) w += h.weight;
    return w;
}

std::vector<MonthId> sorted_months(std::vector<MonthId> months)
{
    std::sort(months.begin(), months.end());
    months.erase(std::unique(months.begin(), months.end()), months.end());
    return months;
}

} // namespace

fs::path RunConfig::resolve(const fs::path& p) const { return p.is_absolute() ? p : base_dir / p; }

std::string RunConfig::canonical_json() const
{
    json j;
    j["seed"] = seed;
    j["baseline_month"] = baseline_month.to_string();
    json months = json::array();
    for (MonthId m : analysis_months) months.push_back(m.to_string());
    j["analysis_months"] = months;
    if (synthetic) {
        j["data"]["synthetic"] = {{"n_households", synthetic->n_households},
                                  {"n_panel_households", synthetic->n_panel_households},
                                  {"n_panel_waves", synthetic->n_panel_waves},
                                  {"rotation_retention", synthetic->rotation_retention},
                                  {"collection_month", synthetic->collection_month.to_string()},
                                  {"shock_months", synthetic->shock.months.size()}};
    }
    if (files) {
        j["data"]["files"] = {{"survey_persons", files->survey_persons.generic_string()},
                              {"survey_households", files->survey_households.generic_string()},
                              {"panel_persons", files->panel_persons.generic_string()},
                              {"panel_households", files->panel_households.generic_string()},
                              {"payroll", files->payroll.generic_string()}};
    }
    j["regimes"] = {{"p0", p0_path.generic_string()}, {"p1", p1_path.generic_string()}};
    j["index"] = {{"series", index_series.generic_string()},
                  {"awe_factor", awe_factor},
                  {"cpi_uprating", cpi_uprating},
                  {"annual_real_return", annual_real_return}};
    json anchors = json::object();
    for (const auto& [m, v] : jobkeeper_anchors) anchors[m.to_string()] = v;
    j["alignment"] = {{"jobkeeper", {{"anchors", anchors}, {"noise_scale", jobkeeper_noise}}},
                      {"eligibility", {{"noise_scale", eligibility_noise}}}};
    j["options"] = {{"trim_quantile", trim_quantile ? json(*trim_quantile) : json(nullptr)},
                    {"poverty_unit", poverty_unit == PovertyUnit::person ? "person" : "household"}};
    return j.dump();
}

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir, std::string_view origin)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad(origin, fmt::format("invalid JSON ({})", e.what()));
    }
    if (!j.is_object()) bad(origin, "top level must be an object");
    RunConfig cfg;
    cfg.base_dir = base_dir;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) bad(origin, "'seed' must be a non-negative integer");
        cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    cfg.baseline_month = month_of(need(j, "baseline_month", origin), origin);
    const auto& months = need(j, "analysis_months", origin);
    if (!months.is_array()) bad(origin, "'analysis_months' must be a list");
    for (const auto& m : months) cfg.analysis_months.push_back(month_of(m, origin));

    const auto& data = need(j, "data", origin);
    if (data.contains("synthetic") == data.contains("files")) bad(origin, "'data' needs exactly one of 'synthetic' or 'files'");
    if (data.contains("synthetic")) {
        const auto& s = data.at("synthetic");
        SynthConfig sc;
        sc.n_households = static_cast<std::size_t>(number_or(s, "n_households", static_cast<double>(sc.n_households), origin));
        sc.n_panel_households = static_cast<std::size_t>(number_or(s, "n_panel_households", 0.0, origin));
        sc.n_panel_waves = static_cast<int>(number_or(s, "n_panel_waves", sc.n_panel_waves, origin));
        sc.rotation_retention = number_or(s, "rotation_retention", sc.rotation_retention, origin);
        if (s.contains("collection_month")) sc.collection_month = month_of(s.at("collection_month"), origin);
        sc.baseline_month = cfg.baseline_month;
        sc.policy_month = cfg.baseline_month.next();
        const std::string shock = s.contains("shock") ? string_of(s, "shock", origin) : "covid_default";
        if (shock == "covid_default") sc.shock = ShockProfile::covid_default(cfg.baseline_month);
        else if (shock == "none") sc.shock = ShockProfile::none();
        else bad(origin, fmt::format("unknown shock profile '{}'", shock));
        cfg.synthetic = sc;
    } else {
        const auto& f = data.at("files");
        cfg.files = FileSources{string_of(f, "survey_persons", origin), string_of(f, "survey_households", origin),
                                string_of(f, "panel_persons", origin), string_of(f, "panel_households", origin),
                                string_of(f, "payroll", origin)};
    }

    const auto& regimes = need(j, "regimes", origin);
    cfg.p0_path = string_of(regimes, "p0", origin);
    cfg.p1_path = string_of(regimes, "p1", origin);

    const auto& index = need(j, "index", origin);
    cfg.index_series = string_of(index, "series", origin);
    cfg.awe_factor = number_or(index, "awe_factor", 1.0, origin);
    cfg.cpi_uprating = number_or(index, "cpi_uprating", 1.0, origin);
    cfg.annual_real_return = number_or(index, "annual_real_return", 0.025, origin);

    if (j.contains("alignment")) {
        const auto& a = j.at("alignment");
        if (a.contains("jobkeeper")) {
            const auto& k = a.at("jobkeeper");
            if (k.contains("anchors")) {
                if (!k.at("anchors").is_object()) bad(origin, "'alignment.jobkeeper.anchors' must map months to counts");
                for (const auto& [m, v] : k.at("anchors").items()) {
                    if (!v.is_number() || v.get<double>() < 0.0) bad(origin, fmt::format("jobkeeper anchor {} must be a count >= 0", m));
                    cfg.jobkeeper_anchors[month_of(json(m), origin)] = v.get<double>();
                }
            }
            cfg.jobkeeper_noise = number_or(k, "noise_scale", 1.0, origin);
        }
        if (a.contains("eligibility")) cfg.eligibility_noise = number_or(a.at("eligibility"), "noise_scale", 1.0, origin);
    }
    if (cfg.jobkeeper_noise < 0.0 || cfg.eligibility_noise < 0.0) bad(origin, "alignment noise_scale must be >= 0");

    if (j.contains("options")) {
        const auto& o = j.at("options");
        if (o.contains("trim_quantile")) {
            if (o.at("trim_quantile").is_null()) cfg.trim_quantile.reset();
            else {
                cfg.trim_quantile = number_or(o, "trim_quantile", 0.995, origin);
                if (!(*cfg.trim_quantile > 0.0 && *cfg.trim_quantile <= 1.0)) bad(origin, "'trim_quantile' must lie in (0, 1] or be null");
            }
        }
        if (o.contains("poverty_unit")) {
            const auto u = string_of(o, "poverty_unit", origin);
            if (u == "person") cfg.poverty_unit = PovertyUnit::person;
            else if (u == "household") cfg.poverty_unit = PovertyUnit::household;
            else bad(origin, fmt::format("unknown poverty_unit '{}'", u));
        }
    }
    if (j.contains("output_dir")) cfg.output_dir = string_of(j, "output_dir", origin);
    if (cfg.synthetic) cfg.synthetic->seed = cfg.seed;
    return cfg;
}

RunConfig load_run_config(const fs::path& path)
{
    return parse_run_config(read_text(path), path.parent_path(), path.string());
}

void apply_overrides(RunConfig& cfg, const RunOverrides& o)
{
    if (o.seed) {
        cfg.seed = *o.seed;
        if (cfg.synthetic) cfg.synthetic->seed = *o.seed;
    }
    if (o.months) cfg.analysis_months = *o.months;
    if (o.output_dir) cfg.output_dir = fs::absolute(*o.output_dir);
    else if (const char* env = std::getenv(kOutputDirEnv.data()); env && *env) cfg.output_dir = fs::absolute(env);
}

std::vector<std::string> validate_config(const RunConfig& cfg)
{
    std::vector<std::string> out;
    if (cfg.analysis_months.empty()) out.push_back("analysis_months is empty");
    for (std::size_t i = 0; i < cfg.analysis_months.size(); ++i) {
        const MonthId m = cfg.analysis_months[i];
        if (m <= cfg.baseline_month)
            out.push_back(fmt::format("analysis month {} does not follow the baseline month {}", m.to_string(),
                                      cfg.baseline_month.to_string()));
        else if (i > 0 && m <= cfg.analysis_months[i - 1])
            out.push_back(fmt::format("analysis months out of order at {}", m.to_string()));
    }
    const auto file_exists = [&](const fs::path& p, std::string_view what) {
        if (!fs::exists(cfg.resolve(p))) {
            out.push_back(fmt::format("{} not found: {}", what, cfg.resolve(p).string()));
            return false;
        }
        return true;
    };
    std::optional<PolicyRegime> p0;
    std::optional<PolicyRegime> p1;
    for (auto [path, slot, name] : {std::tuple{cfg.p0_path, &p0, "p0"}, std::tuple{cfg.p1_path, &p1, "p1"}}) {
        if (!file_exists(path, fmt::format("regime file {}", name))) continue;
        try {
            *slot = PolicyRegime::load(cfg.resolve(path));
        } catch (const Error& e) {
            out.push_back(e.what());
        }
    }
    if (p0) {
        if (!p0->covers(cfg.baseline_month))
            out.push_back(fmt::format("regime '{}' does not cover the baseline month {}", p0->regime_id, cfg.baseline_month.to_string()));
        for (MonthId m : cfg.analysis_months)
            if (!p0->covers(m)) out.push_back(fmt::format("regime '{}' does not cover {}", p0->regime_id, m.to_string()));
    }
    if (file_exists(cfg.index_series, "index series")) {
        try {
            IndexTables t;
            t.baseline_month = cfg.baseline_month;
            t.collection_month = cfg.baseline_month;
            load_index_series(cfg.resolve(cfg.index_series), t);
            for (MonthId m : cfg.analysis_months)
                if (!t.investment.contains(m)) out.push_back(fmt::format("index series has no factors for {}", m.to_string()));
            if (!t.investment.contains(cfg.baseline_month)) out.push_back("index series has no factors for the baseline month");
        } catch (const Error& e) {
            out.push_back(e.what());
        }
    }
    if (cfg.synthetic) {
        try {
            cfg.synthetic->validate();
            const MonthId last = MonthId::from_index(cfg.baseline_month.index() + cfg.synthetic->n_panel_waves - 1);
            for (MonthId m : cfg.analysis_months)
                if (m > last) out.push_back(fmt::format("synthetic panel ends at {}; cannot analyse {}", last.to_string(), m.to_string()));
        } catch (const Error& e) {
            out.push_back(e.what());
        }
    }
    if (cfg.files) {
        const auto& f = *cfg.files;
        const bool survey_ok = file_exists(f.survey_persons, "survey persons file") & file_exists(f.survey_households, "survey households file");
        const bool panel_ok = file_exists(f.panel_persons, "panel persons file") & file_exists(f.panel_households, "panel households file");
        if (survey_ok) {
            auto r = io::load_samples(cfg.resolve(f.survey_persons), cfg.resolve(f.survey_households));
            out.insert(out.end(), r.findings.begin(), r.findings.end());
            if (r.findings.empty() && r.samples.size() != 1) out.push_back("survey files must hold exactly one month");
        }
        if (panel_ok) {
            auto r = io::load_samples(cfg.resolve(f.panel_persons), cfg.resolve(f.panel_households));
            out.insert(out.end(), r.findings.begin(), r.findings.end());
            if (r.findings.empty()) {
                std::set<MonthId> have;
                for (const auto& s : r.samples) have.insert(s.month);
                for (MonthId m : cfg.analysis_months)
                    if (!have.contains(m)) out.push_back(fmt::format("panel has no wave for {}", m.to_string()));
                if (!have.contains(cfg.baseline_month)) out.push_back("panel has no wave for the baseline month");
            }
        }
        if (file_exists(f.payroll, "payroll file")) {
            try {
                (void)PayrollSeries::load_csv(cfg.resolve(f.payroll));
            } catch (const Error& e) {
                out.push_back(e.what());
            }
        }
    }
    return out;
}

std::vector<std::string> validate_config_file(const fs::path& path, const RunOverrides& overrides)
{
    try {
        RunConfig cfg = load_run_config(path);
        apply_overrides(cfg, overrides);
        return validate_config(cfg);
    } catch (const Error& e) {
        return {e.what()};
    }
}

InputData load_inputs(const RunConfig& cfg)
{
    InputData in;
    in.p0 = PolicyRegime::load(cfg.resolve(cfg.p0_path));
    in.p1 = PolicyRegime::load(cfg.resolve(cfg.p1_path));
    std::vector<WeightedSample> panel;
    if (cfg.synthetic) {
        in.survey = gen_baseline_survey(*cfg.synthetic);
        panel = gen_labour_panel(*cfg.synthetic, in.survey);
        in.tables.payroll = gen_payroll(*cfg.synthetic);
    } else {
        const auto& f = *cfg.files;
        auto survey = io::read_samples(cfg.resolve(f.survey_persons), cfg.resolve(f.survey_households));
        if (survey.size() != 1) throw DataError("survey files must hold exactly one month");
        in.survey = std::move(survey.front());
        panel = io::read_samples(cfg.resolve(f.panel_persons), cfg.resolve(f.panel_households));
        in.tables.payroll = PayrollSeries::load_csv(cfg.resolve(f.payroll));
    }
    for (auto& w : panel) {
        const MonthId m = w.month;
        in.panel.emplace(m, std::move(w));
    }
    in.tables.collection_month = in.survey.month;
    in.tables.baseline_month = cfg.baseline_month;
    in.tables.awe_factor = cfg.awe_factor;
    in.tables.cpi_uprating = cfg.cpi_uprating;
    in.tables.annual_real_return = cfg.annual_real_return;
    load_index_series(cfg.resolve(cfg.index_series), in.tables);
    in.tables.validate();
    return in;
}

MonthResult prepare_month(const RunConfig& cfg, const InputData& in, MonthId month)
{
    const auto wave = in.panel.find(month);
    if (wave == in.panel.end()) throw DataError(fmt::format("panel has no wave for {}", month.to_string()));
    const WeightedSample& panel = wave->second;

    MonthResult r;
    r.month = month;
    const WeightedSample indexed = index_sample(in.survey, month, in.tables);
    const auto model = fit_membership(indexed, panel, CovariateSpec::reweighting_default());
    const auto update = compute_ratios(model, indexed, model.gamma, cfg.trim_quantile, month);
    WeightedSample y = calibrate_total(update, panel.total_weight());
    r.diagnostics = reweight_diagnostics(indexed, y, panel);
    r.panel_labour = labour_shares(panel);
    r.modelled_labour = labour_shares(y);

    std::set<PersonId> jobkeeper;
    std::set<PersonId> eligibility;
    if (month > cfg.baseline_month && in.p1.covers(month)) {
        const std::string tag = fmt::format("month={}", month.to_string());
        if (in.p1.covid.jobkeeper.active) {
            const auto prev = in.panel.find(month.prev());
            if (prev == in.panel.end()) throw DataError(fmt::format("panel has no wave for {}", month.prev().to_string()));
            std::vector<AlignmentCandidate> candidates;
            for (Sex sex : {Sex::male, Sex::female}) {
                const auto obs = retention_observations(prev->second, panel, sex);
                const auto probit = fit_probit(obs, CovariateSpec::employment_retention(), TransitionOutcome::remain_employed,
                                               {sex, month}, {}, &y);
                for (const auto& [id, p] : score_baseline(probit, y)) candidates.push_back({id, 1.0 - p, 0.0});
            }
            std::map<PersonId, double> weight_of;
            for (const auto& h : y.households)
                for (const auto& p : h.members) weight_of.emplace(p.person_id, h.weight);
            for (auto& c : candidates) c.weight = weight_of.at(c.id);
            r.jobkeeper_target = interpolate_target(cfg.jobkeeper_anchors, month);
            jobkeeper = align_binary(candidates, {r.jobkeeper_target, cfg.jobkeeper_noise},
                                     derive_seed(cfg.seed, tag + "/stage=align-jobkeeper"));
            r.jobkeeper_selected = selected_weight(y, jobkeeper);
        }
        if (!in.p1.rule(Benefit::jobseeker).activity_test_active || !in.p1.rule(Benefit::youth_allowance).activity_test_active) {
            double nilf = 0.0;
            double flagged = 0.0;
            for (const auto& h : panel.households)
                for (const auto& p : h.members)
                    if (p.is_adult() && p.labour_state == LabourState::not_in_labour_force) {
                        nilf += h.weight;
                        if (p.employed_since_baseline_flag) flagged += h.weight;
                    }
            std::vector<AlignmentCandidate> candidates;
            double y_nilf = 0.0;
            for (Sex sex : {Sex::male, Sex::female}) {
                const auto obs = history_observations(panel, sex);
                const auto probit = fit_probit(obs, CovariateSpec::employment_history(), TransitionOutcome::employed_since_baseline,
                                               {sex, month}, {}, &y);
                const auto scores = score_baseline(probit, y);
                for (const auto& h : y.households)
                    for (const auto& p : h.members) {
                        const auto it = scores.find(p.person_id);
                        if (it == scores.end()) continue;
                        candidates.push_back({p.person_id, it->second, h.weight});
                        y_nilf += h.weight;
                    }
            }
            r.eligibility_target = nilf > 0.0 ? flagged / nilf * y_nilf : 0.0;
            eligibility = align_binary(candidates, {r.eligibility_target, cfg.eligibility_noise},
                                       derive_seed(cfg.seed, tag + "/stage=align-eligibility"));
            r.eligibility_selected = selected_weight(y, eligibility);
        }
    }
    r.reweighted = apply_transitions(std::move(y), jobkeeper, eligibility);
    return r;
}

RunResult run_pipeline(const RunConfig& cfg)
{
    const auto findings = validate_config(cfg);
    if (!findings.empty()) throw ConfigError(findings.front());
    const InputData in = load_inputs(cfg);
    const auto months = sorted_months(cfg.analysis_months);

    RunResult r;
    r.baseline = prepare_month(cfg, in, cfg.baseline_month);

    // Months are independent: each derives its randomness from its own label.
    std::vector<std::future<std::pair<MonthResult, ScenarioSet>>> jobs;
    for (MonthId m : months)
        jobs.push_back(std::async(std::launch::async, [&cfg, &in, &r, m] {
            MonthResult mr = prepare_month(cfg, in, m);
            ScenarioSet s = evaluate_scenarios(r.baseline.reweighted, mr.reweighted, in.p0, in.p1);
            return std::pair{std::move(mr), std::move(s)};
        }));
    for (auto& j : jobs) {
        auto [mr, s] = j.get();
        r.months.push_back(std::move(mr));
        r.scenarios.push_back(std::move(s));
    }

    const auto& pre = r.scenarios.front().pre;
    r.quintiles = assign_quintiles(pre.sample, household_concept(pre.sample, pre.results, Concept::equivalised_disposable));
    r.poverty_line = anchor_poverty_line(pre.sample, household_concept(pre.sample, pre.results, Concept::equivalised_after_housing),
                                         cfg.poverty_unit);
    Measures m{r.quintiles, r.poverty_line, cfg.poverty_unit};

    r.output_dir = cfg.resolve(cfg.output_dir);
    fs::create_directories(r.output_dir);
    std::vector<std::pair<std::string, std::string>> tables;
    tables.emplace_back(fmt::format("table1_validation_{}.csv", r.baseline.month.to_string()), r.baseline.diagnostics.to_csv());
    for (const auto& mr : r.months)
        tables.emplace_back(fmt::format("table1_validation_{}.csv", mr.month.to_string()), mr.diagnostics.to_csv());
    tables.emplace_back("table2_unemployment.csv", unemployment_panel(r));
    tables.emplace_back("table4_market_income_quintiles.csv", quintile_panel(r, m, Concept::household_market_income));
    tables.emplace_back("table5_market_income_effects.csv", effects_panel(r, m, Concept::household_market_income));
    tables.emplace_back("table6_disposable_quintiles.csv", quintile_panel(r, m, Concept::equivalised_disposable_after_childcare));
    tables.emplace_back("table7_disposable_effects.csv", effects_panel(r, m, Concept::equivalised_disposable_after_childcare));
    tables.emplace_back("table8_breakdown.csv", breakdown_panel(r, m));
    tables.emplace_back("table9_market_gini.csv", series_panel(r, m.market_gini(), false, 0.0));
    tables.emplace_back("table10_disposable_gini.csv", series_panel(r, m.disposable_gini(), false, 0.0));
    tables.emplace_back("table11_poverty.csv", series_panel(r, m.poverty(), true, r.poverty_line.value));

    json manifest;
    manifest["tool"] = "nowcast";
    manifest["version"] = std::string(kVersion);
    manifest["seed"] = cfg.seed;
    manifest["config_hash"] = hex64(fnv1a64(cfg.canonical_json()));
    manifest["regimes"] = {{"p0", in.p0.regime_id}, {"p1", in.p1.regime_id}};
    manifest["baseline_month"] = cfg.baseline_month.to_string();
    json ms = json::array();
    for (MonthId mo : months) ms.push_back(mo.to_string());
    manifest["analysis_months"] = ms;
    manifest["poverty_line_fortnightly"] = r.poverty_line.value;
    json files = json::array();
    for (const auto& [name, text] : tables) {
        const auto path = r.output_dir / name;
        write_file(path, text);
        r.files.push_back(path);
        files.push_back({{"name", name}, {"bytes", text.size()}, {"fnv1a64", hex64(fnv1a64(text))}});
    }
    manifest["files"] = files;
    const auto manifest_path = r.output_dir / "manifest.json";
    write_file(manifest_path, manifest.dump(2) + "\n");
    r.files.push_back(manifest_path);
    return r;
}

std::vector<fs::path> write_synthetic_inputs(const SynthConfig& cfg, const fs::path& dir)
{
    fs::create_directories(dir);
    const auto survey = gen_baseline_survey(cfg);
    const auto panel = gen_labour_panel(cfg, survey);
    const auto payroll = gen_payroll(cfg);
    std::vector<fs::path> out = {dir / "survey_persons.csv", dir / "survey_households.csv", dir / "panel_persons.csv",
                                 dir / "panel_households.csv", dir / "payroll.csv"};
    io::write_samples({survey}, out[0], out[1]);
    io::write_samples(panel, out[2], out[3], {.include_income = false});
    payroll.save_csv(out[4]);
    return out;
}

} // namespace nowcast
