#include "nowcast/indexation.hpp"

#include "nowcast/covariates.hpp"
#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace nowcast {

namespace {

double series_factor(const std::map<MonthId, double>& series, MonthId month, std::string_view table)
{
    const auto it = series.find(month);
    if (it == series.end()) throw DataError(fmt::format("index table '{}' has no factor for {}", table, month.to_string()));
    return it->second;
}

void check_series(const std::map<MonthId, double>& series, MonthId baseline, std::string_view table)
{
    for (const auto& [m, v] : series)
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(fmt::format("index table '{}': factor for {} must be > 0", table, m.to_string()));
    const auto it = series.find(baseline);
    if (it != series.end() && it->second != 1.0)
        throw ConfigError(fmt::format("index table '{}': baseline month factor must be 1", table));
}

} // namespace

void IndexTables::validate() const
{
    if (!(awe_factor > 0.0) || !(cpi_uprating > 0.0)) throw ConfigError("index tables: uprating factors must be > 0");
    if (!(annual_real_return > -1.0)) throw ConfigError("index tables: annual_real_return must exceed -1");
    if (collection_month > baseline_month) throw ConfigError("index tables: collection month after baseline month");
    check_series(investment, baseline_month, "investment");
    check_series(cpi, baseline_month, "cpi");
    for (const auto& [key, cell] : payroll.cells()) {
        if (!(cell.wage_index > 0.0) || !(cell.job_index > 0.0)) throw ConfigError("index tables: payroll factors must be > 0");
        if (key.month == baseline_month.index() && cell.wage_index != 1.0)
            throw ConfigError("index tables: payroll baseline month factors must be 1");
    }
}

double IndexTables::investment_uprating() const
{
    const double years = months_between(collection_month, baseline_month) / 12.0;
    return std::pow(1.0 + annual_real_return, years);
}

PersonRecord index_person(const PersonRecord& p, MonthId month, const IndexTables& tables)
{
    PersonRecord out = p;
    if (p.wage_income != 0.0 || p.business_income != 0.0) {
        const auto cell = tables.payroll.lookup(p.industry, std::max(age_band(p.age), 0), month);
        if (!cell) throw DataError(fmt::format("index table 'payroll' has no factor for {}", month.to_string()));
        const double f = tables.awe_factor * cell->wage_index;
        out.wage_income = p.wage_income * f;
        out.business_income = p.business_income * f;
    }
    if (p.investment_income != 0.0)
        out.investment_income = p.investment_income * tables.investment_uprating() *
                                series_factor(tables.investment, month, "investment");
    if (p.other_income != 0.0)
        out.other_income = p.other_income * tables.cpi_uprating * series_factor(tables.cpi, month, "cpi");
    return out;
}

HouseholdRecord index_household(const HouseholdRecord& h, MonthId month, const IndexTables& tables)
{
    HouseholdRecord out = h;
    for (auto& p : out.members) p = index_person(p, month, tables);
    if (h.childcare_cost != 0.0)
        out.childcare_cost = h.childcare_cost * tables.cpi_uprating * series_factor(tables.cpi, month, "cpi");
    return out;
}

WeightedSample index_sample(const WeightedSample& s, MonthId month, const IndexTables& tables)
{
    if (month < tables.baseline_month)
        throw DataError(fmt::format("cannot index to {}: before the baseline month", month.to_string()));
    WeightedSample out;
    out.month = month;
    out.households.reserve(s.households.size());
    for (const auto& h : s.households) out.households.push_back(index_household(h, month, tables));
    return out;
}

void load_index_series(const std::filesystem::path& path, IndexTables& tables)
{
    const auto t = csv::read_file(path);
    const auto cm = t.column("month");
    const auto ci = t.column("investment");
    const auto cc = t.column("cpi");
    if (!cm || !ci || !cc) throw ConfigError(fmt::format("{}: expected columns month, investment, cpi", path.string()));
    tables.investment.clear();
    tables.cpi.clear();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const MonthId m = MonthId::parse(row[*cm]);
        try {
            tables.investment[m] = std::stod(row[*ci]);
            tables.cpi[m] = std::stod(row[*cc]);
        } catch (const std::exception&) {
            throw ConfigError(fmt::format("{} row {}: invalid factor", path.filename().string(), r + 2));
        }
    }
}

void save_index_series(const IndexTables& tables, const std::filesystem::path& path)
{
    std::set<MonthId> months;
    for (const auto& [m, v] : tables.investment) months.insert(m);
    for (const auto& [m, v] : tables.cpi) months.insert(m);
    csv::Writer w({"month", "investment", "cpi"});
    for (MonthId m : months) {
        const auto i = tables.investment.find(m);
        const auto c = tables.cpi.find(m);
        if (i == tables.investment.end() || c == tables.cpi.end())
            throw ConfigError(fmt::format("index series incomplete for {}", m.to_string()));
        w.row({m.to_string(), csv::num(i->second), csv::num(c->second)});
    }
    w.save(path);
}

} // namespace nowcast
