#pragma once
// Moves survey incomes from the collection vintage to an analysis month.

#include "nowcast/core_data.hpp"
#include "nowcast/synthpop.hpp"

#include <filesystem>
#include <map>

namespace nowcast {

struct IndexTables {
    MonthId collection_month{2018, 3};
    MonthId baseline_month{2020, 2};
    double awe_factor = 1.0;         // wage growth, collection -> baseline month
    double cpi_uprating = 1.0;       // prices, collection -> baseline month
    double annual_real_return = 0.025;
    PayrollSeries payroll;           // wage factors relative to the baseline month
    std::map<MonthId, double> investment; // cumulative return relative to baseline month
    std::map<MonthId, double> cpi;        // relative to baseline month

    // Throws ConfigError on a non-positive factor or a baseline factor other than 1.
    void validate() const;

    double investment_uprating() const; // (1 + r)^(years from collection to baseline)
};

// Throws DataError naming the table and month when a factor is missing.
PersonRecord index_person(const PersonRecord& p, MonthId month, const IndexTables& tables);
HouseholdRecord index_household(const HouseholdRecord& h, MonthId month, const IndexTables& tables);
WeightedSample index_sample(const WeightedSample& s, MonthId month, const IndexTables& tables);

// Long CSV with columns month, investment, cpi.
void load_index_series(const std::filesystem::path& path, IndexTables& tables);
void save_index_series(const IndexTables& tables, const std::filesystem::path& path);

} // namespace nowcast
