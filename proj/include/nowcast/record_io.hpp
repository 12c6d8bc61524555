#pragma once
// Unit-record CSV files: one persons file and one households file, keyed by
// ids, each carrying a `month` column so a file may hold several panel waves.
// Column dictionary: docs/data_dictionary.md.

#include "nowcast/core_data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nowcast::io {

struct LoadResult {
    std::vector<WeightedSample> samples; // one per month, ascending
    std::vector<std::string> findings;   // "persons.csv row 17: unknown industry code 'Z'"
};

// Collects every row-level problem instead of stopping at the first.
LoadResult load_samples(const std::filesystem::path& persons_csv, const std::filesystem::path& households_csv);

// Throws DataError with the first finding when anything is wrong.
std::vector<WeightedSample> read_samples(const std::filesystem::path& persons_csv,
                                         const std::filesystem::path& households_csv);

struct WriteOptions {
    bool include_income = true; // labour-panel files carry no income columns
};

void write_samples(const std::vector<WeightedSample>& samples, const std::filesystem::path& persons_csv,
                   const std::filesystem::path& households_csv, WriteOptions options = {});

} // namespace nowcast::io
