#pragma once
// Minimal RFC-4180 style CSV reading/writing. Header row required.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nowcast::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a named column, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
};

Table parse(std::string_view text);
Table read_file(const std::filesystem::path& path);

class Writer {
public:
    explicit Writer(std::vector<std::string> header);

    Writer& row(std::vector<std::string> cells);
    std::string str() const;
    void save(const std::filesystem::path& path) const;

private:
    std::size_t width_;
    std::string text_;
};

std::string quote(std::string_view cell);

// Shortest round-trip decimal representation; identical bytes for identical doubles.
std::string num(double v);
// Fixed-point representation with the given number of decimals.
std::string fixed(double v, int decimals);

} // namespace nowcast::csv
