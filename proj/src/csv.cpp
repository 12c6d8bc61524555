#include "nowcast/csv.hpp"

#include "nowcast/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace nowcast::csv {

std::optional<std::size_t> Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

Table parse(std::string_view text)
{
    if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF && static_cast<unsigned char>(text[1]) == 0xBB &&
        static_cast<unsigned char>(text[2]) == 0xBF)
        text.remove_prefix(3);

    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string cell;
    bool in_quotes = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cell += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            in_quotes = true;
            any = true;
            break;
        case ',':
            record.push_back(std::move(cell));
            cell.clear();
            any = true;
            break;
        case '\r':
            break;
        case '\n':
            if (any || !cell.empty()) {
                record.push_back(std::move(cell));
                records.push_back(std::move(record));
            }
            record.clear();
            cell.clear();
            any = false;
            break;
        default:
            cell += c;
            any = true;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    if (any || !cell.empty()) {
        record.push_back(std::move(cell));
        records.push_back(std::move(record));
    }
    if (records.empty()) throw DataError("csv: missing header row");

    Table t;
    t.header = std::move(records.front());
    t.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    for (std::size_t r = 0; r < t.rows.size(); ++r)
        if (t.rows[r].size() != t.header.size())
            throw DataError(fmt::format("csv: row {} has {} fields, header has {}", r + 2, t.rows[r].size(),
                                        t.header.size()));
    return t;
}

Table read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse(ss.str());
    } catch (const DataError& e) {
        throw DataError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string quote(std::string_view cell)
{
    if (cell.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(cell);
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

Writer::Writer(std::vector<std::string> header) : width_(header.size())
{
    row(std::move(header));
}

Writer& Writer::row(std::vector<std::string> cells)
{
    if (cells.size() != width_) throw Error(fmt::format("csv writer: row has {} cells, expected {}", cells.size(), width_));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += quote(cells[i]);
    }
    text_ += '\n';
    return *this;
}

std::string Writer::str() const { return text_; }

void Writer::save(const std::filesystem::path& path) const
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    out << text_;
}

std::string num(double v)
{
    if (v == 0.0) return "0"; // folds -0
    return fmt::format("{}", v);
}

std::string fixed(double v, int decimals)
{
    std::string s = fmt::format("{:.{}f}", v, decimals);
    // "-0.000" -> "0.000"
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

} // namespace nowcast::csv
