#include "nowcast/record_io.hpp"

#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>
#include <set>

#include <fmt/format.h>

namespace nowcast::io {

namespace {

const std::vector<std::string> kHouseholdColumns = {
    "month", "household_id", "state", "n_children_0_4", "n_children_5_14", "housing_cost", "childcare_cost", "weight"};

const std::vector<std::string> kPersonColumns = {"month",
                                                 "person_id",
                                                 "household_id",
                                                 "age",
                                                 "sex",
                                                 "marital",
                                                 "overseas_born",
                                                 "education",
                                                 "labour_state",
                                                 "industry",
                                                 "occupation",
                                                 "usual_hours",
                                                 "n_jobs",
                                                 "unemployment_duration",
                                                 "welfare_flags",
                                                 "jobkeeper_flag",
                                                 "employed_since_baseline_flag"};

const std::vector<std::string> kIncomeColumns = {"wage_income", "business_income", "investment_income", "other_income"};

// Row-scoped field access that records findings instead of throwing.
class RowReader {
public:
    RowReader(const csv::Table& t, std::string file, std::vector<std::string>& findings)
        : table_(t), file_(std::move(file)), findings_(findings)
    {
    }

    void start(std::size_t row_index) { row_ = row_index; ok_ = true; }
    bool ok() const { return ok_; }

    const std::string* cell(std::string_view column)
    {
        const auto c = table_.column(column);
        if (!c) return nullptr;
        return &table_.rows[row_][*c];
    }

    void bad(std::string_view what)
    {
        // Row numbers are 1-based file lines; line 1 is the header.
        findings_.push_back(fmt::format("{} row {}: {}", file_, row_ + 2, what));
        ok_ = false;
    }

    template <typename T>
    T number(std::string_view column, T fallback, bool required = true)
    {
        const auto* s = cell(column);
        if (!s || s->empty()) {
            if (required && s) bad(fmt::format("missing value for '{}'", column));
            return fallback;
        }
        T v{};
        const auto* first = s->data();
        const auto* last = s->data() + s->size();
        const auto r = std::from_chars(first, last, v);
        if (r.ec != std::errc{} || r.ptr != last) {
            bad(fmt::format("invalid number '{}' in '{}'", *s, column));
            return fallback;
        }
        return v;
    }

    bool flag(std::string_view column)
    {
        const auto* s = cell(column);
        if (!s || s->empty() || *s == "0") return false;
        if (*s == "1") return true;
        bad(fmt::format("invalid boolean '{}' in '{}' (expected 0/1)", *s, column));
        return false;
    }

    template <typename Parser>
    auto code(std::string_view column, Parser parser, std::string_view what, bool optional)
        -> decltype(parser(std::string_view{}))
    {
        const auto* s = cell(column);
        if (!s || s->empty()) {
            if (!optional) bad(fmt::format("missing {}", what));
            return std::nullopt;
        }
        auto v = parser(*s);
        if (!v) bad(fmt::format("unknown {} code '{}'", what, *s));
        return v;
    }

private:
    const csv::Table& table_;
    std::string file_;
    std::vector<std::string>& findings_;
    std::size_t row_ = 0;
    bool ok_ = true;
};

void require_columns(const csv::Table& t, const std::vector<std::string>& cols, const std::string& file,
                     std::vector<std::string>& findings)
{
    for (const auto& c : cols)
        if (!t.column(c)) findings.push_back(fmt::format("{}: missing column '{}'", file, c));
}

std::optional<MonthId> month_of(RowReader& rr)
{
    const auto* s = rr.cell("month");
    if (!s) return std::nullopt;
    try {
        return MonthId::parse(*s);
    } catch (const ConfigError&) {
        rr.bad(fmt::format("invalid month '{}'", *s));
        return std::nullopt;
    }
}

} // namespace

LoadResult load_samples(const std::filesystem::path& persons_csv, const std::filesystem::path& households_csv)
{
    LoadResult result;
    csv::Table ht;
    csv::Table pt;
    try {
        ht = csv::read_file(households_csv);
        pt = csv::read_file(persons_csv);
    } catch (const DataError& e) {
        result.findings.emplace_back(e.what());
        return result;
    }
    const auto hname = households_csv.filename().string();
    const auto pname = persons_csv.filename().string();
    require_columns(ht, kHouseholdColumns, hname, result.findings);
    require_columns(pt, kPersonColumns, pname, result.findings);
    if (!result.findings.empty()) return result;

    // (month index, household id) -> household
    std::map<std::pair<int, std::int64_t>, HouseholdRecord> households;
    RowReader hr(ht, hname, result.findings);
    for (std::size_t r = 0; r < ht.rows.size(); ++r) {
        hr.start(r);
        const auto month = month_of(hr);
        HouseholdRecord h;
        h.household_id = HouseholdId{hr.number<std::int64_t>("household_id", 0)};
        if (const auto st = hr.code("state", parse_state, "state", false)) h.state = *st;
        h.n_children_0_4 = hr.number<int>("n_children_0_4", 0);
        h.n_children_5_14 = hr.number<int>("n_children_5_14", 0);
        h.housing_cost = hr.number<double>("housing_cost", 0.0);
        h.childcare_cost = hr.number<double>("childcare_cost", 0.0);
        h.weight = hr.number<double>("weight", 0.0);
        if (!hr.ok() || !month) continue;
        if (h.weight < 0.0) {
            hr.bad("negative weight");
            continue;
        }
        const auto key = std::make_pair(month->index(), raw(h.household_id));
        if (!households.emplace(key, std::move(h)).second) hr.bad("duplicate household id");
    }

    RowReader pr(pt, pname, result.findings);
    std::set<std::pair<int, std::int64_t>> rejected_members;
    for (std::size_t r = 0; r < pt.rows.size(); ++r) {
        pr.start(r);
        const auto month = month_of(pr);
        PersonRecord p;
        p.person_id = PersonId{pr.number<std::int64_t>("person_id", 0)};
        p.household_id = HouseholdId{pr.number<std::int64_t>("household_id", 0)};
        p.age = pr.number<int>("age", 0);
        if (const auto v = pr.code("sex", parse_sex, "sex", false)) p.sex = *v;
        if (const auto v = pr.code("marital", parse_marital, "marital", false)) p.marital = *v;
        p.overseas_born = pr.flag("overseas_born");
        if (const auto v = pr.code("education", parse_education, "education", false)) p.education = *v;
        if (const auto v = pr.code("labour_state", parse_labour_state, "labour_state", false)) p.labour_state = *v;
        p.industry = pr.code("industry", parse_industry, "industry", true);
        p.occupation = pr.code("occupation", parse_occupation, "occupation", true);
        p.usual_hours = pr.number<double>("usual_hours", 0.0);
        p.n_jobs = pr.number<int>("n_jobs", 0);
        p.unemployment_duration = pr.number<double>("unemployment_duration", 0.0);
        p.wage_income = pr.number<double>("wage_income", 0.0, false);
        p.business_income = pr.number<double>("business_income", 0.0, false);
        p.investment_income = pr.number<double>("investment_income", 0.0, false);
        p.other_income = pr.number<double>("other_income", 0.0, false);
        if (const auto* s = pr.cell("welfare_flags")) {
            if (const auto f = parse_flags(*s)) p.welfare_flags = *f;
            else pr.bad(fmt::format("unknown welfare flag in '{}'", *s));
        }
        p.jobkeeper_flag = pr.flag("jobkeeper_flag");
        p.employed_since_baseline_flag = pr.flag("employed_since_baseline_flag");
        if (pr.ok() && month) {
            try {
                validate(p);
            } catch (const DataError& e) {
                pr.bad(e.what());
            }
        }
        if (!pr.ok() || !month) {
            if (month) rejected_members.insert({month->index(), raw(p.household_id)});
            continue;
        }
        const auto it = households.find({month->index(), raw(p.household_id)});
        if (it == households.end()) {
            pr.bad(fmt::format("household {} not found for month {}", raw(p.household_id), month->to_string()));
            continue;
        }
        it->second.members.push_back(p);
    }

    std::map<int, WeightedSample> by_month;
    for (auto& [key, h] : households) {
        std::sort(h.members.begin(), h.members.end(),
                  [](const PersonRecord& a, const PersonRecord& b) { return raw(a.person_id) < raw(b.person_id); });
        try {
            validate(h);
        } catch (const DataError& e) {
            if (h.members.empty() && rejected_members.contains(key)) continue;
            result.findings.push_back(fmt::format("{}: {}", hname, e.what()));
            continue;
        }
        auto& s = by_month[key.first];
        s.month = MonthId::from_index(key.first);
        s.households.push_back(std::move(h));
    }
    for (auto& [m, s] : by_month) result.samples.push_back(std::move(s));
    return result;
}

std::vector<WeightedSample> read_samples(const std::filesystem::path& persons_csv,
                                         const std::filesystem::path& households_csv)
{
    auto r = load_samples(persons_csv, households_csv);
    if (!r.findings.empty()) throw DataError(r.findings.front());
    return std::move(r.samples);
}

void write_samples(const std::vector<WeightedSample>& samples, const std::filesystem::path& persons_csv,
                   const std::filesystem::path& households_csv, WriteOptions options)
{
    csv::Writer hw(kHouseholdColumns);
    auto pcols = kPersonColumns;
    if (options.include_income) pcols.insert(pcols.begin() + 14, kIncomeColumns.begin(), kIncomeColumns.end());
    csv::Writer pw(pcols);
    for (const auto& s : samples) {
        const auto month = s.month.to_string();
        for (const auto& h : s.households) {
            hw.row({month, std::to_string(raw(h.household_id)), std::string(to_code(h.state)),
                    std::to_string(h.n_children_0_4), std::to_string(h.n_children_5_14), csv::num(h.housing_cost),
                    csv::num(h.childcare_cost), csv::num(h.weight)});
            for (const auto& p : h.members) {
                std::vector<std::string> row = {month,
                                                std::to_string(raw(p.person_id)),
                                                std::to_string(raw(p.household_id)),
                                                std::to_string(p.age),
                                                std::string(to_code(p.sex)),
                                                std::string(to_code(p.marital)),
                                                p.overseas_born ? "1" : "0",
                                                std::string(to_code(p.education)),
                                                std::string(to_code(p.labour_state)),
                                                p.industry ? std::string(to_code(*p.industry)) : std::string(),
                                                p.occupation ? std::string(to_code(*p.occupation)) : std::string(),
                                                csv::num(p.usual_hours),
                                                std::to_string(p.n_jobs),
                                                csv::num(p.unemployment_duration)};
                if (options.include_income) {
                    row.push_back(csv::num(p.wage_income));
                    row.push_back(csv::num(p.business_income));
                    row.push_back(csv::num(p.investment_income));
                    row.push_back(csv::num(p.other_income));
                }
                row.push_back(format_flags(p.welfare_flags));
                row.push_back(p.jobkeeper_flag ? "1" : "0");
                row.push_back(p.employed_since_baseline_flag ? "1" : "0");
                pw.row(std::move(row));
            }
        }
    }
    hw.save(households_csv);
    pw.save(persons_csv);
}

} // namespace nowcast::io
