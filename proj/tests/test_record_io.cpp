#include "support.hpp"

#include "nowcast/csv.hpp"
#include "nowcast/error.hpp"
#include "nowcast/record_io.hpp"
#include "nowcast/synthpop.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nowcast;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name)
{
    const auto dir = fs::temp_directory_path() / "nowcast_test_record_io" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

} // namespace

TEST_CASE("csv parsing handles quotes, embedded commas and CRLF")
{
    const auto t = csv::parse("a,b,c\r\n1,\"x, y\",\"say \"\"hi\"\"\"\r\n2,,z\n");
    REQUIRE(t.header.size() == 3);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x, y");
    CHECK(t.rows[0][2] == "say \"hi\"");
    CHECK(t.rows[1][1].empty());
    CHECK(t.column("c") == 2u);
    CHECK_FALSE(t.column("d"));
}

TEST_CASE("csv writer quotes only when needed and numbers round-trip")
{
    csv::Writer w({"name", "value"});
    w.row({"plain", csv::num(0.1)});
    w.row({"with,comma", csv::num(1.0 / 3.0)});
    const auto t = csv::parse(w.str());
    CHECK(t.rows[1][0] == "with,comma");
    CHECK(std::stod(t.rows[1][1]) == 1.0 / 3.0);
    CHECK(csv::num(0.1) == "0.1");
    CHECK(csv::fixed(2.5, 2) == "2.50");
    CHECK_THROWS(w.row({"too", "many", "cells"}));
}

TEST_CASE("synthetic samples survive a write/read round trip exactly")
{
    SynthConfig cfg;
    cfg.n_households = 200;
    const auto survey = gen_baseline_survey(cfg);
    const auto dir = scratch("roundtrip");
    io::write_samples({survey}, dir / "p.csv", dir / "h.csv");
    const auto back = io::read_samples(dir / "p.csv", dir / "h.csv");
    REQUIRE(back.size() == 1);
    REQUIRE(back[0].households.size() == survey.households.size());
    for (std::size_t i = 0; i < survey.households.size(); ++i) {
        const auto& a = survey.households[i];
        const auto& b = back[0].households[i];
        CHECK(a.household_id == b.household_id);
        CHECK(a.weight == b.weight);
        CHECK(a.housing_cost == b.housing_cost);
        REQUIRE(a.members.size() == b.members.size());
        for (std::size_t j = 0; j < a.members.size(); ++j) {
            CHECK(a.members[j].wage_income == b.members[j].wage_income);
            CHECK(a.members[j].investment_income == b.members[j].investment_income);
            CHECK(a.members[j].industry == b.members[j].industry);
            CHECK(a.members[j].welfare_flags == b.members[j].welfare_flags);
        }
    }
    io::write_samples(back, dir / "p2.csv", dir / "h2.csv");
    CHECK(slurp(dir / "p.csv") == slurp(dir / "p2.csv"));
    CHECK(slurp(dir / "h.csv") == slurp(dir / "h2.csv"));
}

TEST_CASE("panel files omit income columns and read back with zero incomes")
{
    SynthConfig cfg;
    cfg.n_households = 50;
    const auto survey = gen_baseline_survey(cfg);
    const auto dir = scratch("panel");
    io::write_samples({survey}, dir / "p.csv", dir / "h.csv", {.include_income = false});
    const auto t = csv::read_file(dir / "p.csv");
    CHECK_FALSE(t.column("wage_income"));
    const auto back = io::read_samples(dir / "p.csv", dir / "h.csv");
    for (const auto& h : back[0].households)
        for (const auto& p : h.members) CHECK(p.private_income() == 0.0);
}

TEST_CASE("an unknown industry code is reported with its row number")
{
    const auto fixture = test::source_dir() / "tests/fixtures/three_households";
    const auto dir = scratch("bad_row");
    std::string persons = slurp(fixture / "persons.csv");
    const auto pos = persons.find(",G,6,");
    REQUIRE(pos != std::string::npos);
    persons.replace(pos, 5, ",Z,6,");
    spit(dir / "persons.csv", persons);
    fs::copy_file(fixture / "households.csv", dir / "households.csv");

    const auto r = io::load_samples(dir / "persons.csv", dir / "households.csv");
    REQUIRE(r.findings.size() == 1);
    CHECK(r.findings[0] == "persons.csv row 3: unknown industry code 'Z'");
    CHECK_THROWS_WITH_AS(io::read_samples(dir / "persons.csv", dir / "households.csv"),
                         "persons.csv row 3: unknown industry code 'Z'", DataError);
}

TEST_CASE("every problem in a file is collected")
{
    const auto fixture = test::source_dir() / "tests/fixtures/three_households";
    const auto dir = scratch("many");
    std::string persons = slurp(fixture / "persons.csv");
    persons += "2020-04,41,99,30,X,single,0,school,E,G,6,25,1,0,,0,0,100,0,0,0\n";
    persons += "2020-04,42,98,30,M,single,0,school,E,G,6,25,1,0,,0,0,100,0,0,0\n";
    spit(dir / "persons.csv", persons);
    std::string households = slurp(fixture / "households.csv");
    households += "2020-04,5,NSW,0,0,0,0,-2\n";
    spit(dir / "households.csv", households);
    const auto r = io::load_samples(dir / "persons.csv", dir / "households.csv");
    REQUIRE(r.findings.size() == 3);
    CHECK(r.findings[0] == "households.csv row 8: negative weight");
    CHECK(r.findings[1] == "persons.csv row 8: unknown sex code 'X'");
    CHECK(r.findings[2] == "persons.csv row 9: household 98 not found for month 2020-04");
}

TEST_CASE("the worked fixture loads as two monthly samples")
{
    const auto fixture = test::source_dir() / "tests/fixtures/three_households";
    const auto samples = io::read_samples(fixture / "persons.csv", fixture / "households.csv");
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].month == MonthId{2020, 2});
    CHECK(samples[1].month == MonthId{2020, 4});
    CHECK(samples[1].households[1].members[0].jobkeeper_flag);
}
