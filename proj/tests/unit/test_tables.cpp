#include "avlab/tables.hpp"

#include <cmath>
#include <limits>

#include "avlab/harness.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace avlab;

namespace {
std::string random_cell(gen::Rng& r) {
    static const std::string alphabet = "ab,\"\n\r x1.-";
    std::string s;
    const int len = static_cast<int>(r() % 8);
    for (int i = 0; i < len; ++i) s += alphabet[r() % alphabet.size()];
    return s;
}
}  // namespace

TEST_SUITE("tables") {
    TEST_CASE("doubles round-trip through their text form") {
        gen::Rng rng(91);
        for (int k = 0; k < 2000; ++k) {
            const double v = std::ldexp(gen::uniform(rng, -1, 1), static_cast<int>(rng() % 200) - 100);
            CHECK(parse_double(format_double(v)) == v);
        }
        CHECK(format_double(std::nan("")) == "nan");
        CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
        CHECK(parse_double("-inf") == -std::numeric_limits<double>::infinity());
        CHECK(format_double(0.1) == "0.1");
        CHECK_THROWS_AS(parse_double("1.0x"), std::invalid_argument);
        CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
    }

    TEST_CASE("CSV round-trip with quoting") {
        gen::Rng rng(92);
        for (int k = 0; k < 300; ++k) {
            Table t;
            const int nc = 1 + static_cast<int>(rng() % 5), nr = static_cast<int>(rng() % 6);
            for (int c = 0; c < nc; ++c) t.columns.push_back("c" + std::to_string(c) + random_cell(rng));
            for (int r = 0; r < nr; ++r) {
                std::vector<std::string> row;
                for (int c = 0; c < nc; ++c) row.push_back(random_cell(rng));
                t.rows.push_back(row);
            }
            CHECK(read_csv(write_csv(t)) == t);
        }
    }

    TEST_CASE("malformed CSV is rejected") {
        CHECK_THROWS(read_csv("a,b\n1,2,3\n"));
        CHECK_THROWS(read_csv("a,b\n\"1,2\n"));
        Table t;
        t.columns = {"a"};
        t.rows = {{"1", "2"}};
        CHECK_THROWS(write_csv(t));
    }

    TEST_CASE("rows are keyed by column") {
        Table t;
        t.columns = {"name", "x", "flag"};
        Row r(t);
        r.set("name", "beam").set("x", 0.25).set("flag", true);
        t.rows.push_back(r.cells());
        CHECK(t.cell(0, "name") == "beam");
        CHECK(t.number(0, "x") == 0.25);
        CHECK(t.cell(0, "flag") == "1");
        CHECK(t.column("missing") == -1);
        CHECK_THROWS_AS(r.set("missing", 1.0), std::out_of_range);
        Row unset(t);
        CHECK(unset.cells()[1] == "nan");
    }

    TEST_CASE("empty result tables still carry the schema header") {
        Table c;
        c.columns = comparison_columns();
        const auto back = read_csv(write_csv(c));
        CHECK(back.columns == comparison_columns());
        CHECK(back.rows.empty());
        Table f;
        f.columns = fluid_columns();
        CHECK(read_csv(write_csv(f)).columns == fluid_columns());
    }
}
