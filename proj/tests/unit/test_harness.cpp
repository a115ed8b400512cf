#include "avlab/harness.hpp"

#include <filesystem>

#include "doctest.h"
#include "json.hpp"

using namespace avlab;
namespace fs = std::filesystem;

namespace {

const char* kZeroConfig = R"({
  "scenario": {"name": "zero"},
  "beam": {"nodes_per_axis": 5},
  "ladders": {"alpha": [0.2, 0.1, 0.05], "rapidity": [3.0], "time": [0.5, 1.0], "time_unit": "lab"},
  "reference": {"alpha": 0.1, "rapidity": 3.0, "time": 0.5},
  "fluid": {"curve_time": 0.2},
  "seed": 3
})";

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("avlab_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE("harness") {
    TEST_CASE("zero-field scan passes every executed check") {
        const auto r = run_scan(parse_config(kZeroConfig));
        CHECK(r.comparison.rows.size() == 6);
        CHECK(r.fluid.rows.size() == 3);
        for (const auto& c : r.checks) {
            INFO(c.name << ": " << c.note);
            CHECK(c.status != CheckStatus::fail);
        }
        for (std::size_t i = 0; i < r.comparison.rows.size(); ++i) {
            CHECK(r.comparison.cell(i, "status") == "ok");
            CHECK(r.comparison.number(i, "position_gap") == 0.0);
        }
        CHECK(exit_code(r) == 0);

        const auto m = nlohmann::json::parse(manifest_json(r));
        CHECK(m["schema_version"] == kSchemaVersion);
        CHECK(m["checks"].size() == r.checks.size());
        const std::string text = summary_text(r);
        for (const auto& c : r.checks) CHECK(text.find(c.name) != std::string::npos);
    }

    TEST_CASE("scans are deterministic and independent of the thread count") {
        auto c1 = parse_config(kZeroConfig);
        auto c2 = c1;
        c2.threads = 3;
        const auto a = run_scan(c1), b = run_scan(c2);
        CHECK(write_csv(a.comparison) == write_csv(b.comparison));
        CHECK(write_csv(a.fluid) == write_csv(b.fluid));
        CHECK(manifest_json(a) == manifest_json(b));
        CHECK(a.config_hash == b.config_hash);
    }

    TEST_CASE("report round-trip through a run directory") {
        const auto r = run_scan(parse_config(kZeroConfig));
        const fs::path dir = temp_dir("report");
        emit_report(r, dir.string());
        for (const char* f : {"comparison.csv", "fluid.csv", "manifest.json", "summary.txt"})
            CHECK(fs::exists(dir / f));
        bool pass = false;
        const std::string text = report_run_dir(dir.string(), &pass);
        CHECK(pass);
        CHECK(text == summary_text(r));
        CHECK(read_csv(read_text_file((dir / "comparison.csv").string())) == r.comparison);

        // A table that disagrees with the manifest is rejected.
        write_text_file((dir / "fluid.csv").string(), "x\n1\n");
        CHECK_THROWS(report_run_dir(dir.string()));
        CHECK_THROWS(report_run_dir((dir / "missing").string()));
        fs::remove_all(dir);
    }

    TEST_CASE("failed checks set the exit code, skipped ones do not") {
        ScanResult r;
        CheckResult c;
        c.status = CheckStatus::skipped;
        r.checks.push_back(c);
        CHECK(exit_code(r) == 0);
        c.status = CheckStatus::fail;
        r.checks.push_back(c);
        CHECK(exit_code(r) == 1);
    }
}
