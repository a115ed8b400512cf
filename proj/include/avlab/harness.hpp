#pragma once

#include <string>
#include <vector>

#include "avlab/config.hpp"
#include "avlab/scaling.hpp"
#include "avlab/tables.hpp"

namespace avlab {

inline constexpr int kSchemaVersion = 1;

std::string code_version();

// Column sets of the two result tables (the versioned schema).
std::vector<std::string> comparison_columns();
std::vector<std::string> fluid_columns();

enum class CheckStatus { pass, fail, skipped };
std::string to_string(CheckStatus s);

struct CheckResult {
    std::string name;
    std::string description;
    std::string quantity;  // measured quantity (exponent, max residual, ...)
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;  // pass iff |measured − target| ≤ tolerance, or measured ≤ target for bounds
    bool upper_bound = false;
    int points = 0;          // rows that entered the check
    CheckStatus status = CheckStatus::skipped;
    std::string note;
};

struct NamedFit {
    std::string check;  // check that consumes the fit
    ScalingFit fit;
};

struct HypothesisCounts {
    int cells = 0;
    int in_regime = 0;
    int energy_ok = 0;       // E > energy limit
    int narrow_ok = 0;       // α < alpha limit
    int adiabatic_ok = 0;    // |d log E/dt| < theta_flag
    int theta_ok = 0;        // |θ² − θ̄²| < theta_flag
    int failed = 0;          // cells whose integration or transport failed
};

struct ScanResult {
    ScanConfig config;
    std::string config_hash;
    Table comparison;
    Table fluid;
    std::vector<NamedFit> fits;
    std::vector<CheckResult> checks;
    HypothesisCounts hypotheses;
    double bound_constant = 0.0;  // C(K): largest rhs/α² over in-regime fluid rows
};

// Runs every cell of the configured ladders; per-cell failures are recorded and the scan continues.
ScanResult run_scan(const ScanConfig& config);

// Checks and fits from the two tables (used by run_scan; exposed for tests).
void evaluate_checks(ScanResult& r);

std::string manifest_json(const ScanResult& r);
std::string summary_text(const ScanResult& r);

// Writes comparison.csv, fluid.csv, manifest.json and summary.txt into dir (created if needed).
void emit_report(const ScanResult& r, const std::string& dir);

// Summary reconstructed from a run directory; throws if the manifest is missing or malformed.
std::string report_run_dir(const std::string& dir, bool* all_pass = nullptr);

// 0 iff every executed (non-skipped) check passed.
int exit_code(const ScanResult& r);

}  // namespace avlab
