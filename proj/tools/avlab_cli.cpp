#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "avlab/em_fields.hpp"
#include "avlab/harness.hpp"
#include "avlab/scaling.hpp"
#include "avlab/tables.hpp"

using namespace avlab;

namespace {

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
            std::optional<int> threads) {
    ScanConfig c = load_config(path);
    if (seed) c.seed = *seed;
    if (out) c.output_dir = *out;
    if (threads) {
        if (*threads < 1) throw std::invalid_argument("--threads must be at least 1");
        c.threads = *threads;
    }
    const ScanResult r = run_scan(c);
    emit_report(r, c.output_dir);
    std::cout << summary_text(r) << "outputs written to " << c.output_dir << "\n";
    return exit_code(r);
}

int cmd_fit(const std::string& path, const std::string& quantity, const std::string& abscissa,
            const std::vector<std::string>& where, bool all_cells) {
    const Table t = read_csv(read_text_file(path));
    for (const auto& col : {quantity, abscissa})
        if (t.column(col) < 0) throw std::invalid_argument("table has no column '" + col + "'");
    std::vector<std::pair<std::string, std::string>> filters;
    for (const auto& w : where) {
        const auto eq = w.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--where expects column=value, got '" + w + "'");
        const std::string col = w.substr(0, eq);
        if (t.column(col) < 0) throw std::invalid_argument("table has no column '" + col + "'");
        filters.emplace_back(col, w.substr(eq + 1));
    }
    const bool has_regime = t.column("in_regime") >= 0 && t.column("status") >= 0;
    std::vector<double> x, y;
    int out_of_regime = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        bool keep = true;
        for (const auto& [col, val] : filters) {
            const std::string& cell = t.cell(i, col);
            // Numeric filters compare as numbers so "0.1" matches "0.10".
            try {
                keep = keep && parse_double(cell) == parse_double(val);
            } catch (const std::invalid_argument&) {
                keep = keep && cell == val;
            }
        }
        if (!keep) continue;
        if (!all_cells && has_regime && (t.cell(i, "in_regime") != "1" || t.cell(i, "status") != "ok")) {
            ++out_of_regime;
            continue;
        }
        x.push_back(t.number(i, abscissa));
        y.push_back(t.number(i, quantity));
    }
    const ScalingFit f = fit_scaling(x, y, quantity, abscissa);
    std::cout << "quantity   " << quantity << "\n"
              << "abscissa   " << abscissa << "\n"
              << "points     " << f.count << " (excluded nonpositive " << f.excluded << ", out of regime "
              << out_of_regime << ")\n";
    if (!f.valid) {
        std::cout << "fit invalid: " << f.note << "\n";
        return 1;
    }
    std::cout << "exponent   " << format_double(f.exponent) << "\n"
              << "prefactor  " << format_double(f.prefactor) << "\n"
              << "r2         " << format_double(f.r2) << "\n";
    if (!f.note.empty()) std::cout << "note       " << f.note << "\n";
    return 0;
}

int cmd_report(const std::string& dir) {
    bool pass = false;
    std::cout << report_run_dir(dir, &pass);
    return pass ? 0 : 1;
}

int cmd_list() {
    for (const auto& s : list_scenarios()) {
        std::cout << s.name << "\n  " << s.description << "\n  dims:";
        for (int d : s.dims) std::cout << ' ' << d;
        std::cout << "\n  params:";
        for (const auto& [k, v] : s.defaults) std::cout << ' ' << k << '=' << format_double(v);
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"avlab: averaged Lorentz connection lab"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
    app.add_option("--seed", seed, "Random seed (overrides the config)");
    app.add_option("--out", out, "Output directory (overrides the config)");
    app.add_option("--threads", threads, "Worker threads (overrides the config)");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run a parameter scan from a JSON config");
    run->add_option("config", config_path, "Config file")->required();

    std::string table, quantity, abscissa;
    std::vector<std::string> where;
    bool all_cells = false;
    auto* fit = app.add_subcommand("fit", "Fit a power law to two columns of a result table");
    fit->add_option("table", table, "CSV table")->required();
    fit->add_option("quantity", quantity, "Column fitted as y")->required();
    fit->add_option("abscissa", abscissa, "Column used as x")->required();
    fit->add_option("--where", where, "Row filter column=value (repeatable)");
    fit->add_flag("--all-cells", all_cells, "Keep out-of-regime and failed rows");

    std::string run_dir;
    auto* report = app.add_subcommand("report", "Print the summary of a finished run");
    report->add_option("run-dir", run_dir, "Run directory")->required();

    auto* list = app.add_subcommand("list-scenarios", "List the built-in field scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed, out, threads);
        if (fit->parsed()) return cmd_fit(table, quantity, abscissa, where, all_cells);
        if (report->parsed()) return cmd_report(run_dir);
        if (list->parsed()) return cmd_list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
