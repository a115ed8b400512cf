#include "avlab/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace avlab {

using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(keys.begin(), keys.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError("unknown config key '" + where + "." + it.key() + "'");
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(num(j[i], where + "[" + std::to_string(i) + "]"));
    return v;
}

std::string str(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

void check_ladder(const std::vector<double>& v, const std::string& name) {
    if (v.empty()) throw ConfigError("ladders." + name + " must be nonempty");
    bool inc = true, dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        inc = inc && v[i] > v[i - 1];
        dec = dec && v[i] < v[i - 1];
    }
    if (!inc && !dec) throw ConfigError("ladders." + name + " must be strictly monotone");
}

bool contains(const std::vector<double>& v, double x) {
    for (double a : v)
        if (a == x) return true;
    return false;
}

}  // namespace

std::string to_string(TimeUnit u) { return u == TimeUnit::gyro_period ? "gyro_period" : "lab"; }
std::string to_string(MomentMode m) { return m == MomentMode::transported ? "transported" : "frozen"; }

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ScanConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ScanConfig c;
    allow_keys(root, "config", {"scenario", "beam", "ladders", "reference", "grid", "probe", "integrator", "moments",
                                "fluid", "regime", "output", "seed", "threads"});
    if (root.contains("scenario")) {
        const json& s = root["scenario"];
        allow_keys(s, "scenario", {"name", "params", "dim"});
        if (s.contains("name")) c.scenario = str(s["name"], "scenario.name");
        if (s.contains("dim")) c.dim = integer(s["dim"], "scenario.dim");
        if (s.contains("params")) {
            if (!s["params"].is_object()) throw ConfigError("scenario.params: expected an object");
            for (auto it = s["params"].begin(); it != s["params"].end(); ++it)
                c.field_params[it.key()] = num(it.value(), "scenario.params." + it.key());
        }
    }
    if (root.contains("beam")) {
        const json& b = root["beam"];
        allow_keys(b, "beam", {"profile", "skew", "direction", "skew_direction", "nodes_per_axis", "gaussian_sigma",
                               "slab_half_width", "slab_edge"});
        if (b.contains("profile")) {
            const std::string p = str(b["profile"], "beam.profile");
            if (p == "bump") c.profile = ProfileKind::bump;
            else if (p == "truncated_gaussian") c.profile = ProfileKind::truncated_gaussian;
            else throw ConfigError("beam.profile must be 'bump' or 'truncated_gaussian'");
        }
        if (b.contains("skew")) c.skew = num(b["skew"], "beam.skew");
        if (b.contains("direction")) c.direction = numbers(b["direction"], "beam.direction");
        if (b.contains("skew_direction")) c.skew_direction = numbers(b["skew_direction"], "beam.skew_direction");
        if (b.contains("nodes_per_axis")) c.nodes_per_axis = integer(b["nodes_per_axis"], "beam.nodes_per_axis");
        if (b.contains("gaussian_sigma")) c.gaussian_sigma = num(b["gaussian_sigma"], "beam.gaussian_sigma");
        if (b.contains("slab_half_width")) c.slab_half_width = num(b["slab_half_width"], "beam.slab_half_width");
        if (b.contains("slab_edge")) c.slab_edge = num(b["slab_edge"], "beam.slab_edge");
    }
    if (root.contains("ladders")) {
        const json& l = root["ladders"];
        allow_keys(l, "ladders", {"alpha", "rapidity", "time", "time_unit"});
        if (l.contains("alpha")) c.alphas = numbers(l["alpha"], "ladders.alpha");
        if (l.contains("rapidity")) c.rapidities = numbers(l["rapidity"], "ladders.rapidity");
        if (l.contains("time")) c.times = numbers(l["time"], "ladders.time");
        if (l.contains("time_unit")) {
            const std::string u = str(l["time_unit"], "ladders.time_unit");
            if (u == "gyro_period") c.time_unit = TimeUnit::gyro_period;
            else if (u == "lab") c.time_unit = TimeUnit::lab;
            else throw ConfigError("ladders.time_unit must be 'gyro_period' or 'lab'");
        }
    }
    bool ref_time_given = false;
    if (root.contains("reference")) {
        const json& r = root["reference"];
        allow_keys(r, "reference", {"alpha", "rapidity", "time"});
        if (r.contains("alpha")) c.alpha_ref = num(r["alpha"], "reference.alpha");
        if (r.contains("rapidity")) c.rapidity_ref = num(r["rapidity"], "reference.rapidity");
        if (r.contains("time")) {
            c.time_ref = num(r["time"], "reference.time");
            ref_time_given = true;
        }
    }
    if (!ref_time_given && !c.times.empty()) c.time_ref = c.times.front();
    if (root.contains("grid")) {
        const std::string g = str(root["grid"], "grid");
        if (g == "star") c.grid = ScanGrid::star;
        else if (g == "full") c.grid = ScanGrid::full;
        else throw ConfigError("grid must be 'star' or 'full'");
    }
    if (root.contains("probe")) {
        const json& p = root["probe"];
        allow_keys(p, "probe", {"offset", "direction"});
        if (p.contains("offset")) c.probe_offset = num(p["offset"], "probe.offset");
        if (p.contains("direction")) c.probe_direction = numbers(p["direction"], "probe.direction");
    }
    if (root.contains("integrator")) {
        const json& i = root["integrator"];
        allow_keys(i, "integrator", {"rtol", "atol", "dt0", "max_steps"});
        if (i.contains("rtol")) c.integ.rtol = num(i["rtol"], "integrator.rtol");
        if (i.contains("atol")) c.integ.atol = num(i["atol"], "integrator.atol");
        if (i.contains("dt0")) c.integ.dt0 = num(i["dt0"], "integrator.dt0");
        if (i.contains("max_steps")) c.integ.max_steps = static_cast<std::size_t>(integer(i["max_steps"], "integrator.max_steps"));
    }
    if (root.contains("moments")) {
        const json& m = root["moments"];
        allow_keys(m, "moments", {"mode", "sample_dt", "max_rhs_evals"});
        if (m.contains("mode")) {
            const std::string s = str(m["mode"], "moments.mode");
            if (s == "transported") c.moments = MomentMode::transported;
            else if (s == "frozen") c.moments = MomentMode::frozen;
            else throw ConfigError("moments.mode must be 'transported' or 'frozen'");
        }
        if (m.contains("sample_dt")) c.sample_dt = num(m["sample_dt"], "moments.sample_dt");
        if (m.contains("max_rhs_evals")) c.max_rhs_evals = static_cast<std::size_t>(integer(m["max_rhs_evals"], "moments.max_rhs_evals"));
    }
    if (root.contains("fluid")) {
        const json& f = root["fluid"];
        allow_keys(f, "fluid", {"enabled", "time", "h_over_alpha", "order", "points", "random_points", "random_radius",
                                "curve_time"});
        if (f.contains("enabled")) {
            if (!f["enabled"].is_boolean()) throw ConfigError("fluid.enabled: expected a boolean");
            c.fluid.enabled = f["enabled"].get<bool>();
        }
        if (f.contains("time")) c.fluid.time = num(f["time"], "fluid.time");
        if (f.contains("h_over_alpha")) c.fluid.h_over_alpha = num(f["h_over_alpha"], "fluid.h_over_alpha");
        if (f.contains("order")) c.fluid.order = integer(f["order"], "fluid.order");
        if (f.contains("points")) {
            if (!f["points"].is_array()) throw ConfigError("fluid.points: expected an array");
            c.fluid.points.clear();
            for (std::size_t i = 0; i < f["points"].size(); ++i)
                c.fluid.points.push_back(numbers(f["points"][i], "fluid.points[" + std::to_string(i) + "]"));
        }
        if (f.contains("random_points")) c.fluid.random_points = integer(f["random_points"], "fluid.random_points");
        if (f.contains("random_radius")) c.fluid.random_radius = num(f["random_radius"], "fluid.random_radius");
        if (f.contains("curve_time")) c.fluid.curve_time = num(f["curve_time"], "fluid.curve_time");
    }
    if (root.contains("regime")) {
        const json& r = root["regime"];
        allow_keys(r, "regime", {"alpha_max", "energy_min", "theta_flag"});
        if (r.contains("alpha_max")) c.alpha_regime = num(r["alpha_max"], "regime.alpha_max");
        if (r.contains("energy_min")) c.energy_regime = num(r["energy_min"], "regime.energy_min");
        if (r.contains("theta_flag")) c.theta_flag = num(r["theta_flag"], "regime.theta_flag");
    }
    if (root.contains("output")) {
        const json& o = root["output"];
        allow_keys(o, "output", {"dir"});
        if (o.contains("dir")) c.output_dir = str(o["dir"], "output.dir");
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
        c.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("threads")) c.threads = integer(root["threads"], "threads");

    // Validation.
    check_ladder(c.alphas, "alpha");
    check_ladder(c.rapidities, "rapidity");
    check_ladder(c.times, "time");
    for (double a : c.alphas)
        if (!(a > 0.0 && a <= 1.0)) throw ConfigError("ladders.alpha entries must lie in (0, 1]");
    for (double r : c.rapidities)
        if (!(r >= 0.0)) throw ConfigError("ladders.rapidity entries must be nonnegative");
    for (double t : c.times)
        if (!(t > 0.0)) throw ConfigError("ladders.time entries must be positive");
    if (!contains(c.alphas, c.alpha_ref)) throw ConfigError("reference.alpha must be on the alpha ladder");
    if (!contains(c.rapidities, c.rapidity_ref)) throw ConfigError("reference.rapidity must be on the rapidity ladder");
    if (!contains(c.times, c.time_ref)) throw ConfigError("reference.time must be on the time ladder");
    if (!(c.integ.rtol > 0.0) || !(c.integ.atol > 0.0) || !(c.integ.dt0 > 0.0) || c.integ.max_steps == 0)
        throw ConfigError("integrator tolerances and steps must be positive");
    if (!(c.sample_dt > 0.0)) throw ConfigError("moments.sample_dt must be positive");
    if (c.nodes_per_axis < 2) throw ConfigError("beam.nodes_per_axis must be at least 2");
    if (!(std::abs(c.skew) < 1.0)) throw ConfigError("beam.skew must satisfy |skew| < 1");
    if (c.dim != 2 && c.dim != 4) throw ConfigError("scenario.dim must be 2 or 4");
    if (static_cast<int>(c.direction.size()) != c.dim - 1) throw ConfigError("beam.direction has the wrong length");
    if (!c.skew_direction.empty() && static_cast<int>(c.skew_direction.size()) != c.dim - 1)
        throw ConfigError("beam.skew_direction has the wrong length");
    if (!c.probe_direction.empty() && static_cast<int>(c.probe_direction.size()) != c.dim - 1)
        throw ConfigError("probe.direction has the wrong length");
    if (!(c.probe_offset >= 0.0 && c.probe_offset < 1.0)) throw ConfigError("probe.offset must lie in [0, 1)");
    if (c.fluid.order != 2 && c.fluid.order != 4) throw ConfigError("fluid.order must be 2 or 4");
    if (!(c.fluid.h_over_alpha > 0.0)) throw ConfigError("fluid.h_over_alpha must be positive");
    if (!(c.fluid.time >= 0.0)) throw ConfigError("fluid.time must be nonnegative");
    if (!(c.fluid.curve_time >= 0.0)) throw ConfigError("fluid.curve_time must be nonnegative");
    if (c.fluid.random_points < 0) throw ConfigError("fluid.random_points must be nonnegative");
    for (const auto& p : c.fluid.points)
        if (static_cast<int>(p.size()) != c.dim - 1) throw ConfigError("fluid.points entries have the wrong length");
    if (c.threads < 1) throw ConfigError("threads must be at least 1");
    if (!(c.alpha_regime > 0.0) || !(c.theta_flag > 0.0)) throw ConfigError("regime limits must be positive");
    c.canonical = to_json(c);
    return c;
}

ScanConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const ScanConfig& c) {
    json j;
    j["scenario"] = {{"name", c.scenario}, {"dim", c.dim}, {"params", json::object()}};
    for (const auto& [k, v] : c.field_params) j["scenario"]["params"][k] = v;
    j["beam"] = {{"profile", c.profile == ProfileKind::bump ? "bump" : "truncated_gaussian"},
                 {"skew", c.skew},
                 {"direction", c.direction},
                 {"skew_direction", c.skew_direction},
                 {"nodes_per_axis", c.nodes_per_axis},
                 {"gaussian_sigma", c.gaussian_sigma},
                 {"slab_half_width", c.slab_half_width},
                 {"slab_edge", c.slab_edge}};
    j["ladders"] = {{"alpha", c.alphas}, {"rapidity", c.rapidities}, {"time", c.times},
                    {"time_unit", to_string(c.time_unit)}};
    j["reference"] = {{"alpha", c.alpha_ref}, {"rapidity", c.rapidity_ref}, {"time", c.time_ref}};
    j["grid"] = c.grid == ScanGrid::star ? "star" : "full";
    j["probe"] = {{"offset", c.probe_offset}, {"direction", c.probe_direction}};
    j["integrator"] = {{"rtol", c.integ.rtol}, {"atol", c.integ.atol}, {"dt0", c.integ.dt0},
                       {"max_steps", c.integ.max_steps}};
    j["moments"] = {{"mode", to_string(c.moments)}, {"sample_dt", c.sample_dt}, {"max_rhs_evals", c.max_rhs_evals}};
    j["fluid"] = {{"enabled", c.fluid.enabled},
                  {"time", c.fluid.time},
                  {"h_over_alpha", c.fluid.h_over_alpha},
                  {"order", c.fluid.order},
                  {"points", c.fluid.points},
                  {"random_points", c.fluid.random_points},
                  {"random_radius", c.fluid.random_radius},
                  {"curve_time", c.fluid.curve_time}};
    j["regime"] = {{"alpha_max", c.alpha_regime}, {"energy_min", c.energy_regime}, {"theta_flag", c.theta_flag}};
    j["output"] = {{"dir", c.output_dir}};
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    return j.dump(2);
}

}  // namespace avlab
