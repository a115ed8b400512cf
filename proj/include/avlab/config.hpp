#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "avlab/distribution.hpp"
#include "avlab/integrator.hpp"

namespace avlab {

enum class MomentMode { transported, frozen };
enum class TimeUnit { gyro_period, lab };
enum class ScanGrid { star, full };

struct FluidConfig {
    bool enabled = true;
    double time = 0.0;             // lab time of the probe slice
    double h_over_alpha = 0.25;    // stencil step h = h_over_alpha·α
    int order = 2;                 // finite-difference order of the residual stencils
    std::vector<std::vector<double>> points{{0.0, 0.0, 0.0}};  // spatial probe positions
    int random_points = 0;         // extra probe positions drawn with the run seed
    double random_radius = 5.0;    // inside the slab core
    double curve_time = 0.5;       // integral-curve horizon (lab time after the slice)
};

struct ScanConfig {
    std::string scenario = "uniform_b";
    std::map<std::string, double> field_params;
    int dim = 4;

    ProfileKind profile = ProfileKind::bump;
    double skew = 0.3;
    std::vector<double> direction{1.0, 0.0, 0.0};
    std::vector<double> skew_direction;  // empty: first axis orthogonal to the beam
    int nodes_per_axis = 9;
    double gaussian_sigma = 0.35;
    double slab_half_width = 50.0;
    double slab_edge = 5.0;

    std::vector<double> alphas{0.4, 0.2, 0.1, 0.05};
    std::vector<double> rapidities{1.5, 2.3, 3.0, 3.7};
    std::vector<double> times{0.5, 1.0, 2.0, 4.0};
    TimeUnit time_unit = TimeUnit::gyro_period;
    double alpha_ref = 0.1;
    double rapidity_ref = 3.0;
    double time_ref = 0.5;  // in time_unit; must be on the time ladder
    ScanGrid grid = ScanGrid::star;

    // Test-particle offset inside the initial support: rest-frame displacement of the initial velocity
    // from the profile centre, as a fraction of the profile radius, along probe_direction.
    double probe_offset = 0.5;
    std::vector<double> probe_direction;  // empty: skew direction

    IntegratorOptions integ;
    MomentMode moments = MomentMode::transported;
    double sample_dt = 0.01;
    std::size_t max_rhs_evals = 60'000;

    FluidConfig fluid;

    // Regime limits (cells with α ≥ alpha_max_regime or E ≤ energy_min_regime are out of regime).
    double alpha_regime = 0.5;
    double energy_regime = 2.0;
    double theta_flag = 0.1;

    std::string output_dir = "runs/out";
    std::uint64_t seed = 1;
    int threads = 1;

    std::string canonical;  // normalized JSON text the config hash is taken over
};

// Strict JSON reader: unknown keys, wrong types and invalid ladders are errors.
ScanConfig parse_config(const std::string& json_text);
ScanConfig load_config(const std::string& path);
std::string to_json(const ScanConfig& c);

// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

std::string to_string(TimeUnit u);
std::string to_string(MomentMode m);

}  // namespace avlab
