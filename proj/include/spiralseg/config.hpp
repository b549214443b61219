#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spiralseg/competition.hpp"
#include "spiralseg/grid.hpp"
#include "spiralseg/segregation.hpp"
#include "spiralseg/solver.hpp"
#include "spiralseg/spiral.hpp"
#include "spiralseg/traces.hpp"

namespace spiralseg {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CheckTolerances {
    double alpha_rel = 0.20;       // relative, when the predicted alpha is nonzero
    double alpha_abs = 0.05;       // absolute, when it is zero
    double alpha_spread = 0.05;    // max |alpha_fit(pair) - mean|, relative to max(|alpha|, 1)
    double nu_rel = 0.10;
    double angle_deg = 5.0;
    double overlap_max = 1e-4;
    double overlap_slack = 0.05;
    double sign_defect_max = 1e-6;
    double window_change = 0.05;   // alpha/nu re-fit on the check window
    double origin_cells = 3.0;
};

/**
 * Flat key = value experiment description. Lines starting with '#' are
 * comments. A `preset` key loads fig1a / fig1b / fig1c first; later keys
 * override it.
 */
struct ExperimentConfig {
    std::string name = "custom";
    int h = 3;
    std::string matrix = "symmetric";  // "symmetric[:v]", "cyclic:c" or k*k comma-separated entries
    std::string trace_table;           // optional CSV (theta, value), one period
    int n_theta = 512;
    int n_y = 512;
    double y_max = 8.0;
    std::vector<double> beta_schedule = default_beta_schedule();
    RelaxOptions relax{1e-8, 1e-10, 20000, 1.5, 200};
    PresenceOptions presence;
    FitWindow fit_window{2.0, 6.0};
    FitWindow check_window{3.0, 5.0};
    bool clip_windows = true;      // cut windows at the top of the unsegregated core
    double min_window_span = 1.0;  // a clipped window is extended downward to this span
    double angle_row = 2.0;
    CheckTolerances tolerances;
    std::string output = "out";

    CompetitionMatrix build_matrix() const;
    TraceSpec build_traces() const;
    StripGrid build_grid() const;
    /// Throws ConfigError on any inconsistency (bad matrix, grid, schedule, windows).
    void validate() const;
};

std::vector<std::string> preset_names();
ExperimentConfig preset_config(const std::string& name);

/// Applies one key = value pair; throws ConfigError for unknown keys or bad values.
void apply_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

ExperimentConfig load_config(const std::filesystem::path& path);

/// "512x512" -> (512, 512).
std::pair<int, int> parse_grid_size(const std::string& text);

std::string describe(const ExperimentConfig& cfg);

}  // namespace spiralseg
