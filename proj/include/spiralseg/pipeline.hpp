#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spiralseg/config.hpp"
#include "spiralseg/segregation.hpp"
#include "spiralseg/spectral.hpp"
#include "spiralseg/spiral.hpp"

namespace spiralseg {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double limit = 0.0;
    std::string detail;
};

struct AnalysisReport {
    double beta = 0.0;
    SpectralConstants constants;
    OverlapMetrics overlap;
    double overlap_normalized = 0.0;       // max |u_i u_j| / (trace max)^2
    std::vector<double> overlap_trajectory;
    std::vector<double> beta_trajectory;
    std::vector<SignDefect> sign;
    SingularReport singular;
    bool center_at_origin = true;
    CartesianPoint center;
    std::vector<NodalCurve> curves;
    FitWindow fit_window;                  // windows after clipping
    FitWindow check_window;
    double core_top = -1.0;                // y where the unsegregated core starts, -1 if none
    std::vector<SpiralFit> fits;           // fit window
    std::vector<SpiralFit> check_fits;     // check window
    double alpha_fit = 0.0;                // mean over pairs
    double alpha_check = 0.0;
    OrderFit order;
    OrderFit order_check;
    OrderFit order_unclipped;              // configured fit window, core included
    bool has_order_unclipped = false;
    AmplitudeProfile amplitude;
    AngleCheck angles;
    std::size_t ambiguous_nodes = 0;
    PresenceOptions presence;
    int h = 0;
    std::vector<std::string> warnings;
    std::vector<CheckResult> checks;

    bool passed() const;
    const CheckResult* check(const std::string& name) const;
};

/// Segregation diagnostics and spiral/order fits for one state. When the full
/// sweep is given, the overlap trend check covers it.
AnalysisReport analyze(const SystemState& state, const CompetitionMatrix& a, const ExperimentConfig& cfg,
                       const std::vector<SystemState>* trajectory = nullptr);

/// Writes fits.csv, checks.csv, summary.txt, curves.csv, constants.csv and PGM maps into dir.
void write_report(const AnalysisReport& report, const SystemState& state, const std::filesystem::path& dir);

std::string format_summary(const AnalysisReport& report);

}  // namespace spiralseg
