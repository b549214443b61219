#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "spiralseg/grid.hpp"

namespace spiralseg {

/**
 * Boundary traces of h species on the unit circle.
 *
 * The total trace phi = sum_i phi_i is a nonnegative 2*pi-periodic profile
 * whose zeros split the circle into h arcs. Species 0 owns the arc that
 * contains theta = 0 (or starts there), the others follow counterclockwise;
 * phi_i equals phi on its own arc and vanishes elsewhere.
 */
class TraceSpec {
public:
    /// `zeros` must hold exactly h distinct angles; they are reduced to [0, 2*pi) and sorted.
    TraceSpec(int h, std::function<double(double)> profile, std::vector<double> zeros);

    int h() const { return h_; }
    const std::vector<double>& zeros() const { return zeros_; }

    double total(double theta) const;
    /// Index of the species owning theta.
    int owner(double theta) const;
    double value(int species, double theta) const;
    /// [start, end) of the arc owned by `species`, with end > start (end may exceed 2*pi).
    std::pair<double, double> arc(int species) const;

private:
    int h_;
    std::function<double(double)> profile_;
    std::vector<double> zeros_;
    int first_arc_ = 0;  // index into zeros_ of the arc that belongs to species 0
};

/// |cos(h theta / 2)| split at its zeros theta = pi/h + 2*pi*m/h.
TraceSpec make_sector_traces(int h);

/// Piecewise-linear periodic profile through (theta, value) samples; its zeros
/// are the samples with value exactly 0.
TraceSpec make_table_traces(int h, std::vector<std::pair<double, double>> table);

/// Per-species boundary rows sampled at the grid angles.
std::vector<std::vector<double>> sample_traces(const TraceSpec& spec, const StripGrid& grid);

struct ZeroSlope {
    double theta = 0.0;
    double slope = 0.0;  // smaller one-sided quotient phi / |theta - theta0| at the finest offset
};

struct NondegeneracyReport {
    bool ok = true;
    double min_slope = 0.0;
    std::vector<ZeroSlope> zeros;
    std::optional<double> failure_theta;
    std::string message;
};

/**
 * Checks that every zero of the total trace is non-degenerate: the one-sided
 * quotients phi(theta0 +- d) / d stay above c_min for d = gap/4, gap/8, ...
 * (`samples` halvings, gap = smallest distance between zeros). The profile is
 * also scanned on 64*samples*h uniform points for vanishing samples away from
 * the declared zeros (flat arcs).
 */
NondegeneracyReport validate_nondegeneracy(const TraceSpec& spec, int samples, double c_min = 1e-3);

}  // namespace spiralseg
