#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spiralseg/competition.hpp"
#include "spiralseg/grid.hpp"
#include "spiralseg/solver.hpp"

namespace spiralseg {

struct OverlapMetrics {
    double max_product = 0.0;  // max over i<j of sup |u_i u_j|
    double l2_product = 0.0;   // max over i<j of the disk L2 norm of u_i u_j
    int pair_i = -1;
    int pair_j = -1;
};

OverlapMetrics overlap_metrics(const SystemState& state);

/// u_i - sum_{j != i} (a_ij / a_ji) u_j.
Field hat_field(const SystemState& state, int i, const CompetitionMatrix& a);

/// Which nodes a diagnostic is evaluated on (true = use).
using NodeMask = std::vector<std::uint8_t>;

struct SignDefect {
    double sub = 0.0;        // normalized max (-Lap_disk u_i)_+
    double super = 0.0;      // normalized max (-Lap_disk hat u_i)_-
    double sub_raw = 0.0;    // same, disk units
    double super_raw = 0.0;
};

/**
 * Pointwise check of -Lap u_i <= 0 and -Lap hat u_i >= 0 with the disk
 * Laplacian exp(2y) Lap_strip on interior nodes. The normalized values divide
 * each violation by exp(2y) * D * max|field| (D the stencil diagonal
 * 2/dtheta^2 + 2/dy^2), the units of the relaxation defect.
 */
std::vector<SignDefect> sign_defects(const SystemState& state, const CompetitionMatrix& a,
                                     const NodeMask* mask = nullptr);

struct PresenceOptions {
    double delta = 1e-3;
    /// Threshold is delta times the largest density on the node's own row
    /// (true) or on the whole grid (false).
    bool row_relative = true;
    int rho = 3;  // probe radius in cells
};

struct MultiplicityMap {
    StripGrid grid;
    std::vector<int> m;
    std::vector<std::uint32_t> present;  // bit i set when species i is present near the node
    PresenceOptions options;

    int at(int i, int j) const { return m[grid.index(i, j)]; }
};

MultiplicityMap multiplicity_map(const SystemState& state, const PresenceOptions& options = {});

struct CurvePoint {
    double theta = 0.0;  // unwrapped
    double y = 0.0;
};

struct NodalCurve {
    int i = 0;
    int j = 0;
    std::vector<CurvePoint> points;  // ordered from y = 0 inward
    bool partial = false;
    std::vector<std::vector<CurvePoint>> fragments;  // all pieces when partial
};

/**
 * Zero contour of a_ji u_i - a_ij u_j for every adjacent pair (j = i + 1 mod k),
 * restricted to cells whose corners all see exactly species i and j.
 */
std::vector<NodalCurve> extract_nodal_curves(const SystemState& state, const CompetitionMatrix& a,
                                             const MultiplicityMap& mmap);

/// Adds or subtracts 2*pi so consecutive theta values differ by at most pi.
void unwrap_theta(std::vector<CurvePoint>& points);

struct SingularCluster {
    StripPoint strip_centroid;
    CartesianPoint centroid;
    double extent = 0.0;        // max Cartesian distance between two cluster nodes
    double outer_radius = 0.0;  // max Cartesian distance from the centroid to a cluster node
    int min_row = 0;
    int max_row = 0;
    std::size_t nodes = 0;
};

struct SingularReport {
    std::vector<SingularCluster> clusters;  // largest first
    bool found() const { return !clusters.empty(); }
    bool unique() const { return clusters.size() == 1; }
};

/// Connected components (4-neighbour, theta-periodic) of {m >= 3}.
SingularReport locate_singular_point(const MultiplicityMap& mmap);

/// True when the cluster centroid lies within `cells` grid cells of the origin,
/// a cell at radius r measuring r * max(dtheta, dy).
bool near_origin(const SingularCluster& c, const StripGrid& grid, double cells = 3.0);

/// Mask excluding nodes within outer_radius + rho cells (cell size taken at
/// outer_radius) of every cluster centroid.
NodeMask exclusion_mask(const StripGrid& grid, const SingularReport& report, int rho);

}  // namespace spiralseg
