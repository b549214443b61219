#pragma once

#include <string>
#include <vector>

#include "spiralseg/competition.hpp"
#include "spiralseg/grid.hpp"
#include "spiralseg/solver.hpp"

namespace spiralseg {

struct SelftestResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ConstantsRow {
    std::string preset;  // matrix preset for k = 3
    double lambda = 0.0;
    double alpha = 0.0;
};

/// Expected (lambda, alpha) for the three showcase matrices.
std::vector<ConstantsRow> reference_constants();
SelftestResult check_constants(const std::vector<ConstantsRow>& table, double rel = 1e-12);

/**
 * Three-species segregated state sampled from r^nu |cos(h theta / 2 + alpha y)|,
 * one species per nodal region, species i divided by |weights[i]| so that
 * sum_i w_i u_i has modulus r^nu |cos(...)|.
 */
SystemState synthetic_expansion_state(const StripGrid& grid, int h, double alpha, double nu,
                                      const std::vector<double>& weights);

SelftestResult check_grid_roundtrip();
SelftestResult check_harmonic_order();
SelftestResult check_fourier_roundtrip(int n = 512);
SelftestResult check_synthetic_spiral(int n = 512);
SelftestResult check_synthetic_symmetric(int n = 256);

/// Every synthetic check above, no PDE solves.
std::vector<SelftestResult> run_selftest();

}  // namespace spiralseg
