#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spiralseg/grid.hpp"

namespace spiralseg {

struct ScreenedOptions {
    /// Stop when max |residual| / D <= tolerance * scale, where D = 2/dtheta^2 + 2/dy^2
    /// and scale is the largest |boundary value| (1 if all boundary data vanish).
    double tolerance = 1e-10;
    int max_cycles = 200;
    /// Project onto u >= 0 after convergence (valid when the boundary data are >= 0).
    bool nonnegative = false;
};

struct ScreenedStats {
    int cycles = 0;
    double residual = 0.0;  // final scaled residual
    std::vector<double> history;
};

class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const { return history_; }

private:
    std::vector<double> history_;
};

/**
 * Multigrid solver for (-Lap_strip + q) u = 0 on a StripGrid, with Dirichlet
 * rows j = 0 and j = n_y - 1 taken from the initial iterate.
 *
 * The hierarchy coarsens in theta only (n_theta halves, rows are kept) and
 * smooths with zebra y-line Gauss-Seidel. Interpolation weights come from the
 * operator (stencil collapsed along y), so corrections do not leak into
 * columns where the potential is large; coarse operators are Galerkin
 * products and the coarsest level is solved by a banded LU factorization.
 */
class ScreenedSolver {
public:
    explicit ScreenedSolver(const StripGrid& grid);

    const StripGrid& grid() const { return grid_; }
    int levels() const { return static_cast<int>(levels_.size()); }

    /// q >= 0 per node (row-major, grid.size() values). Must be called before solve().
    void set_potential(std::span<const double> q);

    ScreenedStats solve(std::span<double> u, const ScreenedOptions& options = {});

    /// max over interior nodes of |(-Lap_strip + q) u| / D.
    double scaled_residual(std::span<const double> u) const;

    double laplacian_diagonal() const { return diag_; }

private:
    using Stencil = std::array<std::vector<double>, 9>;

    struct Level {
        int nt = 0;
        Stencil a;
        std::vector<double> w_west, w_east;  // interpolation weights of odd columns
        std::vector<double> u, f, r, cp, dp;  // cp, dp: line factorization
    };

    struct BandedLU {
        int n = 0;
        int band = 0;
        std::vector<double> lu;  // n rows of 2*band+1 entries
        void factor();
        void solve(std::span<double> x) const;
        double& at(int row, int col) { return lu[static_cast<std::size_t>(row) * (2 * band + 1) + (col - row + band)]; }
        double at(int row, int col) const { return lu[static_cast<std::size_t>(row) * (2 * band + 1) + (col - row + band)]; }
    };

    void factor_lines(Level& lv) const;
    void smooth(Level& lv, int color_first) const;
    void residual(const Level& lv, std::span<const double> u, std::span<const double> f,
                  std::span<double> r) const;
    void vcycle(std::size_t l);
    void build_transfer(std::size_t l);
    void build_coarsest();

    StripGrid grid_;
    int ny_;
    double diag_;
    std::vector<Level> levels_;
    BandedLU coarsest_;
    std::vector<double> coarse_rhs_;
    bool potential_set_ = false;
};

}  // namespace spiralseg
