#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spiralseg/competition.hpp"
#include "spiralseg/grid.hpp"
#include "spiralseg/screened.hpp"
#include "spiralseg/traces.hpp"

namespace spiralseg {

/// Nonnegative densities u_1..u_k on the strip together with the continuation parameter.
struct SystemState {
    std::vector<Field> fields;
    double beta = 0.0;
    std::vector<double> residual;  // per-species scaled max-norm defect
    int iterations = 0;
    bool converged = false;
    std::vector<double> defect_history;

    int k() const { return static_cast<int>(fields.size()); }
    const StripGrid& grid() const { return fields.front().grid(); }
    double max_residual() const;
};

/**
 * Solves (-Lap_strip + exp(-2y) c) u = 0 with the boundary rows of `dirichlet`
 * (row 0 and row n_y - 1) held fixed; the interior of `dirichlet` is the
 * initial guess. Throws SolveError when the multigrid iteration stalls.
 */
Field solve_screened(const StripGrid& grid, const Field& potential, const Field& dirichlet,
                     const ScreenedOptions& options = {});

struct RelaxOptions {
    double tolerance = 1e-8;        // outer defect, same scaling as ScreenedOptions::tolerance
    double inner_tolerance = 1e-10;
    int max_outer = 20000;
    /// Block over-relaxation of the species update, projected onto u >= 0. 1 is plain Gauss-Seidel.
    double relaxation = 1.0;
    int max_inner_cycles = 200;
};

/// All species with the sampled traces on row 0, zero elsewhere.
SystemState initial_state(const StripGrid& grid, const TraceSpec& traces);

/**
 * Gauss-Seidel over species: u_i <- solution of the screened problem with
 * potential c_i = beta * sum_{j != i} a_ij u_j, the other species frozen at
 * their latest iterates. Stops when every species' defect
 * |-Lap_strip u_i + exp(-2y) beta u_i sum_j a_ij u_j| / D is <= tolerance;
 * if max_outer is reached the best state is returned with converged = false.
 */
SystemState relax_system(SystemState state, const CompetitionMatrix& a, double beta,
                         const RelaxOptions& options = {});

/// Per-species scaled defect of the discrete beta-system.
std::vector<double> system_defect(const SystemState& state, const CompetitionMatrix& a, double beta);

class ContinuationError : public std::runtime_error {
public:
    ContinuationError(double beta, const std::string& what)
        : std::runtime_error("at beta=" + std::to_string(beta) + ": " + what), beta_(beta) {}
    double beta() const { return beta_; }

private:
    double beta_;
};

using SweepObserver = std::function<void(const SystemState&)>;

std::vector<double> default_beta_schedule();

/// Warm-started solves along a strictly increasing beta schedule; returns every state.
std::vector<SystemState> continuation_sweep(const StripGrid& grid, const CompetitionMatrix& a,
                                            const TraceSpec& traces, std::span<const double> schedule,
                                            const RelaxOptions& options = {},
                                            const SweepObserver& observer = {});

}  // namespace spiralseg
