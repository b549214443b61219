#include "spiralseg/solver.hpp"

#include <algorithm>
#include <cmath>

namespace spiralseg {

namespace {

// exp(-2 y_j) * beta * sum_{j != i} a_ij u_j at every node.
void competition_potential(const SystemState& s, const CompetitionMatrix& a, double beta, int i,
                           std::span<const double> row_factor, std::vector<double>& q) {
    const StripGrid& g = s.grid();
    const int nt = g.n_theta();
    std::fill(q.begin(), q.end(), 0.0);
    for (int j = 0; j < s.k(); ++j) {
        if (j == i) continue;
        const double aij = a(i, j);
        const auto u = s.fields[j].values();
        for (std::size_t n = 0; n < q.size(); ++n) q[n] += aij * u[n];
    }
    for (int row = 0; row < g.n_y(); ++row) {
        const double f = beta * row_factor[row];
        double* qr = q.data() + static_cast<std::size_t>(row) * nt;
        for (int c = 0; c < nt; ++c) qr[c] *= f;
    }
}

std::vector<double> row_factors(const StripGrid& g) {
    std::vector<double> f(g.n_y());
    for (int j = 0; j < g.n_y(); ++j) f[j] = std::exp(-2.0 * g.y(j));
    return f;
}

void check_state(const SystemState& s, const CompetitionMatrix& a) {
    if (s.fields.empty()) throw std::invalid_argument("system state has no species");
    if (s.k() != a.k())
        throw std::invalid_argument("state has " + std::to_string(s.k()) + " species but the matrix has k=" +
                                    std::to_string(a.k()));
    for (const Field& f : s.fields)
        if (!(f.grid() == s.grid())) throw std::invalid_argument("species fields live on different grids");
}

}  // namespace

double SystemState::max_residual() const {
    return residual.empty() ? 0.0 : *std::max_element(residual.begin(), residual.end());
}

Field solve_screened(const StripGrid& grid, const Field& potential, const Field& dirichlet,
                     const ScreenedOptions& options) {
    if (!(potential.grid() == grid) || !(dirichlet.grid() == grid))
        throw std::invalid_argument("solve_screened: fields must live on the solver grid");
    std::vector<double> q(grid.size());
    const auto c = potential.values();
    for (int j = 0; j < grid.n_y(); ++j) {
        const double f = std::exp(-2.0 * grid.y(j));
        for (int i = 0; i < grid.n_theta(); ++i) {
            const std::size_t n = grid.index(i, j);
            if (!(c[n] >= 0.0)) throw std::invalid_argument("solve_screened: potential must be >= 0");
            q[n] = f * c[n];
        }
    }
    ScreenedSolver solver(grid);
    solver.set_potential(q);
    Field u = dirichlet;
    solver.solve(u.values(), options);
    return u;
}

SystemState initial_state(const StripGrid& grid, const TraceSpec& traces) {
    SystemState s;
    const auto rows = sample_traces(traces, grid);
    for (const auto& row : rows) {
        Field f(grid, FieldRole::Density);
        std::copy(row.begin(), row.end(), f.row(0).begin());
        s.fields.push_back(std::move(f));
    }
    s.residual.assign(s.fields.size(), 0.0);
    return s;
}

std::vector<double> system_defect(const SystemState& state, const CompetitionMatrix& a, double beta) {
    check_state(state, a);
    const StripGrid& g = state.grid();
    const auto factor = row_factors(g);
    const double ct = 1.0 / (g.dtheta() * g.dtheta());
    const double cy = 1.0 / (g.dy() * g.dy());
    const double diag = 2.0 * ct + 2.0 * cy;
    std::vector<double> q(g.size());
    std::vector<double> out(state.k(), 0.0);
    for (int i = 0; i < state.k(); ++i) {
        competition_potential(state, a, beta, i, factor, q);
        const Field& u = state.fields[i];
        double m = 0.0;
        for (int j = 1; j + 1 < g.n_y(); ++j) {
            for (int c = 0; c < g.n_theta(); ++c) {
                const double v = u(c, j);
                const double lap = ct * (u(c - 1, j) - 2.0 * v + u(c + 1, j)) +
                                   cy * (u(c, j - 1) - 2.0 * v + u(c, j + 1));
                m = std::max(m, std::abs(-lap + q[g.index(c, j)] * v));
            }
        }
        out[i] = m / diag;
    }
    return out;
}

SystemState relax_system(SystemState state, const CompetitionMatrix& a, double beta,
                         const RelaxOptions& options) {
    check_state(state, a);
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
    if (!(options.relaxation > 0.0 && options.relaxation < 2.0))
        throw std::invalid_argument("relaxation factor must lie in (0, 2)");
    const StripGrid& g = state.grid();
    const auto factor = row_factors(g);
    ScreenedSolver solver(g);
    std::vector<double> q(g.size()), trial(g.size());
    const ScreenedOptions inner{options.inner_tolerance, options.max_inner_cycles, true};
    const double omega = options.relaxation;

    state.beta = beta;
    state.converged = false;
    state.iterations = 0;
    state.defect_history.clear();
    state.residual = system_defect(state, a, beta);
    if (state.max_residual() <= options.tolerance) {
        state.converged = true;
        return state;
    }
    for (int outer = 1; outer <= options.max_outer; ++outer) {
        for (int i = 0; i < state.k(); ++i) {
            competition_potential(state, a, beta, i, factor, q);
            solver.set_potential(q);
            auto u = state.fields[i].values();
            std::copy(u.begin(), u.end(), trial.begin());
            solver.solve(trial, inner);
            if (omega == 1.0) {
                std::copy(trial.begin(), trial.end(), u.begin());
            } else {
                for (std::size_t n = 0; n < u.size(); ++n)
                    u[n] = std::max(0.0, u[n] + omega * (trial[n] - u[n]));
            }
        }
        state.iterations = outer;
        state.residual = system_defect(state, a, beta);
        state.defect_history.push_back(state.max_residual());
        if (state.max_residual() <= options.tolerance) {
            state.converged = true;
            break;
        }
    }
    return state;
}

std::vector<double> default_beta_schedule() {
    return {1e1, 1e2, 1e3, 1e4, 1e5, 1e6, 1e7};
}

std::vector<SystemState> continuation_sweep(const StripGrid& grid, const CompetitionMatrix& a,
                                            const TraceSpec& traces, std::span<const double> schedule,
                                            const RelaxOptions& options, const SweepObserver& observer) {
    if (schedule.empty()) throw std::invalid_argument("beta schedule is empty");
    for (std::size_t n = 0; n < schedule.size(); ++n) {
        if (!(schedule[n] >= 0.0)) throw std::invalid_argument("beta schedule entries must be >= 0");
        if (n > 0 && !(schedule[n] > schedule[n - 1]))
            throw std::invalid_argument("beta schedule must be strictly increasing");
    }
    if (traces.h() != a.k())
        throw std::invalid_argument("traces describe " + std::to_string(traces.h()) +
                                    " species but the matrix has k=" + std::to_string(a.k()));
    std::vector<SystemState> trajectory;
    SystemState current = initial_state(grid, traces);
    for (double beta : schedule) {
        try {
            current = relax_system(std::move(current), a, beta, options);
        } catch (const SolveError& e) {
            throw ContinuationError(beta, e.what());
        }
        trajectory.push_back(current);
        if (observer) observer(trajectory.back());
    }
    return trajectory;
}

}  // namespace spiralseg
