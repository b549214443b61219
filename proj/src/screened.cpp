#include "spiralseg/screened.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spiralseg {

namespace {

constexpr int slot(int di, int dj) { return (dj + 1) * 3 + (di + 1); }
constexpr int kCenter = slot(0, 0);

// Coarse parents of neighbouring fine nodes are at most one column apart (nc >= 4).
int coarse_offset(int from, int to, int nc) {
    const int d = to - from;
    return d > 1 ? d - nc : (d < -1 ? d + nc : d);
}

}  // namespace

ScreenedSolver::ScreenedSolver(const StripGrid& grid) : grid_(grid), ny_(grid.n_y()) {
    const double ct = 1.0 / (grid.dtheta() * grid.dtheta());
    const double cy = 1.0 / (grid.dy() * grid.dy());
    diag_ = 2.0 * ct + 2.0 * cy;

    int nt = grid.n_theta();
    while (true) {
        Level lv;
        lv.nt = nt;
        const std::size_t n = static_cast<std::size_t>(nt) * ny_;
        for (auto& s : lv.a) s.assign(n, 0.0);
        lv.w_west.assign(n, 0.0);
        lv.w_east.assign(n, 0.0);
        lv.u.assign(n, 0.0);
        lv.f.assign(n, 0.0);
        lv.r.assign(n, 0.0);
        lv.cp.assign(n, 0.0);
        lv.dp.assign(n, 0.0);
        levels_.push_back(std::move(lv));
        if (nt % 4 != 0 || nt / 2 < 4) break;
        nt /= 2;
    }

    Level& fine = levels_.front();
    for (int j = 1; j + 1 < ny_; ++j) {
        for (int i = 0; i < fine.nt; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * fine.nt + i;
            fine.a[kCenter][idx] = diag_;
            fine.a[slot(-1, 0)][idx] = -ct;
            fine.a[slot(1, 0)][idx] = -ct;
            fine.a[slot(0, -1)][idx] = -cy;
            fine.a[slot(0, 1)][idx] = -cy;
        }
    }
}

void ScreenedSolver::build_transfer(std::size_t l) {
    Level& f = levels_[l];
    Level& c = levels_[l + 1];
    const int nt = f.nt, nc = c.nt;
    const bool corners = l > 0;

    for (int j = 1; j + 1 < ny_; ++j) {
        for (int i = 1; i < nt; i += 2) {
            const std::size_t idx = static_cast<std::size_t>(j) * nt + i;
            double west = f.a[slot(-1, 0)][idx], east = f.a[slot(1, 0)][idx];
            const double mid = f.a[kCenter][idx] + f.a[slot(0, -1)][idx] + f.a[slot(0, 1)][idx];
            if (corners) {
                west += f.a[slot(-1, -1)][idx] + f.a[slot(-1, 1)][idx];
                east += f.a[slot(1, -1)][idx] + f.a[slot(1, 1)][idx];
            }
            f.w_west[idx] = -west / mid;
            f.w_east[idx] = -east / mid;
        }
    }

    // c.a = P^T f.a P, P: even column 2I -> coarse I, odd column -> (w_west, w_east).
    for (auto& s : c.a) std::fill(s.begin(), s.end(), 0.0);
    struct Parent {
        int index;
        double weight;
    };
    auto parents = [&](int i, std::size_t idx, Parent out[2]) {
        if (i % 2 == 0) {
            out[0] = {i / 2, 1.0};
            return 1;
        }
        out[0] = {(i - 1) / 2, f.w_west[idx]};
        out[1] = {i + 1 == nt ? 0 : (i + 1) / 2, f.w_east[idx]};
        return 2;
    };
    Parent pf[2], pg[2];
    for (int j = 1; j + 1 < ny_; ++j) {
        for (int i = 0; i < nt; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * nt + i;
            const int npf = parents(i, idx, pf);
            for (int dj = -1; dj <= 1; ++dj) {
                const int jg = j + dj;
                if (jg <= 0 || jg >= ny_ - 1) continue;  // boundary rows carry no correction
                for (int di = -1; di <= 1; ++di) {
                    const double s = f.a[slot(di, dj)][idx];
                    if (s == 0.0) continue;
                    const int g = i + di < 0 ? nt - 1 : (i + di == nt ? 0 : i + di);
                    const std::size_t gidx = static_cast<std::size_t>(jg) * nt + g;
                    const int npg = parents(g, gidx, pg);
                    for (int a = 0; a < npf; ++a) {
                        const std::size_t cidx = static_cast<std::size_t>(j) * nc + pf[a].index;
                        const double left = pf[a].weight * s;
                        for (int b = 0; b < npg; ++b)
                            c.a[slot(coarse_offset(pf[a].index, pg[b].index, nc), dj)][cidx] +=
                                left * pg[b].weight;
                    }
                }
            }
        }
    }
}

void ScreenedSolver::BandedLU::factor() {
    for (int k = 0; k < n; ++k) {
        const double pivot = at(k, k);
        if (pivot == 0.0) throw std::runtime_error("coarsest screened operator is singular");
        const int last = std::min(n - 1, k + band);
        for (int i = k + 1; i <= last; ++i) {
            const double m = at(i, k) / pivot;
            if (m == 0.0) continue;
            at(i, k) = m;
            for (int j = k + 1; j <= last; ++j) at(i, j) -= m * at(k, j);
        }
    }
}

void ScreenedSolver::BandedLU::solve(std::span<double> x) const {
    for (int i = 0; i < n; ++i) {
        const int first = std::max(0, i - band);
        double s = x[i];
        for (int j = first; j < i; ++j) s -= at(i, j) * x[j];
        x[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
        const int last = std::min(n - 1, i + band);
        double s = x[i];
        for (int j = i + 1; j <= last; ++j) s -= at(i, j) * x[j];
        x[i] = s / at(i, i);
    }
}

void ScreenedSolver::build_coarsest() {
    const Level& lv = levels_.back();
    const int nt = lv.nt;
    const int rows = ny_ - 2;
    coarsest_.n = rows * nt;
    coarsest_.band = 2 * nt - 1;
    coarsest_.lu.assign(static_cast<std::size_t>(coarsest_.n) * (2 * coarsest_.band + 1), 0.0);
    coarse_rhs_.assign(coarsest_.n, 0.0);
    for (int j = 1; j + 1 < ny_; ++j) {
        for (int i = 0; i < nt; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * nt + i;
            const int row = (j - 1) * nt + i;
            for (int dj = -1; dj <= 1; ++dj) {
                const int jg = j + dj;
                if (jg <= 0 || jg >= ny_ - 1) continue;
                for (int di = -1; di <= 1; ++di) {
                    const int g = ((i + di) % nt + nt) % nt;
                    coarsest_.at(row, (jg - 1) * nt + g) += lv.a[slot(di, dj)][idx];
                }
            }
        }
    }
    if (coarsest_.n > 0) coarsest_.factor();
}

void ScreenedSolver::set_potential(std::span<const double> q) {
    if (q.size() != grid_.size())
        throw std::invalid_argument("potential size does not match the grid");
    Level& fine = levels_.front();
    for (int j = 1; j + 1 < ny_; ++j) {
        for (int i = 0; i < fine.nt; ++i) {
            const std::size_t idx = static_cast<std::size_t>(j) * fine.nt + i;
            if (!(q[idx] >= 0.0)) throw std::invalid_argument("potential must be nonnegative");
            fine.a[kCenter][idx] = diag_ + q[idx];
        }
    }
    for (std::size_t l = 0; l + 1 < levels_.size(); ++l) build_transfer(l);
    for (Level& lv : levels_) factor_lines(lv);
    build_coarsest();
    potential_set_ = true;
}

void ScreenedSolver::factor_lines(Level& lv) const {
    // Thomas factorization of every y-line: lv.cp holds c'_j, lv.dp holds 1 / m_j.
    const int nt = lv.nt;
    for (int j = 1; j + 1 < ny_; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * nt;
        for (int i = 0; i < nt; ++i) {
            const std::size_t idx = row + i;
            double m = lv.a[kCenter][idx];
            if (j > 1) m -= lv.a[slot(0, -1)][idx] * lv.cp[idx - nt];
            lv.dp[idx] = 1.0 / m;
            lv.cp[idx] = j + 2 == ny_ ? 0.0 : lv.a[slot(0, 1)][idx] / m;
        }
    }
}

void ScreenedSolver::smooth(Level& lv, int color_first) const {
    const int nt = lv.nt;
    const bool corners = &lv != &levels_.front();
    auto& u = lv.u;
    auto& z = lv.r;  // forward-substitution scratch; residual() overwrites it later
    const auto& f = lv.f;
    const auto& a = lv.a;
    const double* aw = a[slot(-1, 0)].data();
    const double* ae = a[slot(1, 0)].data();
    const double* as = a[slot(0, -1)].data();
    const double* an = a[slot(0, 1)].data();
    const double* cp = lv.cp.data();
    const double* inv_m = lv.dp.data();
    for (int pass = 0; pass < 2; ++pass) {
        const int color = pass == 0 ? color_first : 1 - color_first;
        for (int j = 1; j + 1 < ny_; ++j) {
            const std::size_t row = static_cast<std::size_t>(j) * nt;
            const std::size_t below = row - nt, above = row + nt;
            for (int i = color; i < nt; i += 2) {
                const std::size_t idx = row + i;
                const int im = i == 0 ? nt - 1 : i - 1;
                const int ip = i == nt - 1 ? 0 : i + 1;
                double d = f[idx] - aw[idx] * u[row + im] - ae[idx] * u[row + ip];
                if (corners)
                    d -= a[slot(-1, -1)][idx] * u[below + im] + a[slot(1, -1)][idx] * u[below + ip] +
                         a[slot(-1, 1)][idx] * u[above + im] + a[slot(1, 1)][idx] * u[above + ip];
                d -= as[idx] * (j == 1 ? u[i] : z[idx - nt]);
                if (j + 2 == ny_) d -= an[idx] * u[idx + nt];
                z[idx] = d * inv_m[idx];
            }
        }
        for (int j = ny_ - 2; j >= 1; --j) {
            const std::size_t row = static_cast<std::size_t>(j) * nt;
            for (int i = color; i < nt; i += 2) {
                const std::size_t idx = row + i;
                u[idx] = j + 2 == ny_ ? z[idx] : z[idx] - cp[idx] * u[idx + nt];
            }
        }
    }
}

void ScreenedSolver::residual(const Level& lv, std::span<const double> u, std::span<const double> f,
                              std::span<double> r) const {
    const int nt = lv.nt;
    const bool corners = &lv != &levels_.front();
    const auto& a = lv.a;
    std::fill(r.begin(), r.begin() + nt, 0.0);
    std::fill(r.end() - nt, r.end(), 0.0);
    for (int j = 1; j + 1 < ny_; ++j) {
        const std::size_t row = static_cast<std::size_t>(j) * nt;
        const std::size_t below = row - nt, above = row + nt;
        for (int i = 0; i < nt; ++i) {
            const std::size_t idx = row + i;
            const int im = i == 0 ? nt - 1 : i - 1;
            const int ip = i == nt - 1 ? 0 : i + 1;
            double au = a[kCenter][idx] * u[idx] + a[slot(-1, 0)][idx] * u[row + im] +
                        a[slot(1, 0)][idx] * u[row + ip] + a[slot(0, -1)][idx] * u[below + i] +
                        a[slot(0, 1)][idx] * u[above + i];
            if (corners)
                au += a[slot(-1, -1)][idx] * u[below + im] + a[slot(1, -1)][idx] * u[below + ip] +
                      a[slot(-1, 1)][idx] * u[above + im] + a[slot(1, 1)][idx] * u[above + ip];
            r[idx] = f[idx] - au;
        }
    }
}

void ScreenedSolver::vcycle(std::size_t l) {
    Level& lv = levels_[l];
    if (l + 1 == levels_.size()) {
        const int nt = lv.nt;
        for (int j = 1; j + 1 < ny_; ++j)
            for (int i = 0; i < nt; ++i)
                coarse_rhs_[(j - 1) * nt + i] = lv.f[static_cast<std::size_t>(j) * nt + i];
        coarsest_.solve(coarse_rhs_);
        std::fill(lv.u.begin(), lv.u.end(), 0.0);
        for (int j = 1; j + 1 < ny_; ++j)
            for (int i = 0; i < nt; ++i)
                lv.u[static_cast<std::size_t>(j) * nt + i] = coarse_rhs_[(j - 1) * nt + i];
        return;
    }
    Level& c = levels_[l + 1];
    const int nt = lv.nt, nc = c.nt;
    smooth(lv, 0);
    residual(lv, lv.u, lv.f, lv.r);
    std::fill(c.u.begin(), c.u.end(), 0.0);
    std::fill(c.f.begin(), c.f.end(), 0.0);
    for (int j = 1; j + 1 < ny_; ++j) {
        const std::size_t frow = static_cast<std::size_t>(j) * nt;
        const std::size_t crow = static_cast<std::size_t>(j) * nc;
        for (int I = 0; I < nc; ++I) {
            const int i = 2 * I;
            const int im = i == 0 ? nt - 1 : i - 1;
            c.f[crow + I] = lv.r[frow + i] + lv.w_east[frow + im] * lv.r[frow + im] +
                            lv.w_west[frow + i + 1] * lv.r[frow + i + 1];
        }
    }
    vcycle(l + 1);
    for (int j = 1; j + 1 < ny_; ++j) {
        const std::size_t frow = static_cast<std::size_t>(j) * nt;
        const std::size_t crow = static_cast<std::size_t>(j) * nc;
        for (int I = 0; I < nc; ++I) {
            const double e0 = c.u[crow + I];
            const double e1 = c.u[crow + (I + 1 == nc ? 0 : I + 1)];
            const std::size_t odd = frow + 2 * I + 1;
            lv.u[frow + 2 * I] += e0;
            lv.u[odd] += lv.w_west[odd] * e0 + lv.w_east[odd] * e1;
        }
    }
    smooth(lv, 1);
}

double ScreenedSolver::scaled_residual(std::span<const double> u) const {
    if (!potential_set_) throw std::logic_error("ScreenedSolver: set_potential() was not called");
    const Level& fine = levels_.front();
    std::vector<double> r(u.size());
    const std::vector<double> zero(u.size(), 0.0);
    residual(fine, u, zero, r);
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m / diag_;
}

ScreenedStats ScreenedSolver::solve(std::span<double> u, const ScreenedOptions& options) {
    if (!potential_set_) throw std::logic_error("ScreenedSolver: set_potential() was not called");
    if (u.size() != grid_.size()) throw std::invalid_argument("solution size does not match the grid");
    Level& fine = levels_.front();
    const int nt = fine.nt;
    std::copy(u.begin(), u.end(), fine.u.begin());
    std::fill(fine.f.begin(), fine.f.end(), 0.0);

    double scale = 0.0;
    for (int i = 0; i < nt; ++i) {
        scale = std::max(scale, std::abs(u[i]));
        scale = std::max(scale, std::abs(u[static_cast<std::size_t>(ny_ - 1) * nt + i]));
    }
    if (scale == 0.0) scale = 1.0;
    const double target = options.tolerance * scale;

    ScreenedStats stats;
    auto measure = [&] {
        residual(fine, fine.u, fine.f, fine.r);
        double m = 0.0;
        for (double v : fine.r) m = std::max(m, std::abs(v));
        return m / diag_;
    };
    double res = measure();
    stats.history.push_back(res);
    while (res > target) {
        if (stats.cycles >= options.max_cycles || !std::isfinite(res)) {
            std::ostringstream msg;
            msg << "screened solve did not reach residual " << target << " after " << stats.cycles
                << " cycles (last " << res << ")";
            throw SolveError(msg.str(), stats.history);
        }
        vcycle(0);
        ++stats.cycles;
        res = measure();
        stats.history.push_back(res);
    }
    if (options.nonnegative) {
        bool clamped = false;
        for (int j = 1; j + 1 < ny_; ++j)
            for (int i = 0; i < nt; ++i) {
                double& v = fine.u[static_cast<std::size_t>(j) * nt + i];
                if (v < 0.0) {
                    v = 0.0;
                    clamped = true;
                }
            }
        if (clamped) {
            smooth(fine, 0);
            res = measure();
        }
    }
    stats.residual = res;
    std::copy(fine.u.begin(), fine.u.end(), u.begin());
    return stats;
}

}  // namespace spiralseg
