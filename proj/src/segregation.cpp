#include "spiralseg/segregation.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace spiralseg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// exp(2y) times the five-point strip Laplacian at interior node (i, j).
double disk_laplacian(const Field& u, int i, int j, double ct, double cy, double e2y) {
    const double v = u(i, j);
    return e2y * (ct * (u(i - 1, j) - 2.0 * v + u(i + 1, j)) + cy * (u(i, j - 1) - 2.0 * v + u(i, j + 1)));
}

// Andrew's monotone chain.
std::vector<CartesianPoint> convex_hull(std::vector<CartesianPoint> p) {
    std::sort(p.begin(), p.end(), [](const CartesianPoint& a, const CartesianPoint& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    if (p.size() < 3) return p;
    auto cross = [](const CartesianPoint& o, const CartesianPoint& a, const CartesianPoint& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<CartesianPoint> h(2 * p.size());
    std::size_t n = 0;
    for (const auto& q : p) {
        while (n >= 2 && cross(h[n - 2], h[n - 1], q) <= 0) --n;
        h[n++] = q;
    }
    for (std::size_t i = p.size() - 1, lo = n + 1; i-- > 0;) {
        while (n >= lo && cross(h[n - 2], h[n - 1], p[i]) <= 0) --n;
        h[n++] = p[i];
    }
    h.resize(n - 1);
    return h;
}

}  // namespace

OverlapMetrics overlap_metrics(const SystemState& state) {
    OverlapMetrics out;
    if (state.fields.empty()) return out;
    const StripGrid& g = state.grid();
    const double cell = g.dtheta() * g.dy();
    for (int i = 0; i < state.k(); ++i) {
        for (int j = i + 1; j < state.k(); ++j) {
            double mx = 0.0, l2 = 0.0;
            for (int row = 0; row < g.n_y(); ++row) {
                // area element r dr dtheta = r^2 dy dtheta; trapezoid weights in y
                const double r = g.r(row);
                const double wy = (row == 0 || row == g.n_y() - 1) ? 0.5 : 1.0;
                const auto ui = state.fields[i].row(row);
                const auto uj = state.fields[j].row(row);
                for (int c = 0; c < g.n_theta(); ++c) {
                    const double p = std::abs(ui[c] * uj[c]);
                    mx = std::max(mx, p);
                    l2 += wy * r * r * cell * p * p;
                }
            }
            l2 = std::sqrt(l2);
            if (out.pair_i < 0 || mx > out.max_product) {
                out.max_product = mx;
                out.pair_i = i;
                out.pair_j = j;
            }
            out.l2_product = std::max(out.l2_product, l2);
        }
    }
    return out;
}

Field hat_field(const SystemState& state, int i, const CompetitionMatrix& a) {
    if (i < 0 || i >= state.k()) throw std::out_of_range("hat_field: species index out of range");
    if (a.k() != state.k()) throw std::invalid_argument("hat_field: matrix size does not match the state");
    Field out = state.fields[i];
    out.set_role(FieldRole::SignedDensity);
    auto v = out.values();
    for (int j = 0; j < state.k(); ++j) {
        if (j == i) continue;
        const double w = a(i, j) / a(j, i);
        const auto u = state.fields[j].values();
        for (std::size_t n = 0; n < v.size(); ++n) v[n] -= w * u[n];
    }
    return out;
}

std::vector<SignDefect> sign_defects(const SystemState& state, const CompetitionMatrix& a, const NodeMask* mask) {
    const StripGrid& g = state.grid();
    if (mask && mask->size() != g.size()) throw std::invalid_argument("sign_defects: mask size mismatch");
    const double ct = 1.0 / (g.dtheta() * g.dtheta());
    const double cy = 1.0 / (g.dy() * g.dy());
    const double diag = 2.0 * ct + 2.0 * cy;
    std::vector<SignDefect> out(state.k());
    for (int s = 0; s < state.k(); ++s) {
        const Field& u = state.fields[s];
        const Field uh = hat_field(state, s, a);
        const double su = std::max(u.max_abs(), std::numeric_limits<double>::min()) * diag;
        const double sh = std::max(uh.max_abs(), std::numeric_limits<double>::min()) * diag;
        SignDefect& d = out[s];
        for (int j = 1; j + 1 < g.n_y(); ++j) {
            const double e2y = std::exp(2.0 * g.y(j));
            for (int i = 0; i < g.n_theta(); ++i) {
                if (mask && !(*mask)[g.index(i, j)]) continue;
                const double lu = disk_laplacian(u, i, j, ct, cy, e2y);
                const double lh = disk_laplacian(uh, i, j, ct, cy, e2y);
                d.sub_raw = std::max(d.sub_raw, -lu);
                d.super_raw = std::max(d.super_raw, lh);
                d.sub = std::max(d.sub, -lu / (e2y * su));
                d.super = std::max(d.super, lh / (e2y * sh));
            }
        }
    }
    return out;
}

MultiplicityMap multiplicity_map(const SystemState& state, const PresenceOptions& options) {
    if (!(options.delta > 0.0)) throw std::invalid_argument("presence threshold must be > 0");
    if (options.rho < 2) throw std::invalid_argument("probe radius must be at least 2 cells");
    if (state.k() > 32) throw std::invalid_argument("multiplicity map supports at most 32 species");
    const StripGrid& g = state.grid();
    const int nt = g.n_theta(), ny = g.n_y();

    std::vector<double> threshold(ny, 0.0);
    double global = 0.0;
    for (int j = 0; j < ny; ++j) {
        double m = 0.0;
        for (const Field& f : state.fields)
            for (double v : f.row(j)) m = std::max(m, v);
        threshold[j] = m;
        global = std::max(global, m);
    }
    for (double& t : threshold) t = options.delta * (options.row_relative ? t : global);

    std::vector<std::uint32_t> raw(g.size(), 0);
    for (int s = 0; s < state.k(); ++s) {
        const auto u = state.fields[s].values();
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nt; ++i) {
                const std::size_t n = static_cast<std::size_t>(j) * nt + i;
                if (threshold[j] > 0.0 && u[n] > threshold[j]) raw[n] |= 1u << s;
            }
    }

    // dilation by the index-space disk of radius rho
    const int rho = options.rho;
    std::vector<std::array<int, 2>> offsets;
    for (int dj = -rho; dj <= rho; ++dj)
        for (int di = -rho; di <= rho; ++di)
            if (di * di + dj * dj <= rho * rho) offsets.push_back({di, dj});

    MultiplicityMap out{g, std::vector<int>(g.size(), 0), std::vector<std::uint32_t>(g.size(), 0), options};
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nt; ++i) {
            std::uint32_t bits = 0;
            for (const auto& o : offsets) {
                const int jj = j + o[1];
                if (jj < 0 || jj >= ny) continue;
                bits |= raw[g.index(i + o[0], jj)];
            }
            const std::size_t n = g.index(i, j);
            out.present[n] = bits;
            out.m[n] = std::popcount(bits);
        }
    return out;
}

void unwrap_theta(std::vector<CurvePoint>& points) {
    for (std::size_t n = 1; n < points.size(); ++n) {
        const double d = points[n].theta - points[n - 1].theta;
        points[n].theta -= kTwoPi * std::round(d / kTwoPi);
    }
}

namespace {

// Marching squares on one signed field. Edge crossings are keyed by edge id so
// segments sharing a crossing can be chained.
struct Crossing {
    double theta;
    double y;
};

struct ContourBuilder {
    const StripGrid& g;
    std::map<long long, Crossing> points;
    std::map<long long, std::vector<long long>> adj;

    // horizontal edge (i,j)-(i+1,j): id 2*(j*nt+i); vertical edge (i,j)-(i,j+1): id 2*(j*nt+i)+1
    long long hid(int i, int j) const { return 2LL * (static_cast<long long>(j) * g.n_theta() + g.wrap(i)); }
    long long vid(int i, int j) const { return hid(i, j) + 1; }

    void link(long long a, long long b) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
};

}  // namespace

std::vector<NodalCurve> extract_nodal_curves(const SystemState& state, const CompetitionMatrix& a,
                                             const MultiplicityMap& mmap) {
    const StripGrid& g = state.grid();
    if (!(mmap.grid == g)) throw std::invalid_argument("multiplicity map grid does not match the state");
    const int k = state.k(), nt = g.n_theta(), ny = g.n_y();
    std::vector<NodalCurve> curves;
    if (k < 2) return curves;
    const int pairs = k == 2 ? 1 : k;
    for (int p = 0; p < pairs; ++p) {
        const int i = p, j = (p + 1) % k;
        const std::uint32_t want = (1u << i) | (1u << j);
        std::vector<double> s(g.size());
        {
            const auto ui = state.fields[i].values();
            const auto uj = state.fields[j].values();
            for (std::size_t n = 0; n < s.size(); ++n) s[n] = a(j, i) * ui[n] - a(i, j) * uj[n];
        }
        ContourBuilder cb{g, {}, {}};
        auto crossing_h = [&](int ci, int cj) {
            const double s0 = s[g.index(ci, cj)], s1 = s[g.index(ci + 1, cj)];
            const double t = s0 / (s0 - s1);
            cb.points.emplace(cb.hid(ci, cj), Crossing{(ci + t) * g.dtheta(), g.y(cj)});
            return cb.hid(ci, cj);
        };
        auto crossing_v = [&](int ci, int cj) {
            const double s0 = s[g.index(ci, cj)], s1 = s[g.index(ci, cj + 1)];
            const double t = s0 / (s0 - s1);
            cb.points.emplace(cb.vid(ci, cj), Crossing{g.wrap(ci) * g.dtheta(), g.y(cj) + t * g.dy()});
            return cb.vid(ci, cj);
        };
        for (int cj = 0; cj + 1 < ny; ++cj) {
            for (int ci = 0; ci < nt; ++ci) {
                const std::size_t c00 = g.index(ci, cj), c10 = g.index(ci + 1, cj);
                const std::size_t c01 = g.index(ci, cj + 1), c11 = g.index(ci + 1, cj + 1);
                if (mmap.present[c00] != want || mmap.present[c10] != want || mmap.present[c01] != want ||
                    mmap.present[c11] != want)
                    continue;
                const bool b00 = s[c00] > 0, b10 = s[c10] > 0, b01 = s[c01] > 0, b11 = s[c11] > 0;
                std::vector<long long> e;
                if (b00 != b10) e.push_back(crossing_h(ci, cj));
                if (b10 != b11) e.push_back(crossing_v(ci + 1, cj));
                if (b01 != b11) e.push_back(crossing_h(ci, cj + 1));
                if (b00 != b01) e.push_back(crossing_v(ci, cj));
                if (e.size() == 2) {
                    cb.link(e[0], e[1]);
                } else if (e.size() == 4) {
                    // saddle: decide with the cell-centre average
                    const double centre = 0.25 * (s[c00] + s[c10] + s[c01] + s[c11]);
                    if ((centre > 0) == b00) {
                        cb.link(e[0], e[1]);
                        cb.link(e[2], e[3]);
                    } else {
                        cb.link(e[0], e[3]);
                        cb.link(e[1], e[2]);
                    }
                }
            }
        }

        // chain segments into polylines, starting from open ends
        std::map<long long, bool> used;
        std::vector<std::vector<CurvePoint>> pieces;
        auto walk = [&](long long start) {
            std::vector<CurvePoint> line;
            long long prev = -1, cur = start;
            while (true) {
                used[cur] = true;
                const Crossing& c = cb.points.at(cur);
                line.push_back({c.theta, c.y});
                long long next = -1;
                for (long long nb : cb.adj[cur])
                    if (nb != prev && !used[nb]) {
                        next = nb;
                        break;
                    }
                if (next < 0) break;
                prev = cur;
                cur = next;
            }
            return line;
        };
        for (const auto& [id, nbs] : cb.adj)
            if (nbs.size() == 1 && !used[id]) pieces.push_back(walk(id));
        for (const auto& [id, nbs] : cb.adj)
            if (!used[id]) pieces.push_back(walk(id));

        NodalCurve curve;
        curve.i = i;
        curve.j = j;
        for (auto& piece : pieces) {
            unwrap_theta(piece);
            if (piece.front().y > piece.back().y) std::reverse(piece.begin(), piece.end());
        }
        std::sort(pieces.begin(), pieces.end(),
                  [](const auto& x, const auto& y) { return x.front().y < y.front().y; });
        // join pieces whose ends are within 2 cells
        const double gap = 2.0 * std::max(g.dtheta(), g.dy()) * std::sqrt(2.0);
        std::vector<std::vector<CurvePoint>> joined;
        for (auto& piece : pieces) {
            if (!joined.empty()) {
                auto& last = joined.back();
                double dth = piece.front().theta - last.back().theta;
                const double shift = kTwoPi * std::round(dth / kTwoPi);
                dth -= shift;
                const double dyy = piece.front().y - last.back().y;
                if (std::hypot(dth, dyy) <= gap) {
                    for (auto q : piece) {
                        q.theta -= shift;
                        last.push_back(q);
                    }
                    continue;
                }
            }
            joined.push_back(std::move(piece));
        }
        if (joined.size() > 1) {
            curve.partial = true;
            curve.fragments = joined;
            auto longest = std::max_element(joined.begin(), joined.end(),
                                            [](const auto& x, const auto& y) { return x.size() < y.size(); });
            curve.points = *longest;
        } else if (joined.size() == 1) {
            curve.points = std::move(joined.front());
        }
        curves.push_back(std::move(curve));
    }
    return curves;
}

SingularReport locate_singular_point(const MultiplicityMap& mmap) {
    const StripGrid& g = mmap.grid;
    const int nt = g.n_theta(), ny = g.n_y();
    std::vector<int> label(g.size(), -1);
    SingularReport report;
    std::vector<std::size_t> stack;
    for (std::size_t seed = 0; seed < g.size(); ++seed) {
        if (mmap.m[seed] < 3 || label[seed] >= 0) continue;
        const int id = static_cast<int>(report.clusters.size());
        std::vector<CartesianPoint> pts;
        SingularCluster c;
        c.min_row = ny;
        c.max_row = -1;
        double sx = 0.0, sy = 0.0;
        stack.assign(1, seed);
        label[seed] = id;
        while (!stack.empty()) {
            const std::size_t n = stack.back();
            stack.pop_back();
            const int i = static_cast<int>(n % nt), j = static_cast<int>(n / nt);
            const CartesianPoint p = to_cartesian(g.theta(i), g.y(j));
            pts.push_back(p);
            sx += p.x;
            sy += p.y;
            c.min_row = std::min(c.min_row, j);
            c.max_row = std::max(c.max_row, j);
            const std::array<std::array<int, 2>, 4> nb{{{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}}};
            for (const auto& q : nb) {
                if (q[1] < 0 || q[1] >= ny) continue;
                const std::size_t m = g.index(q[0], q[1]);
                if (mmap.m[m] >= 3 && label[m] < 0) {
                    label[m] = id;
                    stack.push_back(m);
                }
            }
        }
        c.nodes = pts.size();
        c.centroid = {sx / pts.size(), sy / pts.size()};
        const double rc = std::hypot(c.centroid.x, c.centroid.y);
        if (rc > 0.0) {
            c.strip_centroid = from_cartesian(c.centroid);
        } else {
            c.strip_centroid = {0.0, std::numeric_limits<double>::infinity()};
        }
        for (const auto& p : pts)
            c.outer_radius = std::max(c.outer_radius, std::hypot(p.x - c.centroid.x, p.y - c.centroid.y));
        const auto hull = convex_hull(std::move(pts));
        for (std::size_t a = 0; a < hull.size(); ++a)
            for (std::size_t b = a + 1; b < hull.size(); ++b)
                c.extent = std::max(c.extent, std::hypot(hull[a].x - hull[b].x, hull[a].y - hull[b].y));
        report.clusters.push_back(c);
    }
    std::sort(report.clusters.begin(), report.clusters.end(),
              [](const SingularCluster& x, const SingularCluster& y) { return x.nodes > y.nodes; });
    return report;
}

bool near_origin(const SingularCluster& c, const StripGrid& grid, double cells) {
    const double d = std::hypot(c.centroid.x, c.centroid.y);
    // cell size measured where the cluster sits, never below the innermost row
    const double r = std::max(c.outer_radius, grid.r_min());
    return d <= cells * r * std::max(grid.dtheta(), grid.dy());
}

NodeMask exclusion_mask(const StripGrid& grid, const SingularReport& report, int rho) {
    NodeMask mask(grid.size(), 1);
    for (const auto& c : report.clusters) {
        const double cell = std::max(c.outer_radius, grid.r_min()) * std::max(grid.dtheta(), grid.dy());
        const double radius = c.outer_radius + rho * cell;
        for (int j = 0; j < grid.n_y(); ++j)
            for (int i = 0; i < grid.n_theta(); ++i) {
                const CartesianPoint p = to_cartesian(grid.theta(i), grid.y(j));
                if (std::hypot(p.x - c.centroid.x, p.y - c.centroid.y) <= radius) mask[grid.index(i, j)] = 0;
            }
    }
    return mask;
}

}  // namespace spiralseg
