#include "spiralseg/spiral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace spiralseg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("degenerate regression: abscissae coincide");
    Line l;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (l.intercept + l.slope * x[i]);
        ss += r * r;
    }
    l.rms = std::sqrt(ss / n);
    return l;
}

void check_window(FitWindow w) {
    if (!(w.y_hi > w.y_lo) || w.y_lo < 0.0) throw std::invalid_argument("fit window needs 0 <= y_lo < y_hi");
}

// bilinear sample in (theta, y) index space, theta periodic
double sample(const Field& U, double theta, double y) {
    const StripGrid& g = U.grid();
    const double fi = theta / g.dtheta();
    const double fj = y / g.dy();
    if (fj < 0.0 || fj > g.n_y() - 1) return 0.0;
    const int i0 = static_cast<int>(std::floor(fi));
    const int j0 = std::min(static_cast<int>(std::floor(fj)), g.n_y() - 2);
    const double ti = fi - i0, tj = fj - j0;
    return (1 - ti) * (1 - tj) * U(i0, j0) + ti * (1 - tj) * U(i0 + 1, j0) + (1 - ti) * tj * U(i0, j0 + 1) +
           ti * tj * U(i0 + 1, j0 + 1);
}

}  // namespace

SpiralFit fit_spiral(const NodalCurve& curve, FitWindow window, int h) {
    check_window(window);
    SpiralFit f;
    f.i = curve.i;
    f.j = curve.j;
    f.window = window;
    std::vector<CurvePoint> pts;
    for (const auto& p : curve.points)
        if (p.y >= window.y_lo && p.y <= window.y_hi) pts.push_back(p);

    for (std::size_t n = 1; n < pts.size(); ++n)
        if (pts[n].y < pts[n - 1].y) f.reparameterized = true;
    if (f.reparameterized) {
        // average theta over equal-width y bins
        const int bins = std::max<int>(10, static_cast<int>(pts.size()) / 2);
        const double w = (window.y_hi - window.y_lo) / bins;
        std::vector<double> st(bins, 0.0), sy(bins, 0.0);
        std::vector<int> cnt(bins, 0);
        for (const auto& p : pts) {
            const int b = std::min(bins - 1, static_cast<int>((p.y - window.y_lo) / w));
            st[b] += p.theta;
            sy[b] += p.y;
            ++cnt[b];
        }
        pts.clear();
        for (int b = 0; b < bins; ++b)
            if (cnt[b] > 0) pts.push_back({st[b] / cnt[b], sy[b] / cnt[b]});
    }
    f.points = static_cast<int>(pts.size());
    if (f.points < 10)
        throw std::invalid_argument("fit_spiral: only " + std::to_string(f.points) + " points in window");
    std::vector<double> x, y;
    for (const auto& p : pts) {
        x.push_back(p.y);
        y.push_back(p.theta);
    }
    const Line l = least_squares(x, y);
    f.slope = l.slope;
    f.intercept = l.intercept;
    f.rms = l.rms;
    f.alpha_fit = -0.5 * h * l.slope;
    return f;
}

std::vector<double> circle_maxima(const Field& U, CartesianPoint center, const std::vector<double>& ys) {
    const StripGrid& g = U.grid();
    std::vector<double> out;
    const bool origin = center.x == 0.0 && center.y == 0.0;
    for (double y : ys) {
        double m = 0.0;
        if (origin) {
            const int j = static_cast<int>(std::lround(y / g.dy()));
            for (double v : U.row(std::clamp(j, 0, g.n_y() - 1))) m = std::max(m, std::abs(v));
        } else {
            const double r = std::exp(-y);
            for (int i = 0; i < g.n_theta(); ++i) {
                const double t = g.theta(i);
                const CartesianPoint p{center.x + r * std::cos(t), center.y + r * std::sin(t)};
                const double rp = std::hypot(p.x, p.y);
                if (rp > 1.0 || rp < g.r_min()) continue;
                const StripPoint s = from_cartesian(p);
                m = std::max(m, std::abs(sample(U, s.theta, s.y)));
            }
        }
        out.push_back(m);
    }
    return out;
}

namespace {

std::vector<double> window_rows(const StripGrid& g, FitWindow w) {
    std::vector<double> ys;
    for (int j = 0; j < g.n_y(); ++j)
        if (g.y(j) >= w.y_lo - 1e-12 && g.y(j) <= w.y_hi + 1e-12) ys.push_back(g.y(j));
    return ys;
}

}  // namespace

OrderFit vanishing_order(const Field& U, CartesianPoint center, FitWindow window) {
    check_window(window);
    const StripGrid& g = U.grid();
    const auto ys = window_rows(g, window);
    const auto M = circle_maxima(U, center, ys);
    const double floor = 1e-13 * std::max(U.max_abs(), std::numeric_limits<double>::min());
    std::vector<double> x, y;
    OrderFit f;
    for (std::size_t n = 0; n < ys.size(); ++n) {
        if (M[n] > floor) {
            x.push_back(-ys[n]);  // log r
            y.push_back(std::log(M[n]));
        } else {
            f.shrunk = true;
        }
    }
    if (x.size() < 3) throw std::invalid_argument("vanishing_order: fewer than 3 usable circles in window");
    const Line l = least_squares(x, y);
    f.nu = l.slope;
    f.intercept = l.intercept;
    f.rms = l.rms;
    f.rows = static_cast<int>(x.size());
    f.window = {-x.front(), -x.back()};
    if (f.window.y_lo > f.window.y_hi) std::swap(f.window.y_lo, f.window.y_hi);
    return f;
}

std::optional<double> curve_theta_at(const NodalCurve& curve, double y) {
    const auto& p = curve.points;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (p[n].y == y) return p[n].theta;
        if (n + 1 < p.size() && (p[n].y - y) * (p[n + 1].y - y) < 0.0) {
            const double t = (y - p[n].y) / (p[n + 1].y - p[n].y);
            return p[n].theta + t * (p[n + 1].theta - p[n].theta);
        }
    }
    return std::nullopt;
}

AngleCheck equal_angle_check(const std::vector<NodalCurve>& curves, double y_row, int h) {
    AngleCheck c;
    for (const auto& curve : curves) {
        if (auto t = curve_theta_at(curve, y_row)) {
            double r = std::fmod(*t, kTwoPi);
            if (r < 0.0) r += kTwoPi;
            c.crossings.push_back(r);
        }
    }
    std::sort(c.crossings.begin(), c.crossings.end());
    c.complete = static_cast<int>(c.crossings.size()) == h;
    const std::size_t n = c.crossings.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double next = i + 1 < n ? c.crossings[i + 1] : c.crossings[0] + kTwoPi;
        c.gaps.push_back(next - c.crossings[i]);
    }
    const double target = kTwoPi / h;
    for (double gap : c.gaps) c.max_deviation = std::max(c.max_deviation, std::abs(gap - target));
    if (!c.complete && n > 0) c.max_deviation = std::max(c.max_deviation, target);
    return c;
}

AmplitudeProfile amplitude_profile(const Field& U, double nu, CartesianPoint center, FitWindow window) {
    check_window(window);
    const auto ys = window_rows(U.grid(), window);
    if (ys.empty()) throw std::invalid_argument("amplitude_profile: window contains no rows");
    const auto M = circle_maxima(U, center, ys);
    AmplitudeProfile a{std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t n = 0; n < ys.size(); ++n) {
        const double v = M[n] * std::exp(nu * ys[n]);
        a.a_min = std::min(a.a_min, v);
        a.a_max = std::max(a.a_max, v);
    }
    return a;
}

}  // namespace spiralseg
