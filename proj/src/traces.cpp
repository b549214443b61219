#include "spiralseg/traces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace spiralseg {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double reduce_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

// Distance around the circle.
double circle_distance(double a, double b) {
    const double d = std::abs(reduce_angle(a) - reduce_angle(b));
    return std::min(d, kTwoPi - d);
}

}  // namespace

TraceSpec::TraceSpec(int h, std::function<double(double)> profile, std::vector<double> zeros)
    : h_(h), profile_(std::move(profile)), zeros_(std::move(zeros)) {
    if (h < 3)
        throw std::invalid_argument("a multiple point needs h >= 3 species, got " + std::to_string(h));
    if (static_cast<int>(zeros_.size()) != h)
        throw std::invalid_argument("trace profile must have exactly h zeros, got " +
                                    std::to_string(zeros_.size()));
    for (double& z : zeros_) z = reduce_angle(z);
    std::sort(zeros_.begin(), zeros_.end());
    for (std::size_t m = 1; m < zeros_.size(); ++m)
        if (zeros_[m] - zeros_[m - 1] <= 0.0)
            throw std::invalid_argument("trace zeros must be distinct");
    // Arc m runs from zeros_[m] to zeros_[m + 1]; the last one wraps through theta = 0.
    first_arc_ = zeros_.front() == 0.0 ? 0 : h_ - 1;
}

double TraceSpec::total(double theta) const { return profile_(reduce_angle(theta)); }

std::pair<double, double> TraceSpec::arc(int species) const {
    if (species < 0 || species >= h_) throw std::out_of_range("species index out of range");
    const int m = (first_arc_ + species) % h_;
    const double start = zeros_[m];
    double end = m + 1 < h_ ? zeros_[m + 1] : zeros_.front() + kTwoPi;
    return {start, end};
}

int TraceSpec::owner(double theta) const {
    const double t = reduce_angle(theta);
    // Arc m (start zeros_[m]) contains t when zeros_[m] <= t < zeros_[m + 1].
    const auto it = std::upper_bound(zeros_.begin(), zeros_.end(), t);
    const int m = it == zeros_.begin() ? h_ - 1 : static_cast<int>(it - zeros_.begin()) - 1;
    return ((m - first_arc_) % h_ + h_) % h_;
}

double TraceSpec::value(int species, double theta) const {
    return owner(theta) == species ? total(theta) : 0.0;
}

TraceSpec make_sector_traces(int h) {
    if (h < 3)
        throw std::invalid_argument("a multiple point needs h >= 3 species, got " + std::to_string(h));
    std::vector<double> zeros;
    for (int m = 0; m < h; ++m) zeros.push_back(std::numbers::pi / h + kTwoPi * m / h);
    const double half = 0.5 * h;
    return TraceSpec(h, [half](double t) { return std::abs(std::cos(half * t)); }, zeros);
}

TraceSpec make_table_traces(int h, std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw std::invalid_argument("trace table needs at least two samples");
    for (auto& [t, v] : table) {
        t = reduce_angle(t);
        if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("trace table values must be >= 0");
    }
    std::sort(table.begin(), table.end());
    std::vector<double> zeros;
    for (const auto& [t, v] : table)
        if (v == 0.0) zeros.push_back(t);
    auto profile = [table](double t) {
        const auto it = std::upper_bound(table.begin(), table.end(), std::make_pair(t, 1e300));
        const auto& hi = it == table.end() ? table.front() : *it;
        const auto& lo = it == table.begin() ? table.back() : *(it - 1);
        double t_lo = lo.first, t_hi = hi.first;
        if (t_hi <= t_lo) t_hi += kTwoPi;
        double tt = t;
        if (tt < t_lo) tt += kTwoPi;
        const double w = (tt - t_lo) / (t_hi - t_lo);
        return (1.0 - w) * lo.second + w * hi.second;
    };
    return TraceSpec(h, profile, zeros);
}

std::vector<std::vector<double>> sample_traces(const TraceSpec& spec, const StripGrid& grid) {
    std::vector<std::vector<double>> rows(spec.h(), std::vector<double>(grid.n_theta(), 0.0));
    for (int i = 0; i < grid.n_theta(); ++i) {
        const double t = grid.theta(i);
        rows[spec.owner(t)][i] = spec.total(t);
    }
    return rows;
}

NondegeneracyReport validate_nondegeneracy(const TraceSpec& spec, int samples, double c_min) {
    if (samples < 1) throw std::invalid_argument("validate_nondegeneracy needs samples >= 1");
    NondegeneracyReport report;
    report.min_slope = std::numeric_limits<double>::infinity();
    const double gap = [&] {
        double g = kTwoPi;
        const auto& z = spec.zeros();
        for (std::size_t m = 0; m < z.size(); ++m)
            g = std::min(g, m + 1 < z.size() ? z[m + 1] - z[m] : z.front() + kTwoPi - z[m]);
        return g;
    }();
    const double delta = gap / (8.0 * samples);
    for (double z0 : spec.zeros()) {
        double worst = std::numeric_limits<double>::infinity();
        double finest = std::numeric_limits<double>::infinity();
        double off = 0.25 * gap;
        for (int m = 1; m <= samples; ++m, off *= 0.5) {
            for (int side : {-1, 1}) {
                const double q = spec.total(z0 + side * off) / off;
                worst = std::min(worst, q);
                if (m == samples) finest = std::min(finest, q);
            }
        }
        report.zeros.push_back({z0, finest});
        if (finest < report.min_slope) report.min_slope = finest;
        if (worst < c_min && report.ok) {
            report.ok = false;
            report.failure_theta = z0;
            std::ostringstream msg;
            msg << "degenerate zero at theta=" << z0 << " (quotient " << worst << " < " << c_min << ")";
            report.message = msg.str();
        }
    }
    const int n_scan = 64 * samples * spec.h();
    for (int s = 0; s < n_scan && report.ok; ++s) {
        const double t = kTwoPi * s / n_scan;
        bool near_zero = false;
        for (double z0 : spec.zeros()) near_zero = near_zero || circle_distance(t, z0) < delta;
        if (!near_zero && spec.total(t) <= 0.0) {
            report.ok = false;
            report.failure_theta = t;
            report.message = "trace vanishes away from its declared zeros at theta=" + std::to_string(t);
        }
    }
    return report;
}

}  // namespace spiralseg
