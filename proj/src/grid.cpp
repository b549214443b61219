#include "spiralseg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spiralseg {

StripGrid::StripGrid(int n_theta, int n_y, double y_max)
    : n_theta_(n_theta), n_y_(n_y), y_max_(y_max) {
    if (n_theta < 16 || n_theta % 2 != 0)
        throw std::invalid_argument("n_theta must be even and >= 16, got " + std::to_string(n_theta));
    if (n_y < 2)
        throw std::invalid_argument("n_y must be >= 2, got " + std::to_string(n_y));
    if (!(y_max > 0.0) || !std::isfinite(y_max))
        throw std::invalid_argument("y_max must be positive and finite");
    dtheta_ = 2.0 * std::numbers::pi / n_theta;
    dy_ = y_max / (n_y - 1);
}

double StripGrid::r_min() const { return std::exp(-y_max_); }
double StripGrid::r(int j) const { return std::exp(-y(j)); }

StripGrid build_grid(int n_theta, int n_y, double y_max) { return StripGrid(n_theta, n_y, y_max); }

CartesianPoint to_cartesian(double theta, double y) {
    const double r = std::exp(-y);
    return {r * std::cos(theta), r * std::sin(theta)};
}

CartesianPoint to_cartesian(StripPoint p) { return to_cartesian(p.theta, p.y); }

StripPoint from_cartesian(CartesianPoint p) {
    const double r = std::hypot(p.x, p.y);
    if (r == 0.0) throw std::domain_error("from_cartesian: the origin has no strip preimage");
    double theta = std::atan2(p.y, p.x);
    if (theta < 0.0) theta += 2.0 * std::numbers::pi;
    if (theta >= 2.0 * std::numbers::pi) theta = 0.0;
    return {theta, -std::log(r)};
}

std::string to_string(FieldRole role) {
    switch (role) {
        case FieldRole::Density: return "density";
        case FieldRole::SignedDensity: return "signed";
        case FieldRole::Potential: return "potential";
        case FieldRole::Generic: return "generic";
    }
    return "generic";
}

FieldRole field_role_from_string(const std::string& name) {
    if (name == "density") return FieldRole::Density;
    if (name == "signed") return FieldRole::SignedDensity;
    if (name == "potential") return FieldRole::Potential;
    if (name == "generic") return FieldRole::Generic;
    throw std::invalid_argument("unknown field role '" + name + "'");
}

Field::Field(StripGrid grid, FieldRole role, double fill)
    : grid_(grid), role_(role), values_(grid.size(), fill) {}

Field::Field(StripGrid grid, FieldRole role, std::vector<double> values)
    : grid_(grid), role_(role), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field value count " + std::to_string(values_.size()) +
                                    " does not match grid size " + std::to_string(grid_.size()));
}

std::span<double> Field::row(int j) {
    return std::span<double>(values_).subspan(static_cast<std::size_t>(j) * grid_.n_theta(),
                                              grid_.n_theta());
}

std::span<const double> Field::row(int j) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(j) * grid_.n_theta(),
                                                    grid_.n_theta());
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

Field disk_laplacian_rhs_factor(const StripGrid& grid) {
    Field f(grid, FieldRole::Potential);
    for (int j = 0; j < grid.n_y(); ++j) {
        const double factor = std::exp(-2.0 * grid.y(j));
        for (double& v : f.row(j)) v = factor;
    }
    return f;
}

Field strip_laplacian(const Field& v) {
    const StripGrid& g = v.grid();
    Field out(g, FieldRole::Generic);
    const double ct = 1.0 / (g.dtheta() * g.dtheta());
    const double cy = 1.0 / (g.dy() * g.dy());
    for (int j = 1; j + 1 < g.n_y(); ++j) {
        for (int i = 0; i < g.n_theta(); ++i) {
            const double c = v(i, j);
            out(i, j) = ct * (v(i - 1, j) - 2.0 * c + v(i + 1, j)) +
                        cy * (v(i, j - 1) - 2.0 * c + v(i, j + 1));
        }
    }
    return out;
}

}  // namespace spiralseg
