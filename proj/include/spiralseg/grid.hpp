#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace spiralseg {

/// Strip coordinates (theta, y) of the punctured unit disk, with r = exp(-y).
struct StripPoint {
    double theta = 0.0;
    double y = 0.0;
};

struct CartesianPoint {
    double x = 0.0;
    double y = 0.0;
};

/**
 * Log-polar discretization of the unit disk.
 *
 * Node (i, j) sits at theta_i = i * dtheta, y_j = j * dy. The theta index is
 * periodic; row j = 0 is the unit circle and row j = n_y - 1 is the inner
 * truncation circle r_min = exp(-y_max). Values are stored row-major, so a
 * grid row (a full circle) is contiguous.
 */
class StripGrid {
public:
    StripGrid(int n_theta, int n_y, double y_max);

    int n_theta() const { return n_theta_; }
    int n_y() const { return n_y_; }
    double y_max() const { return y_max_; }
    double dtheta() const { return dtheta_; }
    double dy() const { return dy_; }
    double r_min() const;

    double theta(int i) const { return i * dtheta_; }
    double y(int j) const { return j * dy_; }
    double r(int j) const;

    std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_y_; }
    int wrap(int i) const {
        const int m = i % n_theta_;
        return m < 0 ? m + n_theta_ : m;
    }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * n_theta_ + wrap(i);
    }

    bool operator==(const StripGrid&) const = default;

private:
    int n_theta_;
    int n_y_;
    double y_max_;
    double dtheta_;
    double dy_;
};

StripGrid build_grid(int n_theta, int n_y, double y_max);

CartesianPoint to_cartesian(double theta, double y);
CartesianPoint to_cartesian(StripPoint p);

/// Inverse of to_cartesian with theta in [0, 2*pi). Throws std::domain_error at the origin.
StripPoint from_cartesian(CartesianPoint p);

enum class FieldRole { Density, SignedDensity, Potential, Generic };

std::string to_string(FieldRole role);
FieldRole field_role_from_string(const std::string& name);

/// Scalar values on a StripGrid.
class Field {
public:
    explicit Field(StripGrid grid, FieldRole role = FieldRole::Generic, double fill = 0.0);
    Field(StripGrid grid, FieldRole role, std::vector<double> values);

    const StripGrid& grid() const { return grid_; }
    FieldRole role() const { return role_; }
    void set_role(FieldRole role) { role_ = role; }

    double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    std::span<double> row(int j);
    std::span<const double> row(int j) const;

    double min() const;
    double max() const;
    double max_abs() const;

private:
    StripGrid grid_;
    FieldRole role_;
    std::vector<double> values_;
};

/// exp(-2 y_j) at every node: the factor turning -Lap_disk u = f into
/// -Lap_strip v = exp(-2y) f on the strip.
Field disk_laplacian_rhs_factor(const StripGrid& grid);

/// Five-point strip Laplacian v_theta_theta + v_yy on interior rows; boundary rows are 0.
Field strip_laplacian(const Field& v);

}  // namespace spiralseg
