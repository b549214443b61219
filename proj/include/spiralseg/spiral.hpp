#pragma once

#include <optional>
#include <vector>

#include "spiralseg/grid.hpp"
#include "spiralseg/segregation.hpp"

namespace spiralseg {

struct FitWindow {
    double y_lo = 2.0;
    double y_hi = 6.0;
};

struct SpiralFit {
    int i = 0;
    int j = 0;
    double slope = 0.0;      // d theta / d y
    double intercept = 0.0;
    double rms = 0.0;        // radians
    double alpha_fit = 0.0;  // -(h/2) slope
    FitWindow window;
    int points = 0;
    bool reparameterized = false;  // y was not monotone along the curve
};

/// Least-squares theta(y) over the window. Throws std::invalid_argument with fewer than 10 points.
SpiralFit fit_spiral(const NodalCurve& curve, FitWindow window, int h);

struct OrderFit {
    double nu = 0.0;
    double intercept = 0.0;  // log M at r = 1
    double rms = 0.0;        // residual of log M
    FitWindow window;        // window actually used
    int rows = 0;
    bool shrunk = false;     // rows below the noise floor were dropped
};

/// Largest |U| on the circle of radius exp(-y) about `center`. Grid rows when
/// the center is the origin, bilinear resampling in strip coordinates otherwise.
std::vector<double> circle_maxima(const Field& U, CartesianPoint center, const std::vector<double>& ys);

/// Regression of log M(r) on log r over the window.
OrderFit vanishing_order(const Field& U, CartesianPoint center, FitWindow window);

struct AngleCheck {
    std::vector<double> crossings;  // reduced to [0, 2 pi), sorted
    std::vector<double> gaps;
    double max_deviation = 0.0;     // radians, from 2 pi / h
    bool complete = false;
};

AngleCheck equal_angle_check(const std::vector<NodalCurve>& curves, double y_row, int h);

/// theta where the polyline crosses y (first crossing from y = 0), if any.
std::optional<double> curve_theta_at(const NodalCurve& curve, double y);

struct AmplitudeProfile {
    double a_min = 0.0;
    double a_max = 0.0;
};

/// min and max of M(r) / r^nu over the window.
AmplitudeProfile amplitude_profile(const Field& U, double nu, CartesianPoint center, FitWindow window);

}  // namespace spiralseg
