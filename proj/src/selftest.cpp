#include "spiralseg/selftest.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "spiralseg/segregation.hpp"
#include "spiralseg/spectral.hpp"
#include "spiralseg/spiral.hpp"

namespace spiralseg {

namespace {

constexpr double kPi = std::numbers::pi;

std::string num(double v) {
    std::ostringstream o;
    o.precision(10);
    o << v;
    return o.str();
}

double harmonic_error(int n, int k) {
    StripGrid g(n, n, 4.0);
    Field v(g);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_theta(); ++i) v(i, j) = std::exp(-k * g.y(j)) * std::cos(k * g.theta(i) + 0.3);
    return strip_laplacian(v).max_abs();
}

}  // namespace

std::vector<ConstantsRow> reference_constants() {
    return {
        {"symmetric", 1.0, 0.0},
        {"cyclic:4", 64.0, 3.0 * std::log(4.0) / (2.0 * kPi)},
        {"cyclic:10", 1000.0, 3.0 * std::log(10.0) / (2.0 * kPi)},
    };
}

SelftestResult check_constants(const std::vector<ConstantsRow>& table, double rel) {
    SelftestResult r{"constants", true, {}};
    for (const auto& row : table) {
        const auto a = CompetitionMatrix::from_preset(3, row.preset);
        const double l = lambda_of(a), al = alpha_of_matrix(a);
        const bool ok_l = std::abs(l - row.lambda) <= rel * std::abs(row.lambda);
        const bool ok_a = row.alpha == 0.0 ? std::abs(al) <= rel : std::abs(al - row.alpha) <= rel * std::abs(row.alpha);
        if (!ok_l || !ok_a) {
            r.pass = false;
            r.detail += row.preset + ": lambda " + num(l) + " alpha " + num(al) + "; ";
        }
    }
    if (r.pass) r.detail = "lambda, alpha match for " + std::to_string(table.size()) + " matrices";
    return r;
}

SystemState synthetic_expansion_state(const StripGrid& grid, int h, double alpha, double nu,
                                      const std::vector<double>& weights) {
    if (static_cast<int>(weights.size()) != h) throw std::invalid_argument("one weight per species required");
    SystemState s;
    for (int i = 0; i < h; ++i) s.fields.emplace_back(grid, FieldRole::Density);
    for (int j = 0; j < grid.n_y(); ++j) {
        const double amp = std::exp(-nu * grid.y(j));
        for (int i = 0; i < grid.n_theta(); ++i) {
            const double phase = 0.5 * h * grid.theta(i) + alpha * grid.y(j);
            // nodal regions are the intervals (pi/2 + (m-1) pi, pi/2 + m pi) of the phase
            const long m = static_cast<long>(std::floor((phase + 0.5 * kPi) / kPi));
            const int species = static_cast<int>(((m % h) + h) % h);
            s.fields[species](i, j) = amp * std::abs(std::cos(phase)) / std::abs(weights[species]);
        }
    }
    s.residual.assign(h, 0.0);
    s.converged = true;
    return s;
}

SelftestResult check_grid_roundtrip() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> th(0.0, 2.0 * kPi), yy(0.0, 12.0);
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
        const double t = th(rng), y = yy(rng);
        const StripPoint p = from_cartesian(to_cartesian(t, y));
        double dt = std::abs(p.theta - t);
        dt = std::min(dt, 2.0 * kPi - dt);
        worst = std::max({worst, dt, std::abs(p.y - y)});
    }
    return {"grid_roundtrip", worst <= 1e-12, "max error " + num(worst)};
}

SelftestResult check_harmonic_order() {
    SelftestResult r{"harmonic_order", true, {}};
    for (int k = 1; k <= 3; ++k) {
        const double e1 = harmonic_error(64, k), e2 = harmonic_error(128, k);
        const double order = std::log2(e1 / e2);
        r.detail += "k=" + std::to_string(k) + " order " + num(order) + "; ";
        if (order < 1.8) r.pass = false;
    }
    return r;
}

SelftestResult check_fourier_roundtrip(int n) {
    const double alpha = 0.5;
    const std::vector<HarmonicMode> modes{{3, 1.0, 0.0}, {5, 0.0, 0.3}};
    StripGrid g(n, n, 8.0);
    const Field v = synth_harmonic(g, alpha, modes);
    Field w(g);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_theta(); ++i) w(i, j) = std::exp(-alpha * g.theta(i)) * v(i, j);
    const FourierTable t = fourier_rows(w, alpha);
    double err = 0.0;
    for (const auto& m : t.modes) {
        double ea = m.a, eb = m.b;
        for (const auto& ref : modes)
            if (ref.k == m.k) {
                ea -= ref.a;
                eb -= ref.b;
            }
        err = std::max({err, std::abs(ea), std::abs(eb)});
    }
    const NiceBadSplit split = nice_bad_split(t);
    double parseval = 0.0;
    for (double p : t.parseval_error) parseval = std::max(parseval, p);
    const double lambda = std::exp(2.0 * kPi * alpha);
    double period = 0.0;
    for (int j = 0; j < g.n_y(); j += 37)
        for (int i = 0; i < g.n_theta(); i += 29) {
            const double x = g.theta(i), y = g.y(j);
            const double a = synth_value(alpha, modes, x + 2.0 * kPi, y), b = lambda * synth_value(alpha, modes, x, y);
            double size = 0.0;
            for (const auto& m : modes) size += (std::abs(m.a) + std::abs(m.b)) * std::exp(alpha * x - m.k * y);
            period = std::max(period, std::abs(a - b) / (lambda * size));
        }
    const bool ok = err <= 1e-8 && split.e_bad <= 1e-12 && parseval <= 1e-10 && period <= 1e-13 && split.kbar == 3;
    return {"fourier_roundtrip", ok,
            "coefficient error " + num(err) + ", E_bad " + num(split.e_bad) + ", kbar " + std::to_string(split.kbar) +
                ", parseval " + num(parseval) + ", period " + num(period)};
}

SelftestResult check_synthetic_spiral(int n) {
    const int h = 3;
    const auto a = CompetitionMatrix::cyclic(3, 4.0);
    const double alpha = alpha_of_matrix(a);
    const double nu = predicted_nu(h, alpha);
    StripGrid g(n, n, 8.0);
    const SystemState s = synthetic_expansion_state(g, h, alpha, nu, weights_U(a));
    const MultiplicityMap mm = multiplicity_map(s);
    const auto curves = extract_nodal_curves(s, a, mm);
    const FitWindow win{2.0, 6.0};
    double worst_alpha = 0.0;
    int fitted = 0;
    for (const auto& c : curves) {
        try {
            const SpiralFit f = fit_spiral(c, win, h);
            worst_alpha = std::max(worst_alpha, std::abs(f.alpha_fit - alpha) / alpha);
            ++fitted;
        } catch (const std::invalid_argument&) {
        }
    }
    const WeightedDensity U = build_U(s, weights_U(a));
    const OrderFit o = vanishing_order(U.U, {0.0, 0.0}, win);
    const double nu_err = std::abs(o.nu - nu) / nu;
    const double slope = std::abs(2.0 * alpha / h - std::log(4.0) / kPi);
    const bool ok = fitted == h && worst_alpha <= 0.01 && nu_err <= 0.01 && slope <= 1e-7;
    return {"synthetic_spiral", ok,
            std::to_string(fitted) + " curves, alpha rel err " + num(worst_alpha) + ", nu rel err " + num(nu_err) +
                ", |2a/h - log4/pi| " + num(slope)};
}

SelftestResult check_synthetic_symmetric(int n) {
    const int h = 3;
    const auto a = CompetitionMatrix::symmetric(3);
    StripGrid g(n, n, 8.0);
    const SystemState s = synthetic_expansion_state(g, h, 0.0, 1.5, weights_U(a));
    const auto curves = extract_nodal_curves(s, a, multiplicity_map(s));
    const AngleCheck ang = equal_angle_check(curves, 3.0, h);
    double worst = 0.0;
    int fitted = 0;
    for (const auto& c : curves) {
        try {
            worst = std::max(worst, std::abs(fit_spiral(c, {2.0, 6.0}, h).alpha_fit));
            ++fitted;
        } catch (const std::invalid_argument&) {
        }
    }
    const bool ok = fitted == h && worst <= 1e-6 && ang.complete && ang.max_deviation <= 1e-6;
    return {"synthetic_symmetric", ok,
            "max |alpha_fit| " + num(worst) + ", angle deviation " + num(ang.max_deviation)};
}

std::vector<SelftestResult> run_selftest() {
    return {check_constants(reference_constants()), check_grid_roundtrip(), check_harmonic_order(),
            check_fourier_roundtrip(), check_synthetic_spiral(), check_synthetic_symmetric()};
}

}  // namespace spiralseg
