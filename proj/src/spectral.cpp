#include "spiralseg/spectral.hpp"

#include <fftw3.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace spiralseg {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double lambda_of(const CompetitionMatrix& a) {
    const int k = a.k();
    double l = a(k - 1, 0) / a(0, k - 1);
    for (int j = 1; j < k; ++j) l *= a(j - 1, j) / a(j, j - 1);
    return l;
}

double alpha_of(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    return std::log(lambda) / kTwoPi;
}

double alpha_of_matrix(const CompetitionMatrix& a) { return alpha_of(lambda_of(a)); }

double predicted_nu(int h, double alpha) {
    if (h < 3) throw std::invalid_argument("predicted_nu needs h >= 3");
    return 0.5 * h + 2.0 * alpha * alpha / h;
}

std::vector<double> weights_U(const CompetitionMatrix& a) {
    std::vector<double> w(a.k());
    w[0] = 1.0;
    double p = 1.0;
    for (int i = 1; i < a.k(); ++i) {
        p *= a(i - 1, i) / a(i, i - 1);
        w[i] = (i % 2 ? -1.0 : 1.0) * p;
    }
    return w;
}

SpectralConstants spectral_constants(const CompetitionMatrix& a, int h) {
    SpectralConstants c;
    c.h = h;
    c.lambda = lambda_of(a);
    c.alpha = alpha_of(c.lambda);
    c.nu = predicted_nu(h, c.alpha);
    c.weights = weights_U(a);
    c.doubled = h % 2 != 0;
    c.h_eff = c.doubled ? 2 * h : h;
    c.lambda_eff = c.doubled ? c.lambda * c.lambda : c.lambda;
    c.alpha_eff = alpha_of(c.lambda_eff);
    c.nu_eff = predicted_nu(c.h_eff, c.alpha_eff);
    return c;
}

WeightedDensity build_U(const SystemState& state, const std::vector<double>& weights, double threshold) {
    if (static_cast<int>(weights.size()) != state.k())
        throw std::invalid_argument("build_U: one weight per species required");
    const StripGrid& g = state.grid();
    WeightedDensity out{Field(g, FieldRole::SignedDensity), 0};
    auto U = out.U.values();
    for (std::size_t n = 0; n < g.size(); ++n) {
        int best = 0, above = 0;
        double bv = -1.0;
        for (int s = 0; s < state.k(); ++s) {
            const double v = state.fields[s].values()[n];
            if (v > threshold) ++above;
            if (v > bv) {
                bv = v;
                best = s;
            }
        }
        if (above >= 2) ++out.ambiguous;
        U[n] = bv > threshold ? weights[best] * bv : 0.0;
    }
    return out;
}

double synth_value(double alpha, const std::vector<HarmonicMode>& modes, double x, double y) {
    double v = 0.0;
    for (const auto& m : modes) {
        const double ph = m.k * x + alpha * y;
        v += (m.a * std::cos(ph) + m.b * std::sin(ph)) * std::exp(alpha * x - m.k * y);
    }
    return v;
}

Field synth_harmonic(const StripGrid& grid, double alpha, const std::vector<HarmonicMode>& modes) {
    Field f(grid, FieldRole::Generic);
    for (int j = 0; j < grid.n_y(); ++j)
        for (int i = 0; i < grid.n_theta(); ++i) f(i, j) = synth_value(alpha, modes, grid.theta(i), grid.y(j));
    return f;
}

std::complex<double> FourierTable::coefficient(std::size_t row, int k) const {
    if (std::abs(k) > kmax) return 0.0;
    return k >= 0 ? W[row][k] : std::conj(W[row][-k]);
}

FourierTable fourier_rows(const Field& w, double alpha, double seam_factor) {
    const StripGrid& g = w.grid();
    const int n = g.n_theta();
    FourierTable t;
    t.alpha = alpha;
    t.kmax = n / 2;

    auto in = std::unique_ptr<double, decltype(&fftw_free)>(fftw_alloc_real(n), fftw_free);
    auto out = std::unique_ptr<fftw_complex, decltype(&fftw_free)>(fftw_alloc_complex(n / 2 + 1), fftw_free);
    auto plan = std::unique_ptr<fftw_plan_s, decltype(&fftw_destroy_plan)>(
        fftw_plan_dft_r2c_1d(n, in.get(), out.get(), FFTW_ESTIMATE), fftw_destroy_plan);

    const double scale = std::max(w.max_abs(), 1e-300);
    for (int j = 0; j < g.n_y(); ++j) {
        const auto row = w.row(j);
        double interior = 0.0;
        for (int i = 0; i + 1 < n; ++i) interior = std::max(interior, std::abs(row[i + 1] - row[i]));
        const double seam = std::abs(row[0] - row[n - 1]);
        if (seam > seam_factor * interior + 1e-12 * scale) {
            t.rejected_rows.push_back(j);
            continue;
        }
        std::copy(row.begin(), row.end(), in.get());
        fftw_execute(plan.get());
        std::vector<std::complex<double>> c(t.kmax + 1);
        double ms = 0.0, energy = 0.0;
        for (double v : row) ms += v * v;
        ms /= n;
        for (int k = 0; k <= t.kmax; ++k) {
            c[k] = std::complex<double>(out.get()[k][0], out.get()[k][1]) / static_cast<double>(n);
            energy += (k == 0 || k == t.kmax ? 1.0 : 2.0) * std::norm(c[k]);
        }
        t.parseval_error.push_back(ms > 0.0 ? std::abs(energy - ms) / ms : energy);
        t.y.push_back(g.y(j));
        t.W.push_back(std::move(c));
    }
    const int rows = static_cast<int>(t.y.size());
    if (rows < 2) throw std::invalid_argument("fourier_rows: fewer than two rows pass the seam check");

    t.modes.resize(2 * t.kmax + 1);
    for (int k = -t.kmax; k <= t.kmax; ++k) t.modes[k + t.kmax].k = k;

    const double y0 = t.y.front(), y1 = t.y.back();
    using cd = std::complex<double>;
    {
        // k = 0: W_0(y) = a_0 cos(alpha y) + b_0 sin(alpha y)
        Eigen::MatrixXd M(rows, 2);
        Eigen::VectorXd rhs(rows);
        for (int r = 0; r < rows; ++r) {
            M(r, 0) = std::cos(alpha * t.y[r]);
            M(r, 1) = std::sin(alpha * t.y[r]);
            rhs(r) = t.W[r][0].real();
        }
        const Eigen::VectorXd x = M.completeOrthogonalDecomposition().solve(rhs);
        t.modes[t.kmax].a = x(0);
        t.modes[t.kmax].b = x(1);
    }
    for (int k = 1; k <= t.kmax; ++k) {
        Eigen::MatrixXcd M(rows, 2);
        Eigen::VectorXcd rhs(rows);
        for (int r = 0; r < rows; ++r) {
            const double y = t.y[r];
            M(r, 0) = std::exp(k * (y - y1)) * std::exp(cd(0.0, -alpha * y));
            M(r, 1) = std::exp(-k * (y - y0)) * std::exp(cd(0.0, alpha * y));
            rhs(r) = t.W[r][k];
        }
        const Eigen::VectorXcd x = M.completeOrthogonalDecomposition().solve(rhs);
        const cd A = x(0) * std::exp(-k * y1);
        const cd B = x(1) * std::exp(k * y0);
        t.modes[t.kmax + k].a = 2.0 * B.real();
        t.modes[t.kmax + k].b = -2.0 * B.imag();
        t.modes[t.kmax - k].a = 2.0 * A.real();
        t.modes[t.kmax - k].b = 2.0 * A.imag();
    }
    return t;
}

NiceBadSplit nice_bad_split(const FourierTable& table, double rel_threshold) {
    NiceBadSplit s;
    double emax = 0.0;
    for (const auto& m : table.modes) emax = std::max(emax, m.a * m.a + m.b * m.b);
    for (const auto& m : table.modes) {
        const double e = m.a * m.a + m.b * m.b;
        (m.k >= 0 ? s.e_nice : s.e_bad) += e;
        if (emax > 0.0 && e > rel_threshold * emax && (!s.any || m.k < s.kbar)) {
            s.kbar = m.k;
            s.any = true;
        }
    }
    return s;
}

}  // namespace spiralseg
