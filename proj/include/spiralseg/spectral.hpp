#pragma once

#include <complex>
#include <vector>

#include "spiralseg/competition.hpp"
#include "spiralseg/grid.hpp"
#include "spiralseg/solver.hpp"

namespace spiralseg {

/// Cycle product (a_{k-1,0}/a_{0,k-1}) * prod_{j=1}^{k-1} a_{j-1,j}/a_{j,j-1} around the species ring.
double lambda_of(const CompetitionMatrix& a);
double alpha_of(double lambda);
double alpha_of_matrix(const CompetitionMatrix& a);
double predicted_nu(int h, double alpha);

/// w_0 = 1, w_i = (-1)^i prod_{j=1}^{i} a_{j-1,j}/a_{j,j-1}.
std::vector<double> weights_U(const CompetitionMatrix& a);

struct SpectralConstants {
    int h = 0;
    double lambda = 1.0;
    double alpha = 0.0;
    double nu = 0.0;
    std::vector<double> weights;
    // odd h is handled on the doubled-angle problem: 2h sectors, lambda^2
    bool doubled = false;
    int h_eff = 0;
    double lambda_eff = 1.0;
    double alpha_eff = 0.0;
    double nu_eff = 0.0;
};

SpectralConstants spectral_constants(const CompetitionMatrix& a, int h);

struct WeightedDensity {
    Field U;
    std::size_t ambiguous = 0;  // nodes where a second species exceeds the threshold
};

/**
 * U = w_i u_i with i the locally largest species; 0 where every species is
 * <= threshold. Nodes where two species exceed the threshold are counted as
 * ambiguous.
 */
WeightedDensity build_U(const SystemState& state, const std::vector<double>& weights, double threshold = 0.0);

struct HarmonicMode {
    int k = 0;
    double a = 0.0;
    double b = 0.0;
};

/// sum over modes of exp(alpha x) [a cos(kx + alpha y) + b sin(kx + alpha y)] exp(-k y).
double synth_value(double alpha, const std::vector<HarmonicMode>& modes, double x, double y);
Field synth_harmonic(const StripGrid& grid, double alpha, const std::vector<HarmonicMode>& modes);

struct FourierTable {
    double alpha = 0.0;
    int kmax = 0;
    std::vector<double> y;                                // rows used
    std::vector<std::vector<std::complex<double>>> W;     // W[row][k], k = 0..kmax
    std::vector<double> parseval_error;                   // per row, relative
    std::vector<int> rejected_rows;                       // grid rows failing the seam check
    std::vector<HarmonicMode> modes;                      // k = -kmax..kmax

    std::complex<double> coefficient(std::size_t row, int k) const;
    const HarmonicMode& mode(int k) const { return modes.at(static_cast<std::size_t>(k + kmax)); }
};

/**
 * Row-wise FFT of a 2*pi-periodic w (already multiplied by exp(-alpha x)),
 * then a least-squares fit of each W_k(y) to A_k exp((k - i alpha) y) +
 * B_k exp((-k + i alpha) y). Rows whose seam jump exceeds seam_factor times
 * the largest interior jump are rejected; throws std::invalid_argument when
 * fewer than two rows survive.
 */
FourierTable fourier_rows(const Field& w, double alpha, double seam_factor = 4.0);

struct NiceBadSplit {
    double e_nice = 0.0;
    double e_bad = 0.0;
    int kbar = 0;
    bool any = false;
};

/// Energies of k >= 0 and k < 0 modes; kbar is the smallest k above rel_threshold * max mode energy.
NiceBadSplit nice_bad_split(const FourierTable& table, double rel_threshold = 1e-6);

}  // namespace spiralseg
