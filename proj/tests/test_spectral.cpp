#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spiralseg/selftest.hpp"
#include "spiralseg/spectral.hpp"

using namespace spiralseg;

namespace {

constexpr double pi = std::numbers::pi;

// w = exp(-alpha x) v, the 2 pi periodic part
Field reduced(const Field& v, double alpha) {
    Field w = v;
    const StripGrid& g = v.grid();
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_theta(); ++i) w(i, j) *= std::exp(-alpha * g.theta(i));
    return w;
}

double max_other(const FourierTable& t, std::initializer_list<int> skip) {
    double m = 0.0;
    for (int k = -t.kmax; k <= t.kmax; ++k) {
        if (std::find(skip.begin(), skip.end(), k) != skip.end()) continue;
        m = std::max({m, std::abs(t.mode(k).a), std::abs(t.mode(k).b)});
    }
    return m;
}

// Five-point Laplacian scaled by the field size, away from the seam and the boundary rows
double harmonic_residual(const Field& v) {
    const StripGrid& g = v.grid();
    const double it2 = 1 / (g.dtheta() * g.dtheta()), iy2 = 1 / (g.dy() * g.dy());
    double m = 0.0;
    for (int j = 1; j < g.n_y() - 1; ++j)
        for (int i = 1; i < g.n_theta() - 1; ++i) {
            const double lap = (v(i + 1, j) - 2 * v(i, j) + v(i - 1, j)) * it2 + (v(i, j + 1) - 2 * v(i, j) + v(i, j - 1)) * iy2;
            m = std::max(m, std::abs(lap));
        }
    return m / v.max_abs();
}

}  // namespace

TEST_CASE("lambda_of: showcase matrices") {
    CHECK(lambda_of(CompetitionMatrix::cyclic(3, 4.0)) == doctest::Approx(64.0).epsilon(1e-14));
    CHECK(lambda_of(CompetitionMatrix::cyclic(3, 10.0)) == doctest::Approx(1000.0).epsilon(1e-14));
    CHECK(lambda_of(CompetitionMatrix::symmetric(3)) == 1.0);
    CHECK(lambda_of(CompetitionMatrix::symmetric(5, 2.5)) == 1.0);
}

TEST_CASE("lambda_of: explicit three-species product") {
    const CompetitionMatrix a(3, {0, 2, 7, 3, 0, 5, 11, 13, 0});
    // (a_20 / a_02) (a_01 / a_10) (a_12 / a_21)
    const double expected = (11.0 / 7.0) * (2.0 / 3.0) * (5.0 / 13.0);
    CHECK(lambda_of(a) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(lambda_of(a.transposed()) == doctest::Approx(1.0 / expected).epsilon(1e-15));
}

TEST_CASE("alpha_of") {
    CHECK(alpha_of(64.0) == doctest::Approx(3 * std::log(4.0) / (2 * pi)).epsilon(1e-15));
    CHECK(alpha_of(64.0) == doctest::Approx(0.6619068).epsilon(1e-7));
    CHECK(alpha_of(1000.0) == doctest::Approx(3 * std::log(10.0) / (2 * pi)).epsilon(1e-15));
    CHECK(alpha_of(1000.0) == doctest::Approx(1.0994034).epsilon(1e-7));
    // slope of the clockwise spiral theta = (log 4 / pi) log r
    CHECK(std::abs(2 * alpha_of(64.0) / 3 - std::log(4.0) / pi) <= 1e-12);
    CHECK(alpha_of(1.0) == 0.0);
    for (double l : {0.3, 2.0, 64.0, 1e5}) CHECK(alpha_of(1.0 / l) == -alpha_of(l));
    CHECK_THROWS_AS(alpha_of(0.0), std::invalid_argument);
    CHECK(alpha_of_matrix(CompetitionMatrix::cyclic(3, 4.0)) == doctest::Approx(0.6619068).epsilon(1e-7));
    CHECK(alpha_of_matrix(CompetitionMatrix::cyclic(3, 4.0).transposed()) ==
          doctest::Approx(-0.6619068).epsilon(1e-7));
}

TEST_CASE("predicted_nu") {
    CHECK(predicted_nu(3, 0.0) == 1.5);
    CHECK(predicted_nu(3, 0.6618748) == doctest::Approx(1.7920523).epsilon(1e-7));
    CHECK(predicted_nu(3, alpha_of(64.0)) == doctest::Approx(1.7920804).epsilon(1e-7));
    CHECK(predicted_nu(4, 1.0) == 2.5);
    CHECK_THROWS_AS(predicted_nu(2, 0.0), std::invalid_argument);
    for (int h = 3; h < 8; ++h)
        for (double a : {-1.0, -0.1, 0.0, 0.2, 3.0}) {
            CHECK(predicted_nu(h, a) >= h / 2.0);
            CHECK((predicted_nu(h, a) == h / 2.0) == (a == 0.0));
        }
}

TEST_CASE("weights_U") {
    const auto sym = weights_U(CompetitionMatrix::symmetric(3));
    CHECK(sym == std::vector<double>{1, -1, 1});
    const auto w = weights_U(CompetitionMatrix::cyclic(3, 4.0));
    REQUIRE(w.size() == 3);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == doctest::Approx(-4.0));
    CHECK(w[2] == doctest::Approx(16.0));
    const CompetitionMatrix a = CompetitionMatrix::cyclic(3, 4.0);
    CHECK(std::abs(w[2]) * a(2, 0) / a(0, 2) == doctest::Approx(lambda_of(a)));
}

TEST_CASE("spectral_constants: doubling for odd h") {
    const auto c = spectral_constants(CompetitionMatrix::cyclic(3, 4.0), 3);
    CHECK(c.lambda == doctest::Approx(64.0));
    CHECK(c.nu == doctest::Approx(1.7920804).epsilon(1e-7));
    CHECK(c.doubled);
    CHECK(c.h_eff == 6);
    CHECK(c.lambda_eff == doctest::Approx(4096.0));
    CHECK(c.alpha_eff == doctest::Approx(2 * c.alpha));
    CHECK(c.nu_eff == doctest::Approx(predicted_nu(6, 2 * c.alpha)));
    CHECK(c.nu_eff == doctest::Approx(2 * c.nu));

    const auto e = spectral_constants(CompetitionMatrix::cyclic(4, 2.0), 4);
    CHECK_FALSE(e.doubled);
    CHECK(e.h_eff == 4);
    CHECK(e.lambda == doctest::Approx(16.0));
}

TEST_CASE("build_U: signs follow the weights") {
    const StripGrid g(96, 32, 4.0);
    const SystemState s = synthetic_expansion_state(g, 3, 0.0, 1.5, {1, -1, 1});
    const WeightedDensity U = build_U(s, {1, -1, 1});
    CHECK(U.U.role() == FieldRole::SignedDensity);
    CHECK(U.ambiguous == 0);
    // sector centres: theta = 0, 2pi/3, 4pi/3
    CHECK(U.U(0, 5) > 0);
    CHECK(U.U(32, 5) < 0);
    CHECK(U.U(64, 5) > 0);
    CHECK(U.U(0, 5) == doctest::Approx(s.fields[0](0, 5)));
    CHECK(U.U(32, 5) == doctest::Approx(-s.fields[1](32, 5)));
}

TEST_CASE("build_U: overlaps are flagged") {
    const StripGrid g(16, 8, 2.0);
    SystemState s;
    s.fields = {Field(g, FieldRole::Density, 1.0), Field(g, FieldRole::Density, 0.5)};
    const WeightedDensity U = build_U(s, {1, -3}, 0.1);
    CHECK(U.ambiguous == g.size());
    CHECK(U.U(3, 3) == 1.0);
}

TEST_CASE("synth_harmonic: discrete harmonicity") {
    for (double alpha : {0.0, 0.5}) {
        double r1 = 0, r2 = 0;
        for (int n : {64, 128}) {
            const StripGrid g(n, n, 2.0);
            const Field v = synth_harmonic(g, alpha, {{2, 1.0, 0.0}});
            (n == 64 ? r1 : r2) = harmonic_residual(v);
        }
        CHECK(r1 < 0.05);
        CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
    }
    const StripGrid g(32, 16, 2.0);
    const Field v = synth_harmonic(g, 0.0, {{2, 1.0, 0.0}});
    CHECK(v(3, 5) == doctest::Approx(std::exp(-2 * g.y(5)) * std::cos(2 * g.theta(3))).epsilon(1e-15));
}

TEST_CASE("synth_value: multiplicative period") {
    const double alpha = 0.5, lambda = std::exp(2 * pi * alpha);
    const std::vector<HarmonicMode> modes{{3, 1.0, 0.0}, {5, 0.0, 0.3}, {-1, 0.2, 0.1}};
    for (double x : {0.1, 1.3, 4.0})
        for (double y : {0.2, 1.0, 2.5}) {
            double size = 0.0;
            for (const auto& m : modes) size += (std::abs(m.a) + std::abs(m.b)) * std::exp(alpha * x - m.k * y);
            const double err = synth_value(alpha, modes, x + 2 * pi, y) - lambda * synth_value(alpha, modes, x, y);
            CHECK(std::abs(err) <= 1e-13 * lambda * size);
        }
}

TEST_CASE("fourier_rows: single mode") {
    const StripGrid g(128, 64, 3.0);
    const double alpha = 0.5;
    const FourierTable t = fourier_rows(reduced(synth_harmonic(g, alpha, {{3, 1.0, 0.0}}), alpha), alpha);
    CHECK(t.mode(3).a == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(t.mode(3).b) <= 1e-8);
    CHECK(max_other(t, {3}) <= 1e-8);
    for (double e : t.parseval_error) CHECK(e <= 1e-10);
    CHECK(t.rejected_rows.empty());
}

TEST_CASE("fourier_rows: two modes and a bad mode") {
    const StripGrid g(128, 64, 3.0);
    const double alpha = 0.5;
    const FourierTable t =
        fourier_rows(reduced(synth_harmonic(g, alpha, {{2, 1.0, 0.0}, {5, 0.0, 0.3}, {-1, 0.2, -0.1}}), alpha), alpha);
    CHECK(t.mode(2).a == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(t.mode(5).b == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(t.mode(-1).a == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(t.mode(-1).b == doctest::Approx(-0.1).epsilon(1e-8));
    CHECK(max_other(t, {2, 5, -1}) <= 1e-8);
    const NiceBadSplit s = nice_bad_split(t);
    CHECK(s.e_bad == doctest::Approx(0.05).epsilon(1e-7));
    CHECK(s.kbar == -1);
}

TEST_CASE("fourier_rows: zero field") {
    const StripGrid g(64, 32, 2.0);
    const FourierTable t = fourier_rows(Field(g), 0.3);
    for (const auto& m : t.modes) {
        CHECK(m.a == 0.0);
        CHECK(m.b == 0.0);
    }
    CHECK_FALSE(nice_bad_split(t).any);
}

TEST_CASE("fourier_rows: unreduced input is rejected") {
    const StripGrid g(64, 32, 2.0);
    const double alpha = 0.5;
    CHECK_THROWS_AS(fourier_rows(synth_harmonic(g, alpha, {{1, 1.0, 0.0}}), alpha), std::invalid_argument);
}

TEST_CASE("nice_bad_split: first mode") {
    const StripGrid g(128, 64, 3.0);
    const double alpha = 0.5;
    const FourierTable t =
        fourier_rows(reduced(synth_harmonic(g, alpha, {{3, 1.0, 0.0}, {6, 0.1, 0.2}}), alpha), alpha);
    const NiceBadSplit s = nice_bad_split(t);
    CHECK(s.e_bad <= 1e-12);
    CHECK(s.kbar == 3);
    CHECK(s.e_nice == doctest::Approx(1.05).epsilon(1e-7));
}

TEST_CASE("nice_bad_split: lifted target form") {
    // A lift whose nodal regions number 2 n*: the first nonzero mode is n*.
    SUBCASE("even h") {
        const int h = 4;
        const double alpha = alpha_of(16.0);
        const StripGrid g(128, 64, 3.0);
        const FourierTable t = fourier_rows(reduced(synth_harmonic(g, alpha, {{h / 2, 1.0, 0.0}}), alpha), alpha);
        CHECK(nice_bad_split(t).kbar == h / 2);
    }
    SUBCASE("odd h after doubling") {
        const auto c = spectral_constants(CompetitionMatrix::cyclic(3, 4.0), 3);
        const StripGrid g(128, 64, 3.0);
        const FourierTable t = fourier_rows(
            reduced(synth_harmonic(g, c.alpha_eff, {{c.h_eff / 2, 1.0, 0.0}}), c.alpha_eff), c.alpha_eff);
        CHECK(nice_bad_split(t).kbar == 3);
    }
}
