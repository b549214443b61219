#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "spiralseg/grid.hpp"

using namespace spiralseg;
using std::numbers::pi;

TEST_CASE("build_grid spacings") {
    const StripGrid g = build_grid(16, 2, 1.0);
    CHECK(g.dtheta() == doctest::Approx(pi / 8).epsilon(1e-15));
    CHECK(g.dy() == doctest::Approx(1.0));
    CHECK(g.size() == 32);

    const StripGrid d = build_grid(512, 512, 8.0);
    CHECK(d.r_min() == doctest::Approx(3.3546262790251185e-4).epsilon(1e-12));
    CHECK(d.y(511) == doctest::Approx(8.0));
}

TEST_CASE("build_grid rejects bad shapes") {
    CHECK_THROWS_AS(build_grid(15, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(14, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(16, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(16, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(16, 2, -1.0), std::invalid_argument);
}

TEST_CASE("theta index wraps") {
    const StripGrid g(16, 4, 1.0);
    CHECK(g.wrap(-1) == 15);
    CHECK(g.wrap(16) == 0);
    CHECK(g.wrap(33) == 1);
    CHECK(g.index(-1, 2) == g.index(15, 2));
    CHECK(g.index(3, 1) == 16 + 3);
}

TEST_CASE("to_cartesian anchors") {
    const auto a = to_cartesian(0.0, 0.0);
    CHECK(a.x == doctest::Approx(1.0));
    CHECK(a.y == doctest::Approx(0.0));
    const auto b = to_cartesian(pi / 2, std::log(2.0));
    CHECK(std::abs(b.x) < 1e-15);
    CHECK(b.y == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("from_cartesian anchors and origin") {
    const auto a = from_cartesian({1.0, 0.0});
    CHECK(a.theta == 0.0);
    CHECK(a.y == doctest::Approx(0.0));
    const auto b = from_cartesian({0.0, 0.5});
    CHECK(b.theta == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(b.y == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(from_cartesian({0.0, 0.0}), std::domain_error);
    const auto c = from_cartesian({0.0, -0.5});
    CHECK(c.theta == doctest::Approx(1.5 * pi).epsilon(1e-15));
}

TEST_CASE("cartesian roundtrip on the punctured disk") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int done = 0;
    while (done < 100) {
        const CartesianPoint p{u(rng), u(rng)};
        const double r = std::hypot(p.x, p.y);
        if (r > 1.0 || r < 1e-6) continue;
        const auto s = from_cartesian(p);
        CHECK(s.theta >= 0.0);
        CHECK(s.theta < 2 * pi);
        const auto q = to_cartesian(s);
        CHECK(std::abs(q.x - p.x) <= 1e-12);
        CHECK(std::abs(q.y - p.y) <= 1e-12);
        ++done;
    }
}

TEST_CASE("disk_laplacian_rhs_factor") {
    const StripGrid g(16, 9, 8.0);
    const Field f = disk_laplacian_rhs_factor(g);
    for (int i = 0; i < 16; ++i) CHECK(f(i, 0) == 1.0);
    CHECK(f(3, 1) == doctest::Approx(0.1353352832366127).epsilon(1e-12));
}

namespace {

double harmonic_residual(int n, int k) {
    const StripGrid g(n, n, 3.0);
    Field v(g);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_theta(); ++i) v(i, j) = std::exp(-k * g.y(j)) * std::cos(k * g.theta(i) + 0.7);
    return strip_laplacian(v).max_abs();
}

}  // namespace

TEST_CASE("strip Laplacian of e^{-ky} cos(k theta) is second order") {
    for (int k = 1; k <= 3; ++k) {
        const double e1 = harmonic_residual(64, k);
        const double e2 = harmonic_residual(128, k);
        CAPTURE(k);
        CHECK(std::log2(e1 / e2) >= 1.8);
    }
}

TEST_CASE("e^{-y} cos theta is the coordinate px") {
    const StripGrid g(128, 128, 2.0);
    Field v(g);
    for (int j = 0; j < g.n_y(); ++j)
        for (int i = 0; i < g.n_theta(); ++i) v(i, j) = to_cartesian(g.theta(i), g.y(j)).x;
    const double c = 0.5 * (g.dtheta() * g.dtheta() + g.dy() * g.dy());
    CHECK(strip_laplacian(v).max_abs() <= c);
}

TEST_CASE("field basics") {
    const StripGrid g(16, 3, 1.0);
    Field f(g, FieldRole::Density, 0.0);
    CHECK(f.values().size() == g.size());
    f(2, 1) = 3.0;
    f(-1, 2) = -4.0;
    CHECK(f(15, 2) == -4.0);
    CHECK(f.max() == 3.0);
    CHECK(f.min() == -4.0);
    CHECK(f.max_abs() == 4.0);
    CHECK(f.row(1)[2] == 3.0);
    CHECK_THROWS(Field(g, FieldRole::Generic, std::vector<double>(5)));
    CHECK(field_role_from_string(to_string(FieldRole::SignedDensity)) == FieldRole::SignedDensity);
    CHECK_THROWS(field_role_from_string("bogus"));
}
