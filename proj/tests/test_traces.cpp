#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spiralseg/competition.hpp"
#include "spiralseg/traces.hpp"

using namespace spiralseg;
using std::numbers::pi;

TEST_CASE("sector traces for h = 3") {
    const TraceSpec t = make_sector_traces(3);
    REQUIRE(t.zeros().size() == 3);
    CHECK(t.zeros()[0] == doctest::Approx(pi / 3));
    CHECK(t.zeros()[1] == doctest::Approx(pi));
    CHECK(t.zeros()[2] == doctest::Approx(5 * pi / 3));
    for (double z : t.zeros()) CHECK(std::abs(t.total(z)) < 1e-14);
    // species 0 holds theta = 0, the rest follow counterclockwise
    CHECK(t.owner(0.0) == 0);
    CHECK(t.owner(2 * pi / 3) == 1);
    CHECK(t.owner(4 * pi / 3) == 2);
    CHECK(t.value(0, 0.0) == doctest::Approx(1.0));
    CHECK(t.value(1, 0.0) == 0.0);
    CHECK(t.value(1, 2 * pi / 3) == doctest::Approx(1.0));
    const auto arc = t.arc(1);
    CHECK(arc.first == doctest::Approx(pi / 3));
    CHECK(arc.second == doctest::Approx(pi));
}

TEST_CASE("sector traces for h = 4") {
    const TraceSpec t = make_sector_traces(4);
    REQUIRE(t.zeros().size() == 4);
    for (int m = 0; m < 4; ++m) CHECK(t.zeros()[m] == doctest::Approx(pi / 4 + m * pi / 2));
}

TEST_CASE("h < 3 rejected") {
    CHECK_THROWS_AS(make_sector_traces(2), std::invalid_argument);
    CHECK_THROWS_AS(make_sector_traces(0), std::invalid_argument);
}

TEST_CASE("sampled traces are disjoint and sum to the profile") {
    const StripGrid g(96, 2, 1.0);
    const TraceSpec t = make_sector_traces(3);
    const auto rows = sample_traces(t, g);
    REQUIRE(rows.size() == 3);
    for (int i = 0; i < g.n_theta(); ++i) {
        double sum = 0.0;
        int nonzero = 0;
        for (const auto& r : rows) {
            CHECK(r[i] >= 0.0);
            sum += r[i];
            nonzero += r[i] > 0.0;
        }
        CHECK(nonzero <= 1);
        CHECK(sum == doctest::Approx(std::abs(std::cos(1.5 * g.theta(i)))).epsilon(1e-14));
    }
}

TEST_CASE("nondegeneracy of |cos(3 theta / 2)|") {
    const auto rep = validate_nondegeneracy(make_sector_traces(3), 20);
    CHECK(rep.ok);
    REQUIRE(rep.zeros.size() == 3);
    // |d/dtheta cos(3 theta/2)| = 3/2 at the zeros; quotients approach it from below
    for (const auto& z : rep.zeros) CHECK(z.slope == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("flat arc is degenerate") {
    // vanishes on the whole arc [pi/2, 3pi/2] although only three zeros are declared
    auto flat = [](double th) {
        const double t = std::fmod(th, 2 * pi);
        return (t > pi / 2 && t < 3 * pi / 2) ? 0.0 : std::abs(std::cos(th));
    };
    const TraceSpec t(3, flat, {pi / 2, pi, 3 * pi / 2});
    const auto rep = validate_nondegeneracy(t, 8);
    CHECK_FALSE(rep.ok);
    CHECK(rep.failure_theta.has_value());
}

TEST_CASE("quadratic zero is degenerate") {
    auto prof = [](double th) {
        double t = std::remainder(th, 2 * pi);
        if (std::abs(t) < 0.5) return t * t;
        return std::abs(std::sin(1.5 * th)) + 0.25;
    };
    const TraceSpec t(3, prof, {0.0, 2 * pi / 3, 4 * pi / 3});
    const auto rep = validate_nondegeneracy(t, 20);
    CHECK_FALSE(rep.ok);
    REQUIRE(rep.failure_theta.has_value());
    CHECK(std::abs(std::remainder(*rep.failure_theta, 2 * pi)) < 1e-9);
}

TEST_CASE("table traces") {
    std::vector<std::pair<double, double>> tab;
    for (int m = 0; m < 6; ++m) tab.emplace_back(m * pi / 3, m % 2 ? 1.0 : 0.0);
    const TraceSpec t = make_table_traces(3, tab);
    CHECK(t.zeros().size() == 3);
    CHECK(t.total(pi / 6) == doctest::Approx(0.5));
    CHECK(validate_nondegeneracy(t, 8).ok);
    CHECK_THROWS(make_table_traces(4, tab));
}

TEST_CASE("competition matrices") {
    const auto c = CompetitionMatrix::cyclic(3, 4.0);
    CHECK(c(0, 1) == 4.0);
    CHECK(c(1, 2) == 4.0);
    CHECK(c(2, 0) == 4.0);
    CHECK(c(1, 0) == 1.0);
    CHECK(c(0, 2) == 1.0);
    const auto s = CompetitionMatrix::from_preset(3, "symmetric:2");
    CHECK(s(2, 1) == 2.0);
    CHECK(CompetitionMatrix::from_preset(3, "cyclic:10")(0, 1) == 10.0);
    CHECK(c.transposed()(1, 0) == 4.0);
    CHECK_THROWS_AS(CompetitionMatrix(3, {0, 1, 1, 1, 0, 1, 1, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(CompetitionMatrix(3, {0, -1, 1, 1, 0, 1, 1, 1, 0}), std::invalid_argument);
    CHECK_THROWS(CompetitionMatrix::from_preset(3, "banana"));
    CHECK_THROWS(CompetitionMatrix::cyclic(3, 0.0));
}
