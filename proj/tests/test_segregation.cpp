#include <doctest.h>

#include <cmath>
#include <numbers>

#include "spiralseg/segregation.hpp"
#include "spiralseg/selftest.hpp"
#include "spiralseg/solver.hpp"
#include "spiralseg/traces.hpp"

using namespace spiralseg;

namespace {

constexpr double pi = std::numbers::pi;

SystemState make_state(std::vector<Field> fields) {
    SystemState s;
    s.fields = std::move(fields);
    s.converged = true;
    return s;
}

// Symmetric three-sector state r^{3/2} |cos(3 theta / 2)|, one species per sector.
SystemState sector_state(int n, double alpha = 0.0) {
    const StripGrid g(n, n, 8.0);
    const double nu = 1.5 + 2 * alpha * alpha / 3;
    const std::vector<double> w = alpha == 0.0 ? std::vector<double>{1, -1, 1} : std::vector<double>{1, -4, 16};
    return synthetic_expansion_state(g, 3, alpha, nu, w);
}

SystemState solved(int n, int h, const CompetitionMatrix& a, std::vector<double> schedule) {
    const StripGrid g(n, n, 6.0);
    RelaxOptions opts;
    opts.relaxation = 1.5;
    return continuation_sweep(g, a, make_sector_traces(h), schedule, opts).back();
}

double reduce(double t) {
    t = std::fmod(t, 2 * pi);
    return t < 0 ? t + 2 * pi : t;
}

}  // namespace

TEST_CASE("overlap_metrics: decoupled harmonic state overlaps") {
    const SystemState s = solved(32, 3, CompetitionMatrix::symmetric(3), {1e-12});
    const auto m = overlap_metrics(s);
    CHECK(m.max_product > 0.0);
    CHECK(m.l2_product > 0.0);
}

TEST_CASE("overlap_metrics: disjoint supports give zero") {
    const SystemState s = sector_state(64);
    const auto m = overlap_metrics(s);
    CHECK(m.max_product == 0.0);
    CHECK(m.l2_product == 0.0);
}

TEST_CASE("hat_field: symmetric matrix") {
    const SystemState s = sector_state(32);
    const Field hat = hat_field(s, 1, CompetitionMatrix::symmetric(3));
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 32; ++i)
            CHECK(hat(i, j) == doctest::Approx(s.fields[1](i, j) - s.fields[0](i, j) - s.fields[2](i, j)));
}

TEST_CASE("hat_field: one asymmetric pair") {
    const StripGrid g(16, 8, 2.0);
    std::vector<Field> f;
    for (int s = 0; s < 3; ++s) {
        Field u(g, FieldRole::Density);
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 16; ++i) u(i, j) = 1.0 + s + 0.1 * i + 0.01 * j;
        f.push_back(u);
    }
    const SystemState st = make_state(f);
    const CompetitionMatrix a(3, {0, 4, 1, 1, 0, 1, 1, 1, 0});
    const Field hat = hat_field(st, 0, a);
    CHECK(hat.role() == FieldRole::SignedDensity);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 16; ++i)
            CHECK(hat(i, j) == doctest::Approx(f[0](i, j) - 4 * f[1](i, j) - f[2](i, j)));
}

TEST_CASE("hat_field: lone species") {
    const StripGrid g(16, 8, 2.0);
    Field u(g, FieldRole::Density, 0.5);
    const SystemState st = make_state({u, Field(g, FieldRole::Density), Field(g, FieldRole::Density)});
    const Field hat = hat_field(st, 0, CompetitionMatrix::cyclic(3, 4));
    for (double v : hat.values()) CHECK(v == 0.5);
}

TEST_CASE("sign_defects: harmonic states") {
    SUBCASE("decoupled solve") {
        const SystemState s = solved(64, 3, CompetitionMatrix::symmetric(3), {1e-12});
        for (const auto& d : sign_defects(s, CompetitionMatrix::symmetric(3))) {
            CHECK(d.sub <= 1e-8);
            CHECK(d.super <= 1e-8);
        }
    }
    SUBCASE("exact strip-harmonic field") {
        // 2 + r^2 cos 2 theta, harmonic in the disk
        for (int n : {32, 64}) {
            const StripGrid g(n, n, 3.0);
            Field u(g, FieldRole::Density);
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) u(i, j) = 2 + std::exp(-2 * g.y(j)) * std::cos(2 * g.theta(i));
            const SystemState s = make_state({u, Field(g, FieldRole::Density)});
            const auto d = sign_defects(s, CompetitionMatrix::symmetric(2));
            const double h2 = g.dtheta() * g.dtheta() + g.dy() * g.dy();
            CHECK(d[0].sub <= h2);
            CHECK(d[0].super <= h2);
            CHECK(d[0].sub_raw > 0.0);  // truncation error is visible, and bounded
        }
    }
}

TEST_CASE("multiplicity_map: sectors and interfaces") {
    const SystemState s = sector_state(128);
    const MultiplicityMap m = multiplicity_map(s);
    const StripGrid& g = m.grid;
    // theta = 0 is the middle of species 0's sector
    CHECK(m.at(0, 40) == 1);
    CHECK(m.present[g.index(0, 40)] == 1u);
    // interface at pi/3
    const int iface = static_cast<int>(std::lround(pi / 3 / g.dtheta()));
    CHECK(m.at(iface, 40) == 2);
    for (int v : m.m) {
        CHECK(v >= 0);
        CHECK(v <= 3);
    }
}

TEST_CASE("multiplicity_map: rho ball is periodic in theta") {
    const StripGrid g(64, 16, 2.0);
    Field a(g, FieldRole::Density), b(g, FieldRole::Density);
    for (int j = 0; j < 16; ++j) {
        a(0, j) = 1.0;
        b(32, j) = 1.0;
    }
    const SystemState s = make_state({a, b});
    PresenceOptions o;
    o.rho = 2;
    const MultiplicityMap m = multiplicity_map(s, o);
    CHECK(m.at(62, 5) == 1);
    CHECK(m.at(61, 5) == 0);
    CHECK(m.at(2, 5) == 1);
    CHECK(m.at(3, 5) == 0);
}

TEST_CASE("extract_nodal_curves: straight rays") {
    const SystemState s = sector_state(256);
    const MultiplicityMap m = multiplicity_map(s);
    const auto curves = extract_nodal_curves(s, CompetitionMatrix::symmetric(3), m);
    REQUIRE(curves.size() == 3);
    std::vector<double> seen;
    for (const auto& c : curves) {
        CHECK_FALSE(c.partial);
        REQUIRE(c.points.size() > 100);
        CHECK(c.points.front().y < 0.1);
        CHECK(c.points.back().y > 7.5);
        for (std::size_t p = 1; p < c.points.size(); ++p) {
            CHECK(c.points[p].y >= c.points[p - 1].y);
            CHECK(c.points[p].theta == doctest::Approx(c.points.front().theta).epsilon(1e-9));
        }
        seen.push_back(reduce(c.points.front().theta));
    }
    std::sort(seen.begin(), seen.end());
    CHECK(seen[0] == doctest::Approx(pi / 3).epsilon(1e-6));
    CHECK(seen[1] == doctest::Approx(pi).epsilon(1e-6));
    CHECK(seen[2] == doctest::Approx(5 * pi / 3).epsilon(1e-6));
}

TEST_CASE("extract_nodal_curves: spirals drift linearly and unwrap") {
    const double alpha = 3 * std::log(4.0) / (2 * pi);
    const SystemState s = sector_state(256, alpha);
    const CompetitionMatrix a = CompetitionMatrix::cyclic(3, 4.0);
    const auto curves = extract_nodal_curves(s, a, multiplicity_map(s));
    REQUIRE(curves.size() == 3);
    for (const auto& c : curves) {
        REQUIRE(c.points.size() > 100);
        const auto& p0 = c.points.front();
        const auto& p1 = c.points.back();
        CHECK((p1.theta - p0.theta) / (p1.y - p0.y) == doctest::Approx(-2 * alpha / 3).epsilon(1e-3));
        // polyline steps stay within two cells
        const StripGrid& g = s.grid();
        for (std::size_t p = 1; p < c.points.size(); ++p)
            CHECK(std::hypot(c.points[p].theta - c.points[p - 1].theta, c.points[p].y - c.points[p - 1].y) <=
                  2 * std::sqrt(2.0) * std::max(g.dtheta(), g.dy()));
    }
}

TEST_CASE("extract_nodal_curves: the signed field changes sign across each curve") {
    const SystemState s = sector_state(128, 0.3);
    const CompetitionMatrix a = CompetitionMatrix::cyclic(3, 4.0);
    const StripGrid& g = s.grid();
    const auto curves = extract_nodal_curves(s, a, multiplicity_map(s));
    for (const auto& c : curves) {
        int checked = 0;
        for (std::size_t p = 0; p < c.points.size(); p += 7) {
            const int j = static_cast<int>(std::lround(c.points[p].y / g.dy()));
            if (j <= 0 || j >= g.n_y() - 1) continue;
            const int i = static_cast<int>(std::floor(reduce(c.points[p].theta) / g.dtheta()));
            auto w = [&](int ii) { return a(c.j, c.i) * s.fields[c.i](ii, j) - a(c.i, c.j) * s.fields[c.j](ii, j); };
            CHECK(w(i - 2) * w(i + 3) < 0.0);
            ++checked;
        }
        CHECK(checked > 5);
    }
}

TEST_CASE("extract_nodal_curves: a gap marks the curve partial") {
    SystemState s = sector_state(128);
    const StripGrid& g = s.grid();
    const int iface = static_cast<int>(std::lround(pi / 3 / g.dtheta()));
    for (int j = 50; j < 60; ++j)
        for (int i = iface - 10; i <= iface + 10; ++i)
            for (auto& f : s.fields) f(i, j) = 0.0;
    const auto curves = extract_nodal_curves(s, CompetitionMatrix::symmetric(3), multiplicity_map(s));
    int partial = 0;
    for (const auto& c : curves)
        if (c.partial) {
            ++partial;
            CHECK(c.fragments.size() >= 2);
        }
    CHECK(partial == 1);
}

TEST_CASE("extract_nodal_curves: non-adjacent pairs are absent") {
    const SystemState s = sector_state(64);
    for (const auto& c : extract_nodal_curves(s, CompetitionMatrix::symmetric(3), multiplicity_map(s)))
        CHECK(((c.j - c.i + 3) % 3 == 1));
}

TEST_CASE("unwrap_theta: nearest continuation") {
    std::vector<CurvePoint> p{{6.1, 0}, {0.1, 0.1}, {0.3, 0.2}, {6.2, 0.3}};
    unwrap_theta(p);
    CHECK(p[1].theta == doctest::Approx(0.1 + 2 * pi));
    CHECK(p[2].theta == doctest::Approx(0.3 + 2 * pi));
    CHECK(p[3].theta == doctest::Approx(6.2));
}

TEST_CASE("locate_singular_point: two species never meet three ways") {
    const StripGrid g(64, 32, 4.0);
    Field a(g, FieldRole::Density), b(g, FieldRole::Density);
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 64; ++i) {
            const double v = std::exp(-g.y(j)) * std::sin(g.theta(i));
            (v > 0 ? a : b)(i, j) = std::abs(v);
        }
    const SystemState s = make_state({a, b});
    const auto rep = locate_singular_point(multiplicity_map(s));
    CHECK_FALSE(rep.found());
}

TEST_CASE("locate_singular_point: symmetric solve has one cluster at the origin") {
    const SystemState s = solved(64, 3, CompetitionMatrix::symmetric(3), {1e1, 1e2, 1e3, 1e4});
    const MultiplicityMap m = multiplicity_map(s);
    const auto rep = locate_singular_point(m);
    REQUIRE(rep.unique());
    const auto& c = rep.clusters.front();
    CHECK(c.max_row == s.grid().n_y() - 1);
    CHECK(near_origin(c, s.grid(), 2.0));
    CHECK(std::hypot(c.centroid.x, c.centroid.y) <= c.outer_radius);
    CHECK(c.extent >= c.outer_radius);

    const NodeMask mask = exclusion_mask(s.grid(), rep, 3);
    CHECK(mask[s.grid().index(0, s.grid().n_y() - 1)] == 0);
    CHECK(mask[s.grid().index(0, 1)] == 1);
}

TEST_CASE("locate_singular_point: disjoint clusters are all reported") {
    const StripGrid g(64, 64, 4.0);
    MultiplicityMap m{g, std::vector<int>(g.size(), 1), std::vector<std::uint32_t>(g.size(), 1u), {}};
    for (int i = 0; i < 3; ++i) {
        m.m[g.index(10 + i, 20)] = 3;
        m.m[g.index(40, 50 + i)] = 3;
        m.m[g.index(40 + i, 50)] = 3;
    }
    m.m[g.index(63, 5)] = 3;
    m.m[g.index(0, 5)] = 3;  // joined across the seam
    const auto rep = locate_singular_point(m);
    REQUIRE(rep.clusters.size() == 3);
    CHECK(rep.clusters[0].nodes == 5);
    CHECK_FALSE(rep.unique());
}
