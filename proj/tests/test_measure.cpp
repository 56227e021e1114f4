#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <variant>

#include "nlpot/measure.hpp"
#include "nlpot/rng.hpp"

using namespace nlpot;

namespace {

AtomicMeasure two_atoms() {
    AtomicMeasure a;
    a.dim = 3;
    a.locations = {{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}};
    a.masses = {1.0, 3.0};
    a.validate();
    return a;
}

CellDensityMeasure unit_box_cells(int per_axis, double density) {
    CellDensityMeasure c;
    c.dim = 3;
    c.origin = {-0.5, -0.5, -0.5};
    c.cell_size = 1.0 / per_axis;
    c.extents = {per_axis, per_axis, per_axis};
    c.density.assign(c.cell_count(), density);
    c.validate();
    return c;
}

}  // namespace

TEST_CASE("atomic validation rejects bad input") {
    AtomicMeasure a;
    a.dim = 2;
    a.locations = {{0.0, 0.0}, {0.0, 0.0}};
    a.masses = {1.0, 1.0};
    REQUIRE_THROWS_AS(a.validate(), std::invalid_argument);  // duplicate locations
    a.locations = {{0.0, 0.0}, {1.0, 0.0}};
    a.masses = {1.0, -2.0};
    REQUIRE_THROWS_AS(a.validate(), std::invalid_argument);  // negative mass
}

TEST_CASE("ball mass on atoms uses the open-ball convention") {
    const Measure mu{two_atoms()};
    const Point x{0.0, 0.0, 0.0};
    REQUIRE(ball_mass(mu, x, 1.0, 1e-9).value == 0.0);            // boundary excluded
    REQUIRE(ball_mass(mu, x, 1.0 + 1e-9, 1e-9).value == 1.0);     // first atom inside
    REQUIRE(ball_mass(mu, x, 2.0, 1e-9).value == 1.0);
    REQUIRE(ball_mass(mu, x, 2.5, 1e-9).value == 4.0);
    REQUIRE(total_mass(mu) == 4.0);
}

TEST_CASE("ball mass on cells carries a certified error bound") {
    const CellDensityMeasure c = unit_box_cells(8, 2.0);
    const Measure mu{c};
    const Point x{0.0, 0.0, 0.0};

    // Ball containing the whole box: exact.
    const auto full = ball_mass(mu, x, 10.0, 1e-8);
    REQUIRE(full.value == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(full.error_bound <= 1e-6);

    // Ball strictly inside the box: compare to the exact sphere volume.
    const double r = 0.3;
    const auto inside = ball_mass(mu, x, r, 1e-3);
    const double exact = 2.0 * unit_ball_volume(3) * std::pow(r, 3);
    REQUIRE(std::abs(inside.value - exact) <= inside.error_bound + 1e-12);
    // The subdivision caps bind before the requested tolerance at this
    // radius; the certified bound stays honest, just not as tight.
    REQUIRE(inside.error_bound <= 2e-2 * exact);
}

TEST_CASE("support box and feature scale") {
    const Measure mu{two_atoms()};
    const Box b = support_box(mu);
    REQUIRE(b.lo == Point{0.0, 0.0, 0.0});
    REQUIRE(b.hi == Point{1.0, 2.0, 0.0});
    REQUIRE(min_feature_scale(mu) > 0.0);

    CellDensityMeasure c = unit_box_cells(4, 1.0);
    c.density[0] = 0.0;  // zero cells do not extend the support box
    const Box cb = support_box(Measure{c});
    REQUIRE(cb.hi == Point{0.5, 0.5, 0.5});
}

TEST_CASE("scale_density: unit weights are bitwise no-ops, zero atoms drop") {
    const AtomicMeasure a = two_atoms();
    const Measure mu{a};
    SampledField f;
    f.nodes = reference_points(mu);
    f.values = {1.0, 1.0};
    const Measure scaled = scale_density(mu, f, 1.0);
    const auto& sa = std::get<AtomicMeasure>(scaled);
    REQUIRE(sa.masses[0] == a.masses[0]);
    REQUIRE(sa.masses[1] == a.masses[1]);

    f.values = {0.0, 2.0};
    const Measure rescaled = scale_density(mu, f, 1.0);
    const auto& dropped = std::get<AtomicMeasure>(rescaled);
    REQUIRE(dropped.size() == 1);
    REQUIRE(dropped.masses[0] == 6.0);

    f.values = {1.0, kInf};
    REQUIRE_THROWS_AS(scale_density(mu, f, 1.0), std::invalid_argument);
    f.values = {1.0, -0.5};
    REQUIRE_THROWS_AS(scale_density(mu, f, 1.0), std::invalid_argument);
}

TEST_CASE("scale_density exponent and restrict_measure gate") {
    const CellDensityMeasure c = unit_box_cells(2, 3.0);
    const Measure mu{c};
    SampledField f;
    f.nodes = reference_points(mu);
    f.values.assign(8, 4.0);
    const Measure scaled = scale_density(mu, f, 0.5);
    const auto& sc = std::get<CellDensityMeasure>(scaled);
    for (double d : sc.density) REQUIRE(d == Catch::Approx(6.0));  // 3 * 4^(1/2)

    // Node mismatch is rejected.
    SampledField bad = f;
    bad.nodes[0][0] += 1e-9;
    REQUIRE_THROWS_AS(scale_density(mu, bad, 0.5), std::invalid_argument);

    // Truncation keeps {gate <= k} intersected with the radius-k ball.
    const Measure kept = restrict_measure(mu, 4.5, f);
    REQUIRE(total_mass(kept) == Catch::Approx(total_mass(mu)));
    const Measure none = restrict_measure(mu, 3.5, f);
    REQUIRE(total_mass(none) == 0.0);
}

TEST_CASE("cell refinement preserves mass and support") {
    CellDensityMeasure c = unit_box_cells(3, 1.0);
    c.density[13] = 7.0;
    const CellDensityMeasure f = refine_cells(c);
    REQUIRE(f.cell_count() == 8 * c.cell_count());
    REQUIRE(total_mass(Measure{f}) == Catch::Approx(total_mass(Measure{c})).epsilon(1e-13));
    const Box bc = support_box(Measure{c});
    const Box bf = support_box(Measure{f});
    for (int a = 0; a < 3; ++a) {
        REQUIRE(bf.lo[a] == Catch::Approx(bc.lo[a]).margin(1e-12));
        REQUIRE(bf.hi[a] == Catch::Approx(bc.hi[a]).margin(1e-12));
    }
}

TEST_CASE("zero measures behave") {
    AtomicMeasure a;
    a.dim = 3;
    const Measure mu{a};
    REQUIRE(total_mass(mu) == 0.0);
    REQUIRE(reference_points(mu).empty());
    REQUIRE(ball_mass(mu, {0, 0, 0}, 1.0, 1e-6).value == 0.0);
}
