#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "nlpot/common.hpp"
#include "nlpot/geometry.hpp"
#include "nlpot/parallel.hpp"
#include "nlpot/rational.hpp"
#include "nlpot/rng.hpp"

using namespace nlpot;

TEST_CASE("pairwise sum is exact on integer data and stable on random data") {
    std::vector<double> v(100000);
    std::iota(v.begin(), v.end(), 1.0);
    REQUIRE(pairwise_sum(v) == 100000.0 * 100001.0 / 2.0);  // exactly representable

    Rng rng(42);
    std::vector<double> w(5000);
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);
    long double acc = 0.0L;
    for (double x : w) acc += x;
    REQUIRE(pairwise_sum(w) == Catch::Approx(static_cast<double>(acc)).margin(1e-12));

    REQUIRE(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("extended power rules") {
    REQUIRE(pow_ext(kInf, 0.0) == 1.0);
    REQUIRE(pow_ext(kInf, 2.0) == kInf);
    REQUIRE(pow_ext(kInf, -0.5) == 0.0);
    REQUIRE(pow_ext(0.0, 2.0) == 0.0);
    const double x = 0.12345678901234567;
    REQUIRE(pow_ext(x, 1.0) == x);  // bitwise identity on the unit exponent
    REQUIRE(pow_ext(1.0, 7.3) == 1.0);
    REQUIRE_THROWS_AS(pow_ext(-1.0, 0.5), std::domain_error);
}

TEST_CASE("relative difference conventions") {
    REQUIRE(rel_diff(3.0, 3.0) == 0.0);
    REQUIRE(rel_diff(kInf, kInf) == 0.0);
    REQUIRE(rel_diff(1.0, kInf) == kInf);
    REQUIRE(rel_diff(1.0, 2.0) == Catch::Approx(0.5));
    REQUIRE(rel_diff(0.0, 0.0) == 0.0);
}

TEST_CASE("unit ball volumes and sphere areas") {
    REQUIRE(unit_ball_volume(1) == Catch::Approx(2.0));
    REQUIRE(unit_ball_volume(2) == Catch::Approx(kPi));
    REQUIRE(unit_ball_volume(3) == Catch::Approx(4.0 * kPi / 3.0));
    REQUIRE(unit_sphere_area(3) == Catch::Approx(4.0 * kPi));
    // volume of a radius-1/4 ball in R^3
    REQUIRE(unit_ball_volume(3) * std::pow(0.25, 3) == Catch::Approx(0.06544984694978735));
}

TEST_CASE("rational arithmetic is exact") {
    const Rational a = Rational::parse("3/2").value();
    const Rational b = Rational::parse("0.375").value();
    REQUIRE(b == Rational(3, 8));
    REQUIRE(a + b == Rational(15, 8));
    REQUIRE(a * b == Rational(9, 16));
    REQUIRE(a - Rational(1) == Rational(1, 2));
    REQUIRE((a / b).str() == "4");
    REQUIRE(Rational(4, 6) == Rational(2, 3));
    REQUIRE(Rational(2, 3) < Rational(3, 4));
    REQUIRE(Rational(-1, 2).to_double() == -0.5);
    REQUIRE_FALSE(Rational::parse("1/0").has_value());
    REQUIRE_FALSE(Rational::parse("oops").has_value());
}

TEST_CASE("rng is deterministic and in range") {
    Rng a(7), b(7);
    for (int i = 0; i < 100; ++i) REQUIRE(a.uniform01() == b.uniform01());
    Rng c(8);
    for (int i = 0; i < 1000; ++i) {
        const double u = c.uniform01();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        const double v = c.uniform(2.0, 5.0);
        REQUIRE(v >= 2.0);
        REQUIRE(v < 5.0);
        const long long k = c.uniform_int(3, 6);
        REQUIRE(k >= 3);
        REQUIRE(k <= 6);
    }
}

TEST_CASE("parallel_for covers every index once under any thread cap") {
    for (int cap : {1, 3, 0}) {
        set_thread_cap(cap);
        std::vector<int> hits(10007, 0);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) REQUIRE(h == 1);
    }
    set_thread_cap(0);
}

TEST_CASE("boxes: containment, distances, splitting") {
    Box b{{0.0, 0.0}, {2.0, 4.0}};
    REQUIRE(b.volume() == Catch::Approx(8.0));
    REQUIRE(b.contains({1.0, 1.0}));
    REQUIRE(b.contains({0.0, 4.0}));  // closed
    REQUIRE(!b.contains({-0.1, 1.0}));
    REQUIRE(box_min_dist({1.0, 1.0}, b) == 0.0);
    REQUIRE(box_min_dist({3.0, 0.0}, b) == Catch::Approx(1.0));
    REQUIRE(box_max_dist({0.0, 0.0}, b) == Catch::Approx(std::sqrt(4.0 + 16.0)));

    double vol = 0.0;
    int children = 0;
    split_box(b, [&](const Box& c) {
        vol += c.volume();
        ++children;
    });
    REQUIRE(children == 4);
    REQUIRE(vol == Catch::Approx(8.0));
}

TEST_CASE("box grid indexing is row-major with the last axis fastest") {
    BoxGrid g;
    g.origin = {0.0, 0.0};
    g.cell_size = 1.0;
    g.extents = {2, 3};
    REQUIRE(g.cell_count() == 6);
    REQUIRE(g.cell_center(0) == Point{0.5, 0.5});
    REQUIRE(g.cell_center(1) == Point{0.5, 1.5});
    REQUIRE(g.cell_center(3) == Point{1.5, 0.5});
    const Box b = g.bounds();
    REQUIRE(b.lo == Point{0.0, 0.0});
    REQUIRE(b.hi == Point{2.0, 3.0});
    REQUIRE(g.centers().size() == 6);
}
