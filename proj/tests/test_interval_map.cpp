#include <doctest.h>

#include <cmath>
#include <random>

#include "rmaps/errors.hpp"
#include "rmaps/map.hpp"

using namespace rmaps;

TEST_CASE("doubling map evaluation") {
    PiecewiseMap T = make_doubling();
    CHECK(T.eval(0.3, Side::left) == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(T.eval(0.3, Side::right) == doctest::Approx(0.6).epsilon(1e-15));
    // bi-valued at the cut point
    CHECK(T.eval(0.5, Side::left) == 1.0);
    CHECK(T.eval(0.5, Side::right) == 0.0);
    CHECK(T.derivative(0.3, Side::left) == 2.0);
    CHECK_THROWS_AS(T.eval(1.5, Side::left), std::domain_error);
}

TEST_CASE("metastable family evaluation and slopes") {
    PiecewiseMap T0 = make_metastable(1.0, 0.0);
    CHECK(T0.eval(1.0 / 6.0, Side::left) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(T0.derivative(0.25, Side::left) == doctest::Approx(-3.0));

    PiecewiseMap Tw = make_metastable(2.0, 0.01);
    CHECK(Tw.derivative(0.8, Side::left) == doctest::Approx(-3.12).epsilon(1e-14));
    // peak and valley values
    CHECK(make_metastable(1.0, 0.01).eval(1.0 / 6.0, Side::left) ==
          doctest::Approx(0.51).epsilon(1e-14));
    CHECK(make_metastable(2.0, 0.01).eval(5.0 / 6.0, Side::left) ==
          doctest::Approx(0.48).epsilon(1e-14));
}

TEST_CASE("metastable family: construction contract") {
    CHECK_THROWS_AS(make_metastable(1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(make_metastable(-1.0, 0.01), std::invalid_argument);
    // T_omega(1/2) = 1/2 for every admissible parameter
    for (double w : {0.0, 1e-3, 0.02}) {
        PiecewiseMap T = make_metastable(2.0, w);
        CHECK(T.eval(0.5, Side::left) == 0.5);
        CHECK(T.eval(0.5, Side::right) == 0.5);
    }
    // branch images fill each half at omega = 0
    PiecewiseMap T0 = make_metastable(1.5, 0.0);
    for (int k = 0; k < 3; ++k) {
        Interval im = T0.branches()[k].image();
        CHECK(im.lo == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(im.hi == doctest::Approx(0.5).epsilon(1e-14));
    }
    for (int k = 3; k < 6; ++k) {
        Interval im = T0.branches()[k].image();
        CHECK(im.lo == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(im.hi == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("preimages") {
    PiecewiseMap T = make_doubling();
    auto pre = T.preimages(0.5);
    REQUIRE(pre.size() == 2);
    CHECK(pre[0].first == doctest::Approx(0.25));
    CHECK(pre[1].first == doctest::Approx(0.75));

    // endpoint convention: only the left-limit preimage of 1
    auto top = T.preimages(1.0);
    REQUIRE(top.size() == 1);
    CHECK(top[0].first == doctest::Approx(0.5));

    PiecewiseMap M = make_metastable(1.0, 0.0);
    auto pm = M.preimages(0.25);
    REQUIRE(pm.size() == 3);
    CHECK(pm[0].first == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(pm[1].first == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(pm[2].first == doctest::Approx(5.0 / 12.0).epsilon(1e-13));
    for (const auto& [x, k] : pm) CHECK(x <= 0.5);
}

TEST_CASE("preimages match a brute-force root scan") {
    PiecewiseMap M = make_metastable(2.0, 0.01);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        double y = unif(gen);
        auto pre = M.preimages(y);
        // scan a fine mesh for sign changes of T(x) - y inside each branch
        int found = 0;
        const int S = 20000;
        for (const Branch& b : M.branches()) {
            double prev = b.value(b.lo()) - y;
            for (int s = 1; s <= S; ++s) {
                double x = b.lo() + (b.hi() - b.lo()) * s / S;
                double cur = b.value(x) - y;
                if (prev == 0.0 || (prev < 0) != (cur < 0)) {
                    ++found;
                    break;
                }
                prev = cur;
            }
        }
        CHECK(static_cast<int>(pre.size()) >= found - 1);
        for (const auto& [x, k] : pre)
            CHECK(M.branches()[k].value(x) == doctest::Approx(y).epsilon(1e-10));
    }
}

TEST_CASE("orbit") {
    PiecewiseMap T = make_doubling();
    auto orb = T.orbit(1.0 / 3.0, 3);
    REQUIRE(orb.size() == 4);
    CHECK(orb[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(orb[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(orb[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

    auto fixed = T.orbit(0.0, 2);
    CHECK(fixed == std::vector<double>{0.0, 0.0, 0.0});

    PiecewiseMap M = make_metastable(1.0, 0.0);
    auto morb = M.orbit(1.0 / 6.0, 2);
    CHECK(morb[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(morb[2] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("detect_period on the doubling map") {
    PiecewiseMap T = make_doubling();
    PeriodInfo p0 = T.detect_period(0.0);
    CHECK(p0.is_periodic);
    CHECK(p0.period == 1);
    CHECK(p0.derivative_of_iterate == doctest::Approx(2.0));
    CHECK(p0.smooth_neighborhood);

    PeriodInfo p3 = T.detect_period(1.0 / 3.0);
    CHECK(p3.is_periodic);
    CHECK(p3.period == 2);
    CHECK(p3.derivative_of_iterate == doctest::Approx(4.0));

    PeriodInfo pir = T.detect_period(std::sqrt(2.0) - 1.0, 20);
    CHECK(!pir.is_periodic);
}

TEST_CASE("detect_period agrees with exhaustive enumeration on dyadics") {
    PiecewiseMap T = make_doubling();
    for (int m = 1; m <= 6; ++m) {
        for (int k = 1; k < (1 << m); k += 2) {
            double z = static_cast<double>(k) / (1 << m);
            // brute force: doubling orbits of dyadics are exact in binary
            double x = z;
            int period = 0;
            for (int p = 1; p <= 32; ++p) {
                x = (x < 0.5) ? 2 * x : 2 * x - 1;
                if (x == z) {
                    period = p;
                    break;
                }
            }
            PeriodInfo info = T.detect_period(z);
            CHECK(info.is_periodic == (period != 0));
            if (period != 0) CHECK(info.period == period);
        }
    }
}

TEST_CASE("detect_period ambiguity near a genuine discontinuity") {
    // interval (non-circle) doubling map: 1/2 is a jump
    std::vector<Branch> br;
    br.emplace_back(0.0, 0.5, AffineShape{2.0, 0.0});
    br.emplace_back(0.5, 1.0, AffineShape{2.0, -1.0});
    PiecewiseMap T(std::move(br), 2.0, MapContext::open_system, /*circle=*/false);
    CHECK_THROWS_AS(T.detect_period(0.5 + 1e-12, 4, 1e-9), AmbiguityError);
}

TEST_CASE("tiling and expansion invariants") {
    for (const PiecewiseMap& T : {make_doubling(), make_metastable(2.0, 0.01)}) {
        double len = 0.0;
        for (const Branch& b : T.branches()) len += b.hi() - b.lo();
        CHECK(len == doctest::Approx(1.0).epsilon(1e-15));

        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int s = 0; s < 10000; ++s) {
            double x = unif(gen);
            CHECK(std::abs(T.derivative(x, Side::right)) >= T.expansion_bound() - 1e-12);
        }
    }
}

TEST_CASE("inverse consistency") {
    PiecewiseMap T = make_metastable(0.5, 0.02);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int s = 0; s < 1000; ++s) {
        double y = unif(gen);
        for (const Branch& b : T.branches()) {
            Interval im = b.image();
            if (y < im.lo || y > im.hi) continue;
            double x = b.inverse(y);
            CHECK(b.value(x) == doctest::Approx(y).epsilon(1e-10));
        }
    }
}

TEST_CASE("metastable invariance of the halves at omega = 0") {
    PiecewiseMap T0 = make_metastable(1.7, 0.0);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> unif(0.0, 0.5);
    for (int s = 0; s < 200; ++s) {
        double x = unif(gen);
        for (double y : T0.orbit(x, 50)) CHECK(y <= 0.5 + 1e-12);
    }
}

TEST_CASE("breakpoint orbits avoid the infinitesimal holes (A4)") {
    PiecewiseMap T0 = make_metastable(2.0, 0.0);
    for (double c : T0.breakpoints()) {
        for (Side side : {Side::left, Side::right}) {
            double x = T0.eval(c, side);
            for (int nstep = 0; nstep < 10; ++nstep) {
                CHECK(std::abs(x - 1.0 / 6.0) >= 0.01);
                CHECK(std::abs(x - 5.0 / 6.0) >= 0.01);
                x = T0.eval(x, Side::right);
            }
        }
    }
}

TEST_CASE("smooth branch support") {
    // x -> x^2 + 2x on [0, sqrt(2)-1], a C^2 branch with derivative >= 2
    double hi = std::sqrt(2.0) - 1.0;
    SmoothShape s{[](double x) { return x * x + 2.0 * x; }, [](double x) { return 2.0 * x + 2.0; },
                  [](double y) { return -1.0 + std::sqrt(1.0 + y); }};
    std::vector<Branch> br;
    br.emplace_back(0.0, hi, s);
    br.emplace_back(hi, 1.0, AffineShape{1.0 / (1.0 - hi), -hi / (1.0 - hi)});
    PiecewiseMap T(std::move(br), 1.7, MapContext::open_system);
    CHECK(T.eval(0.3, Side::left) == doctest::Approx(0.69).epsilon(1e-14));
    for (double y : {0.1, 0.3, 0.7}) {
        auto pre = T.preimages(y);
        CHECK(pre.size() == 2);
        for (const auto& [x, k] : pre)
            CHECK(T.branches()[k].value(x) == doctest::Approx(y).epsilon(1e-12));
    }
}
