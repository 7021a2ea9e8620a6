#include <doctest.h>

#include <cmath>

#include "rmaps/mc.hpp"
#include "rmaps/metastable.hpp"

using namespace rmaps;

TEST_CASE("reproducibility across thread counts") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::right_sided(0.0);
    NoiseModel det = make_deterministic_noise(0.25);
    SurvivalCurve one = simulate_survival(T, hole, det, 30, 20000, RngSpec{42}, 1);
    SurvivalCurve four = simulate_survival(T, hole, det, 30, 20000, RngSpec{42}, 4);
    CHECK(one.survivors == four.survivors);

    SurvivalCurve other = simulate_survival(T, hole, det, 30, 20000, RngSpec{43}, 1);
    CHECK(one.survivors != other.survivors);
}

TEST_CASE("survival curve shape") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::right_sided(0.0);
    NoiseModel det = make_deterministic_noise(0.25);
    SurvivalCurve curve = simulate_survival(T, hole, det, 40, 100000, RngSpec{1}, 2);
    CHECK(curve.survivors[0] == 100000);
    for (std::size_t k = 1; k < curve.survivors.size(); ++k)
        CHECK(curve.survivors[k] <= curve.survivors[k - 1]);
    REQUIRE(curve.fit.ok);
    CHECK(curve.fit.r_squared >= 0.99);
    // analytic rate -ln((1+sqrt(5))/4)
    double rate = -std::log((1.0 + std::sqrt(5.0)) / 4.0);
    CHECK(std::abs(curve.fit.lambda_hat - rate) <= 3.0 * curve.fit.stderr_hat);
}

TEST_CASE("zero holes never kill") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::right_sided(0.0);
    NoiseModel zero = make_deterministic_noise(0.0);
    SurvivalCurve curve = simulate_survival(T, hole, zero, 20, 5000, RngSpec{7});
    for (auto s : curve.survivors) CHECK(s == 5000);
    CHECK(curve.fit.ok);
    CHECK(curve.fit.lambda_hat == 0.0);
}

TEST_CASE("mc against spectral rate, including a negative control") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::right_sided(0.0);
    NoiseModel det = make_deterministic_noise(0.5);
    GridPtr g = build_grid(2, {});
    UlamOperator op = build_open(T, g, det, hole);
    EigenPair pair = leading_eigenpair(op, 1e-13);

    SurvivalCurve curve = simulate_survival(T, hole, det, 30, 200000, RngSpec{3}, 2);
    CHECK(std::abs(mc_vs_spectral(curve, pair)) <= 3.0);

    // mismatched hole sizes must be flagged loudly
    NoiseModel wrong = make_deterministic_noise(0.25);
    SurvivalCurve bad = simulate_survival(T, hole, wrong, 30, 200000, RngSpec{3}, 2);
    CHECK(std::abs(mc_vs_spectral(bad, pair)) > 10.0);

    // zero-hole convention: z = 0
    NoiseModel zero = make_deterministic_noise(0.0);
    UlamOperator closed_like = build_open(T, g, zero, hole);
    EigenPair one = leading_eigenpair(closed_like, 1e-13);
    SurvivalCurve none = simulate_survival(T, hole, zero, 10, 1000, RngSpec{5});
    CHECK(mc_vs_spectral(none, one) == 0.0);
}

TEST_CASE("stationary histogram of the metastable family") {
    PerturbedFamily f = make_benchmark_family(2.0);
    NoiseModel noise = make_uniform_noise(1e-2, 4);
    DensityVector hist =
        simulate_stationary(f.map_for_omega, noise, 2000000, 10000, RngSpec{11}, 1 << 8);
    CHECK(hist.integral() == doctest::Approx(1.0).epsilon(1e-12));
    double left = integrate(hist, {Interval{0.0, 0.5}});
    CHECK(left == doctest::Approx(2.0 / 3.0).epsilon(0.03));

    // operator density agrees in L1 after resampling to the histogram bins
    MetastableReport rep = stationary_and_compare(f, noise, 1 << 10);
    DensityVector op_density = resample(rep.rho_eps, 1 << 8);
    CHECK(hist.l1_distance(op_density) <= 0.05);
}

TEST_CASE("single-atom noise keeps an orbit inside the invariant half") {
    PerturbedFamily f = make_benchmark_family(1.0);
    // omega = 0: T_0 leaves [0, 1/2] invariant; start the chain inside it
    NoiseModel zero = make_deterministic_noise(0.0);
    PiecewiseMap T0 = f.map_for_omega(0.0);
    double x = 0.237;
    std::int64_t inside = 0;
    const std::int64_t n = 100000;
    for (std::int64_t k = 0; k < n; ++k) {
        x = T0.eval(x, Side::right);
        if (x <= 0.5) ++inside;
    }
    CHECK(inside == n);
    (void)zero;
}

TEST_CASE("resample is exact on aligned piecewise-constant densities") {
    GridPtr fine = build_grid(16, {});
    DensityVector v{fine, std::vector<double>(16, 0.0)};
    for (int i = 0; i < 8; ++i) v.values[i] = 2.0;
    DensityVector coarse = resample(v, 4);
    CHECK(coarse.values[0] == doctest::Approx(2.0));
    CHECK(coarse.values[1] == doctest::Approx(2.0));
    CHECK(coarse.values[2] == doctest::Approx(0.0));
    CHECK(coarse.values[3] == doctest::Approx(0.0));
}
