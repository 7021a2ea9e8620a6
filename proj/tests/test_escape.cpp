#include <doctest.h>

#include <cmath>

#include "rmaps/escape.hpp"

using namespace rmaps;

namespace {

EscapeFixture z0_fixture(int N = 1 << 8) {
    EscapeFixture fx{make_doubling(), HoleFamily::right_sided(0.0),
                     [](double eps) { return make_deterministic_noise(eps); }};
    fx.N = N;
    return fx;
}

}  // namespace

TEST_CASE("theoretical limits") {
    PiecewiseMap T = make_doubling();
    CHECK(theoretical_limit(T, 0.0) == doctest::Approx(0.5));
    CHECK(theoretical_limit(T, 1.0 / 3.0) == doctest::Approx(0.75));
    CHECK(theoretical_limit(T, std::sqrt(2.0) - 1.0, 20) == 1.0);
}

TEST_CASE("extrapolation on synthetic rows") {
    std::vector<EscapeRow> rows;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        EscapeRow r;
        r.eps = eps;
        r.ratio = 0.5 + 2.0 * eps;  // exact linear data
        rows.push_back(r);
    }
    LinearFit fit = extrapolate_limit(rows);
    CHECK(fit.intercept == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(fit.rms_residual <= 1e-12);

    for (auto& r : rows) r.ratio = 1.0;  // constant rows
    LinearFit flat = extrapolate_limit(rows);
    CHECK(flat.intercept == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(flat.slope == doctest::Approx(0.0));

    rows.resize(2);
    CHECK_THROWS(extrapolate_limit(rows));
}

TEST_CASE("escape rows at the analytic hole sizes") {
    EscapeFixture fx = z0_fixture(4);
    OpenSolve quarter = solve_open_fixture(fx, 0.25);
    CHECK(quarter.row.e_eps == doctest::Approx((1.0 + std::sqrt(5.0)) / 4.0).epsilon(1e-12));
    CHECK(quarter.row.ratio == doctest::Approx(0.7639320225).epsilon(1e-8));
    CHECK(quarter.row.A_eps == doctest::Approx(0.25));

    EscapeFixture fx2 = z0_fixture(2);
    OpenSolve half = solve_open_fixture(fx2, 0.5);
    CHECK(half.row.e_eps == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(half.row.ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sweep: ratio decreases toward 1/2 for the fixed point") {
    EscapeFixture fx = z0_fixture(1 << 8);
    std::vector<double> eps;
    for (int k = 2; k <= 8; ++k) eps.push_back(std::pow(2.0, -k));
    SweepResult sweep = escape_sweep(fx, eps, 2);
    REQUIRE(sweep.errors.empty());
    REQUIRE(sweep.rows.size() == eps.size());
    for (std::size_t i = 1; i < sweep.rows.size(); ++i)
        CHECK(sweep.rows[i].ratio < sweep.rows[i - 1].ratio);
    for (const auto& r : sweep.rows) {
        CHECK(r.ratio > 0.5);
        CHECK(r.e_eps > 0.0);
        CHECK(r.e_eps < 1.0);
        CHECK(r.rate > 0.0);
    }
    // scale consistency once e > 0.99
    for (const auto& r : sweep.rows)
        if (r.e_eps > 0.99) CHECK(r.rate == doctest::Approx(1.0 - r.e_eps).epsilon(0.02));
}

TEST_CASE("sweep records per-row errors and continues") {
    EscapeFixture fx{make_doubling(), HoleFamily::symmetric(0.01),
                     [](double eps) { return make_deterministic_noise(eps); }};
    fx.N = 1 << 6;
    std::vector<double> eps{0.1, 0.01};  // first hole escapes [0,1]
    SweepResult sweep = escape_sweep(fx, eps);
    CHECK(sweep.errors.size() == 1);
    CHECK(sweep.errors[0].eps == 0.1);
    CHECK(sweep.rows.size() == 1);

    std::vector<double> increasing{0.01, 0.1};
    CHECK_THROWS(escape_sweep(fx, increasing));
}

// The q_k tables carry two scales: head terms fixed by the orbit structure of
// the center (exactly 1/2 at k = 0 for a fixed point, 1/4 at k = p-1 = 1 for
// period two), and O(eps) tails from deep dyadic preimage components of the
// hole that re-enter it once 2^{-(k+1)} < eps. The tails vanish with eps for
// each fixed k, which is all the limit theorem claims.

TEST_CASE("qk terms: fixed point hole") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::right_sided(0.0);
    double eps = std::pow(2.0, -10);
    NoiseModel det = make_deterministic_noise(eps);
    GridPtr grid = escape_grid(T, det, hole, 1 << 10, 48);
    DensityVector rho = closed_invariant_density(T, grid);
    QkTable table = qk_terms(T, rho, grid, det, hole, 10);
    CHECK(table.q[0] == doctest::Approx(0.5).epsilon(1e-10));
    for (std::size_t k = 1; k + 1 < table.q.size(); ++k) CHECK(std::abs(table.q[k]) <= 1e-12);
    CHECK(std::abs(table.q[10]) <= 2.0 * eps);  // first dyadic return
    CHECK(table.partial_sum == doctest::Approx(0.5).epsilon(0.01));

    // Lemma Le5 consistency against the directly computed ratio
    EscapeFixture fx{T, hole, [](double e) { return make_deterministic_noise(e); }};
    fx.N = 1 << 10;
    OpenSolve sol = solve_open_fixture(fx, eps);
    CHECK(std::abs(1.0 - table.partial_sum - sol.row.ratio) <= 0.01 * sol.row.ratio);
}

TEST_CASE("qk terms: period-two hole at 1/3") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::symmetric(1.0 / 3.0);
    double eps = std::pow(2.0, -10);
    NoiseModel det = make_deterministic_noise(eps);
    GridPtr grid = escape_grid(T, det, hole, 1 << 10, 48);
    DensityVector rho = closed_invariant_density(T, grid);
    QkTable table = qk_terms(T, rho, grid, det, hole, 10);
    CHECK(std::abs(table.q[0]) <= 1e-10);
    CHECK(table.q[1] == doctest::Approx(0.25).epsilon(1e-8));
    for (std::size_t k = 2; k < table.q.size(); ++k) CHECK(std::abs(table.q[k]) <= 0.01);
    // 1 - sum close to the periodic-point limit 1 - 1/|(T^2)'|
    CHECK(1.0 - table.partial_sum == doctest::Approx(0.75).epsilon(0.01));

    EscapeFixture fx{T, hole, [](double e) { return make_deterministic_noise(e); }};
    fx.N = 1 << 10;
    OpenSolve sol = solve_open_fixture(fx, eps);
    CHECK(std::abs(1.0 - table.partial_sum - sol.row.ratio) <= 0.02 * sol.row.ratio);
}

TEST_CASE("qk terms: non-periodic center has vanishing corrections") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::symmetric(std::sqrt(2.0) - 1.0);
    double eps = std::pow(2.0, -10);
    NoiseModel det = make_deterministic_noise(eps);
    GridPtr grid = escape_grid(T, det, hole, 1 << 10, 48);
    DensityVector rho = closed_invariant_density(T, grid);
    QkTable table = qk_terms(T, rho, grid, det, hole, 10);
    for (double q : table.q) CHECK(std::abs(q) <= 0.01);
    CHECK(table.partial_sum <= 0.03);
}

TEST_CASE("accsm measure") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::right_sided(0.0);
    NoiseModel det = make_deterministic_noise(0.5);
    GridPtr g = build_grid(4, {});
    UlamOperator op = build_open(T, g, det, hole);
    EigenPair pair = leading_eigenpair(op, 1e-13);
    pair.density.normalize();

    CHECK(accsm_measure(pair, det, hole, Interval{0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(accsm_measure(pair, det, hole, Interval{0.0, 0.5}) == doctest::Approx(0.0));
    CHECK(accsm_measure(pair, det, hole, Interval{0.5, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));

    // additivity on disjoint aligned intervals
    double a = accsm_measure(pair, det, hole, Interval{0.0, 0.25});
    double b = accsm_measure(pair, det, hole, Interval{0.25, 0.75});
    double c = accsm_measure(pair, det, hole, Interval{0.75, 1.0});
    CHECK(a + b + c == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(accsm_measure(pair, det, hole, Interval{0.1, 0.5}), std::domain_error);
}

TEST_CASE("escape grid carries hole endpoints and their orbits") {
    PiecewiseMap T = make_doubling();
    HoleFamily hole = HoleFamily::symmetric(1.0 / 3.0);
    NoiseModel det = make_deterministic_noise(0.01);
    GridPtr g = escape_grid(T, det, hole, 64, 8);
    for (const auto& iv : hole.intervals(0.01)) {
        CHECK(g->has_point(iv.lo));
        CHECK(g->has_point(iv.hi));
        double x = iv.lo;
        for (int d = 0; d < 8; ++d) {
            x = T.eval(x, Side::right);
            CHECK(g->has_point(x));
        }
    }
}
