#include <doctest.h>

#include <cmath>

#include "rmaps/metastable.hpp"

using namespace rmaps;

namespace {

double closed_form_left(double w) { return 2.0 * w / (3.0 * (1.0 + 2.0 * w)); }
double closed_form_right(double c, double w) {
    return 2.0 * c * w / (3.0 * (1.0 + 2.0 * c * w));
}

}  // namespace

TEST_CASE("compute_holes matches the closed forms") {
    PerturbedFamily f1 = make_benchmark_family(1.0);
    SideHoles empty = compute_holes(f1, 0.0);
    CHECK(total_length(empty.left) == 0.0);
    CHECK(total_length(empty.right) == 0.0);

    SideHoles h = compute_holes(f1, 0.01);
    REQUIRE(h.left.size() == 1);
    REQUIRE(h.right.size() == 1);
    CHECK(total_length(h.left) == doctest::Approx(closed_form_left(0.01)).epsilon(1e-13));
    CHECK(total_length(h.right) == doctest::Approx(closed_form_right(1.0, 0.01)).epsilon(1e-13));
    // the infinitesimal holes sit inside the windows
    CHECK(h.left[0].contains(1.0 / 6.0));
    CHECK(h.right[0].contains(5.0 / 6.0));

    PerturbedFamily f2 = make_benchmark_family(2.0);
    SideHoles h2 = compute_holes(f2, 0.01);
    double ratio = total_length(h2.right) / total_length(h2.left);
    CHECK(ratio == doctest::Approx(closed_form_right(2.0, 0.01) / closed_form_left(0.01))
                       .epsilon(1e-12));
    CHECK(ratio == doctest::Approx(1.9615).epsilon(1e-3));  // finite-eps bias below c = 2

    PerturbedFamily f0 = make_benchmark_family(0.0);
    SideHoles h0 = compute_holes(f0, 0.01);
    CHECK(total_length(h0.right) == 0.0);
    CHECK(total_length(h0.left) > 0.0);
}

TEST_CASE("infinitesimal holes come out of preimages of b") {
    PerturbedFamily f = make_benchmark_family(1.3);
    PiecewiseMap T0 = f.map_for_omega(0.0);
    auto pre = T0.preimages(f.b);
    std::vector<double> h0;
    for (const auto& [x, k] : pre)
        if (std::abs(x - f.b) > 1e-12) h0.push_back(x);
    REQUIRE(h0.size() == f.infinitesimal_holes.size());
    for (std::size_t i = 0; i < h0.size(); ++i)
        CHECK(h0[i] == doctest::Approx(f.infinitesimal_holes[i]).epsilon(1e-12));
}

TEST_CASE("restricted invariant densities are uniform on their halves") {
    PerturbedFamily f = make_benchmark_family(1.0);
    NoiseModel noise = make_uniform_noise(1e-3, 4);
    GridPtr grid = metastable_grid(f, noise, 1 << 12);
    auto [rho_l, rho_r] = restricted_invariant_densities(f, grid);
    CHECK(rho_l.integral() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho_r.integral() == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < grid->cells(); ++i) {
        double x = grid->midpoint(i);
        if (x < 0.5) {
            CHECK(rho_l.values[i] == doctest::Approx(2.0).epsilon(1e-9));
            CHECK(rho_r.values[i] == 0.0);
        } else {
            CHECK(rho_l.values[i] == 0.0);
            CHECK(rho_r.values[i] == doctest::Approx(2.0).epsilon(1e-9));
        }
    }
    // positivity at the infinitesimal holes
    CHECK(rho_l.values[grid->locate(1.0 / 6.0)] > 0.0);
    CHECK(rho_r.values[grid->locate(5.0 / 6.0)] > 0.0);
}

TEST_CASE("lahr and predicted alpha") {
    CHECK(predicted_alpha(1.0) == doctest::Approx(0.5));
    CHECK(predicted_alpha(2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(predicted_alpha(0.0) == 0.0);
    CHECK_THROWS(predicted_alpha(-0.5));

    PerturbedFamily f1 = make_benchmark_family(1.0);
    NoiseModel noise = make_uniform_noise(0.01, 4);
    CHECK(lahr(f1, noise) == doctest::Approx(1.0).epsilon(1e-12));  // symmetric

    PerturbedFamily f2 = make_benchmark_family(2.0);
    CHECK(lahr(f2, noise) == doctest::Approx(2.0).epsilon(0.02));  // finite-eps bias

    PerturbedFamily f0 = make_benchmark_family(0.0);
    CHECK(lahr(f0, noise) == 0.0);
}

TEST_CASE("check_B4") {
    NoiseModel noise = make_uniform_noise(0.01, 2);
    for (double c : {0.5, 1.0, 2.0}) {
        B4Result r = check_B4(make_benchmark_family(c), noise);
        CHECK(r.applicable);
        CHECK(r.pass);
    }
    // omega = 0 only: vacuous membership, flagged not applicable
    B4Result na = check_B4(make_benchmark_family(1.0), make_deterministic_noise(0.0));
    CHECK(!na.applicable);

    // negative control: a family whose declared infinitesimal hole is wrong
    PerturbedFamily bad = make_benchmark_family(1.0);
    bad.infinitesimal_holes = {0.25, 5.0 / 6.0};
    B4Result neg = check_B4(bad, noise);
    CHECK(neg.applicable);
    CHECK(!neg.pass);
}

TEST_CASE("corollary ratio orientations") {
    CorollaryRatio same = corollary_ratio(0.99, 0.99);
    CHECK(same.forward == doctest::Approx(1.0));
    CHECK(same.reverse == doctest::Approx(1.0));
    CHECK(!same.degenerate);

    CorollaryRatio deg = corollary_ratio(1.0, 0.99);
    CHECK(deg.degenerate);
    CHECK(std::isinf(deg.reverse));
    CHECK(deg.forward == 0.0);
}

TEST_CASE("open subsystem eigenvalues") {
    NoiseModel zero = make_deterministic_noise(0.0);
    PerturbedFamily f = make_benchmark_family(1.0);
    EigenPair e = open_subsystem_eigen(f, Side::left, zero, 1 << 8);
    CHECK(e.eigenvalue == doctest::Approx(1.0).epsilon(1e-11));  // no holes

    NoiseModel noise = make_uniform_noise(1e-2, 4);
    EigenPair el = open_subsystem_eigen(f, Side::left, noise, 1 << 8);
    EigenPair er = open_subsystem_eigen(f, Side::right, noise, 1 << 8);
    CHECK(el.eigenvalue == doctest::Approx(er.eigenvalue).epsilon(1e-10));  // c = 1 symmetry
    CHECK(el.eigenvalue < 1.0);
    CHECK(el.eigenvalue > 0.9);

    // leading-order escape: 1 - e ~ sum theta(w) * 2 m(H_{l,w})
    double predicted = 0.0;
    for (const auto& a : noise.atoms)
        predicted += a.weight * 2.0 * closed_form_left(a.omega);
    CHECK(1.0 - el.eigenvalue == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("balance residual is tiny for the symmetric family") {
    PerturbedFamily f = make_benchmark_family(1.0);
    NoiseModel noise = make_uniform_noise(1e-2, 4);
    MetastableReport rep = stationary_and_compare(f, noise, 1 << 10);
    CHECK(rep.balance_residual <= 1e-9);
    CHECK(rep.alpha_pred == doctest::Approx(0.5));
    CHECK(rep.alpha_mass == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(!rep.ergodic_warning);
    CHECK(!rep.degenerate);
}

TEST_CASE("stationary density: symmetric family is mirror symmetric") {
    PerturbedFamily f = make_benchmark_family(1.0);
    NoiseModel noise = make_uniform_noise(1e-2, 4);
    MetastableReport rep = stationary_and_compare(f, noise, 1 << 10);
    const Grid& g = *rep.rho_eps.grid;
    // evaluate by position: the refined grid is mirror symmetric for c = 1
    for (int i = 0; i < g.cells(); ++i) {
        double x = g.midpoint(i);
        double mirrored = rep.rho_eps.values[g.locate(1.0 - x)];
        CHECK(rep.rho_eps.values[i] == doctest::Approx(mirrored).epsilon(1e-7));
    }
    CHECK(rep.l1_error <= 0.06);
}

TEST_CASE("stationary report for c = 2 at moderate resolution") {
    PerturbedFamily f = make_benchmark_family(2.0);
    NoiseModel noise = make_uniform_noise(1e-2, 4);
    MetastableReport rep = stationary_and_compare(f, noise, 1 << 10);
    CHECK(rep.alpha_pred == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rep.alpha_mass == doctest::Approx(2.0 / 3.0).epsilon(0.02));
    CHECK(rep.balance_residual <= 1e-8);
    CHECK(rep.matching_orientation == "reverse");
    CHECK(rep.ratio_reverse == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rep.alpha_ratio == doctest::Approx(2.0 / 3.0).epsilon(0.03));
    CHECK(rep.l1_error <= 0.08);
}

TEST_CASE("degenerate one-way leakage at c = 0") {
    PerturbedFamily f = make_benchmark_family(0.0);
    NoiseModel noise = make_uniform_noise(1e-2, 4);
    MetastableReport rep = stationary_and_compare(f, noise, 1 << 9);
    CHECK(rep.alpha_pred == 0.0);
    CHECK(rep.degenerate);
    CHECK(rep.matching_orientation == "degenerate");
    // all mass drains to the right half
    CHECK(rep.alpha_mass <= 0.01);
    CHECK(rep.balance_residual == 0.0);
}

TEST_CASE("l1 error decreases along the eps sequence") {
    PerturbedFamily f = make_benchmark_family(2.0);
    double prev = 1e9;
    for (double eps : {1e-2, 3.162e-3, 1e-3}) {
        MetastableReport rep = stationary_and_compare(f, make_uniform_noise(eps, 4), 1 << 10);
        CHECK(rep.l1_error < prev);
        prev = rep.l1_error;
    }
}
