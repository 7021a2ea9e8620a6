#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rmaps/escape.hpp"
#include "rmaps/holes.hpp"
#include "rmaps/map.hpp"
#include "rmaps/noise.hpp"
#include "rmaps/ulam.hpp"

namespace rmaps {

// A randomly perturbed family T_omega whose unperturbed member T_0 leaves the
// two sides of b invariant; perturbations open leakage windows around the
// infinitesimal holes.
struct PerturbedFamily {
    double b = 0.5;
    double c = 1.0;  // asymmetry parameter of the benchmark construction
    std::function<PiecewiseMap(double)> map_for_omega;
    std::vector<double> infinitesimal_holes;  // H_0 = T_0^{-1}{b} \ {b}
    bool exact_uniform_restricted = false;    // rho_l, rho_r known to be uniform
    std::optional<double> exact_lahr_limit;   // closed-form eps->0 hole ratio
};

PerturbedFamily make_benchmark_family(double c);

struct SideHoles {
    IntervalSet left;   // H_{l,omega} = I_l ∩ T_omega^{-1}(I_r)
    IntervalSet right;  // H_{r,omega} = I_r ∩ T_omega^{-1}(I_l)
};

// Exact leakage windows of one constituent map, one component list per side.
SideHoles compute_holes(const PerturbedFamily& family, double omega);

// T_0 restricted to one side, affinely conjugated onto [0,1].
struct RescaledSide {
    PiecewiseMap map;
    double lo = 0.0;    // original subinterval [lo, lo+span]
    double span = 1.0;
    double to_local(double x) const { return (x - lo) / span; }
    double to_global(double y) const { return lo + span * y; }
};
RescaledSide restrict_to_side(const PiecewiseMap& T0, double b, Side side,
                              bool uniform_acim = false);

// Stationary densities of T_0 restricted to each side, solved on the matching
// sub-grids of `grid` and returned on the full grid (supported on one side,
// normalized to integrate to 1).
std::pair<DensityVector, DensityVector> restricted_invariant_densities(
    const PerturbedFamily& family, GridPtr grid, double tol = 1e-12);

// Finite-eps averaged holes ratio  sum theta mu_r(H_r) / sum theta mu_l(H_l).
// Uses exact uniform restricted densities when the family declares them,
// otherwise the supplied ones.
double lahr(const PerturbedFamily& family, const NoiseModel& noise,
            const DensityVector* rho_l = nullptr, const DensityVector* rho_r = nullptr);

double predicted_alpha(double lahr_value);

double balance_check(const DensityVector& rho_eps, const PerturbedFamily& family,
                     const NoiseModel& noise);

EigenPair open_subsystem_eigen(const PerturbedFamily& family, Side side, const NoiseModel& noise,
                               int N, double tol = 1e-12, int orbit_depth = 48);

struct CorollaryRatio {
    double forward = 0.0;  // (1 - e_l) / (1 - e_r)
    double reverse = 0.0;  // (1 - e_r) / (1 - e_l)
    bool degenerate = false;
};
CorollaryRatio corollary_ratio(double e_l, double e_r);

struct B4Result {
    bool applicable = false;  // false when every atom has omega = 0
    bool pass = false;
};
B4Result check_B4(const PerturbedFamily& family, const NoiseModel& noise);

GridPtr metastable_grid(const PerturbedFamily& family, const NoiseModel& noise, int N);

struct MetastableReport {
    double c = 0.0;
    double eps = 0.0;
    int grid_N = 0;
    DensityVector rho_eps, rho_l, rho_r;
    double lahr_eps = 0.0;
    double alpha_pred = 0.0;   // from the family's lahr limit (finite-eps fallback)
    double alpha_mass = 0.0;   // int_{I_l} rho_eps dm
    double alpha_ratio = 0.0;  // from the matching escape-ratio orientation
    double l1_error = 0.0;     // || rho_eps - (alpha rho_l + (1-alpha) rho_r) ||_1
    double balance_residual = 0.0;
    double e_left = 0.0, e_right = 0.0;
    double ratio_forward = 0.0, ratio_reverse = 0.0;
    std::string matching_orientation;  // "forward" | "reverse" | "degenerate"
    bool degenerate = false;
    bool ergodic_warning = false;
    double solver_residual = 0.0;
};

MetastableReport stationary_and_compare(const PerturbedFamily& family, const NoiseModel& noise,
                                        int N, double tol = 1e-12);

}  // namespace rmaps
