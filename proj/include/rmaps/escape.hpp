#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rmaps/holes.hpp"
#include "rmaps/map.hpp"
#include "rmaps/noise.hpp"
#include "rmaps/ulam.hpp"

namespace rmaps {

struct EscapeRow {
    double eps = 0.0;
    double e_eps = 0.0;
    double rate = 0.0;  // -ln e_eps
    double A_eps = 0.0;
    double Delta_eps = 0.0;
    double ratio = 0.0;  // (1 - e_eps) / Delta_eps
    int grid_N = 0;
    double residual = 0.0;
};

struct SweepError {
    double eps = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<EscapeRow> rows;
    std::vector<SweepError> errors;
};

// One escape experiment: map + hole center/kind + noise law + grid resolution.
struct EscapeFixture {
    PiecewiseMap map;
    HoleFamily holes;
    std::function<NoiseModel(double)> noise_for_eps;
    int N = 1 << 14;
    // Forward images of hole endpoints inserted as refinements; this makes the
    // Ulam matrix exact on the invariant piecewise-constant subspace.
    int orbit_depth = 48;
    double solver_tol = 1e-12;
    long max_iter = 1000000;
};

// Uniform N-grid refined by breakpoints, hole endpoints of every atom, and
// their forward orbits.
GridPtr escape_grid(const PiecewiseMap& map, const NoiseModel& noise, const HoleFamily& holes,
                    int N, int orbit_depth);

// Closed invariant density on the grid: exact uniform when the map declares
// one, otherwise the leading eigenvector of build_closed.
DensityVector closed_invariant_density(const PiecewiseMap& map, GridPtr grid, double tol = 1e-12);

SweepResult escape_sweep(const EscapeFixture& fixture, std::span<const double> eps_list,
                         int jobs = 1);

// Solve one eps of the fixture, returning the open operator and its eigenpair
// along with the filled row (used by sweeps, q_k studies and diagnostics).
struct OpenSolve {
    EscapeRow row;
    UlamOperator op;
    EigenPair pair;
    NoiseModel noise;
};
OpenSolve solve_open_fixture(const EscapeFixture& fixture, double eps);

// Limit of (1 - e_eps)/Delta_eps claimed by the escape-rate theorem: 1 for a
// non-periodic center, 1 - 1/|(T^p)'(z)| for a periodic one.
double theoretical_limit(const PiecewiseMap& map, double z, int p_max = 32, double tol = 1e-9);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};

// Least-squares fit ratio ~ r0 + a * eps over the sweep rows.
LinearFit extrapolate_limit(std::span<const EscapeRow> rows);

struct QkTable {
    double eps = 0.0;
    std::vector<double> q;  // q_{k,eps}, k = 0..k_max
    double partial_sum = 0.0;
};

// q_{k,eps} = m((P0 - Phat) Phat^k (P0 - Phat) rho) / Delta_eps on a common grid.
QkTable qk_terms(const PiecewiseMap& map, const DensityVector& rho, GridPtr grid,
                 const NoiseModel& noise, const HoleFamily& holes, int k_max);

// Conditionally stationary measure of an aligned interval A.
double accsm_measure(const EigenPair& pair, const NoiseModel& noise, const HoleFamily& holes,
                     const Interval& A);

}  // namespace rmaps
