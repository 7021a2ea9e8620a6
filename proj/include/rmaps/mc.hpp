#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rmaps/grid.hpp"
#include "rmaps/holes.hpp"
#include "rmaps/map.hpp"
#include "rmaps/noise.hpp"
#include "rmaps/ulam.hpp"

namespace rmaps {

// Master seed with one independent substream per trajectory index; the same
// (seed, index) pair reproduces a trajectory bit-exactly at any thread count.
struct RngSpec {
    std::uint64_t seed = 0;
};

struct SurvivalFit {
    bool ok = false;
    double lambda_hat = 0.0;
    double stderr_hat = 0.0;
    double r_squared = 0.0;
    int window_lo = 0, window_hi = 0;  // inclusive fit window in k
    std::string error;
};

struct SurvivalCurve {
    std::int64_t n_traj = 0;
    std::vector<std::int64_t> survivors;  // S_0..S_n, non-increasing, S_0 = n_traj
    SurvivalFit fit;
};

// Open-system survival: each step draws omega, kills the trajectory if the
// current position lies in H_omega, then applies the map (mask-then-map,
// matching the averaged open operator). Initial points i.i.d. uniform.
SurvivalCurve simulate_survival(const PiecewiseMap& map, const HoleFamily& holes,
                                const NoiseModel& noise, int n_steps, std::int64_t n_traj,
                                RngSpec rng, int jobs = 1);

// Occupation histogram of one long random orbit of the perturbed family after
// burn-in, normalized to a density on `bins` uniform cells.
DensityVector simulate_stationary(const std::function<PiecewiseMap(double)>& map_for_omega,
                                  const NoiseModel& noise, std::int64_t n_steps,
                                  std::int64_t burn_in, RngSpec rng, int bins = 1 << 12);

// z-score of the MC rate against the spectral escape rate -ln e.
double mc_vs_spectral(const SurvivalCurve& curve, const EigenPair& pair);

// Cell-average resampling of a density onto a uniform grid (for comparing
// operator densities with histograms).
DensityVector resample(const DensityVector& v, int bins);

}  // namespace rmaps
