#include "rmaps/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "rmaps/parallel.hpp"

namespace rmaps {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 substream(RngSpec spec, std::uint64_t index) {
    return std::mt19937_64(splitmix64(spec.seed ^ splitmix64(index + 1)));
}

double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

struct AtomSampler {
    std::vector<double> cumulative;
    std::vector<IntervalSet> holes;  // pre-expanded per atom

    int draw(double u) const {
        int lo = 0, hi = static_cast<int>(cumulative.size()) - 1;
        while (lo < hi) {
            int mid = (lo + hi) / 2;
            if (u <= cumulative[mid])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }
};

SurvivalFit fit_decay(const std::vector<std::int64_t>& S, std::int64_t n_traj) {
    SurvivalFit fit;
    if (S.back() == n_traj) {  // nothing escaped
        fit.ok = true;
        return fit;
    }
    // window: k >= 1 with 100 <= S_k <= n/2 (the first step is a transient of
    // the Lebesgue start and is excluded by construction)
    int lo = -1, hi = -1;
    for (std::size_t k = 1; k < S.size(); ++k) {
        if (S[k] > n_traj / 2 || S[k] < 100) continue;
        if (lo < 0) lo = static_cast<int>(k);
        hi = static_cast<int>(k);
    }
    if (lo < 0 || hi <= lo) {
        fit.error = "survival fit window is empty (escape too fast or too slow)";
        return fit;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int n = hi - lo + 1;
    for (int k = lo; k <= hi; ++k) {
        double x = k, y = std::log(static_cast<double>(S[k]) / n_traj);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
    }
    double det = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / det;
    fit.lambda_hat = -slope;
    double ss_tot = syy - sy * sy / n;
    double ss_res = 0;
    double intercept = (sy - slope * sx) / n;
    for (int k = lo; k <= hi; ++k) {
        double d = std::log(static_cast<double>(S[k]) / n_traj) - (intercept + slope * k);
        ss_res += d * d;
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    // binomial error of the per-step survival probability over the window
    double p = std::exp(-fit.lambda_hat);
    double exposed = 0;
    for (int k = lo; k < hi; ++k) exposed += static_cast<double>(S[k]);
    fit.stderr_hat = exposed > 0 ? std::sqrt((1.0 - p) / (p * exposed)) : 0.0;
    fit.window_lo = lo;
    fit.window_hi = hi;
    fit.ok = true;
    return fit;
}

}  // namespace

SurvivalCurve simulate_survival(const PiecewiseMap& map, const HoleFamily& holes,
                                const NoiseModel& noise, int n_steps, std::int64_t n_traj,
                                RngSpec rng, int jobs) {
    noise.validate();
    AtomSampler sampler;
    double acc = 0.0;
    for (const auto& a : noise.atoms) {
        acc += a.weight;
        sampler.cumulative.push_back(acc);
        sampler.holes.push_back(holes.intervals(a.omega));
    }
    sampler.cumulative.back() = 1.0;

    // death-step histogram per chunk, reduced in index order (deterministic)
    const int chunks = std::max(1, std::min<int>(64, jobs * 4));
    std::vector<std::vector<std::int64_t>> deaths(chunks,
                                                  std::vector<std::int64_t>(n_steps + 1, 0));
    parallel_for_index(chunks, jobs, [&](int chunk) {
        std::int64_t t0 = n_traj * chunk / chunks;
        std::int64_t t1 = n_traj * (chunk + 1) / chunks;
        auto& local = deaths[chunk];
        for (std::int64_t t = t0; t < t1; ++t) {
            std::mt19937_64 g = substream(rng, static_cast<std::uint64_t>(t));
            double x = uniform01(g);
            for (int k = 1; k <= n_steps; ++k) {
                int a = sampler.draw(uniform01(g));
                if (set_contains(sampler.holes[a], x)) {
                    local[k] += 1;  // killed at step k, before mapping
                    break;
                }
                x = map.eval(x, Side::right);
            }
        }
    });

    SurvivalCurve curve;
    curve.n_traj = n_traj;
    curve.survivors.assign(n_steps + 1, 0);
    curve.survivors[0] = n_traj;
    std::vector<std::int64_t> total(n_steps + 1, 0);
    for (const auto& d : deaths)
        for (int k = 0; k <= n_steps; ++k) total[k] += d[k];
    for (int k = 1; k <= n_steps; ++k) curve.survivors[k] = curve.survivors[k - 1] - total[k];
    curve.fit = fit_decay(curve.survivors, n_traj);
    return curve;
}

DensityVector simulate_stationary(const std::function<PiecewiseMap(double)>& map_for_omega,
                                  const NoiseModel& noise, std::int64_t n_steps,
                                  std::int64_t burn_in, RngSpec rng, int bins) {
    noise.validate();
    std::vector<PiecewiseMap> maps;
    std::vector<double> cumulative;
    double acc = 0.0;
    for (const auto& a : noise.atoms) {
        maps.push_back(map_for_omega(a.omega));
        acc += a.weight;
        cumulative.push_back(acc);
    }
    cumulative.back() = 1.0;
    auto draw = [&](double u) {
        return static_cast<int>(std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                                cumulative.begin());
    };

    std::mt19937_64 g = substream(rng, 0);
    double x = uniform01(g);
    std::vector<std::int64_t> counts(bins, 0);
    for (std::int64_t k = 0; k < burn_in; ++k) x = maps[draw(uniform01(g))].eval(x, Side::right);
    for (std::int64_t k = 0; k < n_steps; ++k) {
        x = maps[draw(uniform01(g))].eval(x, Side::right);
        int b = std::min(bins - 1, static_cast<int>(x * bins));
        counts[b] += 1;
    }

    DensityVector hist;
    hist.grid = build_grid(bins, {});
    hist.values.resize(bins);
    for (int b = 0; b < bins; ++b)
        hist.values[b] = static_cast<double>(counts[b]) * bins / static_cast<double>(n_steps);
    return hist;
}

double mc_vs_spectral(const SurvivalCurve& curve, const EigenPair& pair) {
    double spectral_rate = -std::log(pair.eigenvalue);
    if (!curve.fit.ok) return std::numeric_limits<double>::quiet_NaN();
    if (curve.fit.lambda_hat == 0.0 && spectral_rate < 1e-12) return 0.0;
    if (curve.fit.stderr_hat == 0.0) return 0.0;
    return (curve.fit.lambda_hat - spectral_rate) / curve.fit.stderr_hat;
}

DensityVector resample(const DensityVector& v, int bins) {
    DensityVector out;
    out.grid = build_grid(bins, {});
    out.values.resize(bins);
    for (int b = 0; b < bins; ++b) {
        double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
        out.values[b] = integrate(v, {Interval{lo, hi}}) * bins;
    }
    return out;
}

}  // namespace rmaps
