#include "rmaps/escape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmaps/errors.hpp"
#include "rmaps/parallel.hpp"

namespace rmaps {

GridPtr escape_grid(const PiecewiseMap& map, const NoiseModel& noise, const HoleFamily& holes,
                    int N, int orbit_depth) {
    std::vector<double> refs = map.breakpoints();
    std::vector<double> seeds;
    for (const auto& atom : noise.atoms)
        for (const auto& iv : holes.intervals(atom.omega)) {
            seeds.push_back(iv.lo);
            seeds.push_back(iv.hi);
        }
    refs.insert(refs.end(), seeds.begin(), seeds.end());
    for (double s : seeds) {
        double x = s;
        for (int d = 0; d < orbit_depth; ++d) {
            x = map.eval(x, Side::right);
            refs.push_back(x);
        }
    }
    return build_grid(N, refs);
}

DensityVector closed_invariant_density(const PiecewiseMap& map, GridPtr grid, double tol) {
    if (map.uniform_acim()) return DensityVector::ones(std::move(grid));
    UlamOperator closed = build_closed(map, grid);
    EigenPair pair = leading_eigenpair(closed, tol);
    pair.density.normalize();
    return pair.density;
}

OpenSolve solve_open_fixture(const EscapeFixture& fixture, double eps) {
    NoiseModel noise = fixture.noise_for_eps(eps);
    GridPtr grid = escape_grid(fixture.map, noise, fixture.holes, fixture.N, fixture.orbit_depth);
    DensityVector rho = closed_invariant_density(fixture.map, grid, fixture.solver_tol);
    AveragedHoleMeasures avg = averaged_hole_measures(
        noise, fixture.holes, fixture.map.uniform_acim() ? nullptr : &rho);

    UlamOperator op = build_open(fixture.map, grid, noise, fixture.holes);
    EigenPair pair = leading_eigenpair(op, fixture.solver_tol, fixture.max_iter);

    EscapeRow row;
    row.eps = eps;
    row.e_eps = pair.eigenvalue;
    row.rate = -std::log(pair.eigenvalue);
    row.A_eps = avg.A_eps;
    row.Delta_eps = avg.Delta_eps;
    row.ratio = avg.Delta_eps > 0.0 ? (1.0 - pair.eigenvalue) / avg.Delta_eps : 0.0;
    row.grid_N = grid->cells();
    row.residual = pair.residual;
    return OpenSolve{row, std::move(op), std::move(pair), std::move(noise)};
}

SweepResult escape_sweep(const EscapeFixture& fixture, std::span<const double> eps_list,
                         int jobs) {
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("escape_sweep: eps list must be strictly decreasing");

    const int n = static_cast<int>(eps_list.size());
    std::vector<EscapeRow> rows(n);
    std::vector<std::string> errs(n);
    parallel_for_index(n, jobs, [&](int i) {
        try {
            rows[i] = solve_open_fixture(fixture, eps_list[i]).row;
        } catch (const std::exception& ex) {
            errs[i] = ex.what();
        }
    });

    SweepResult out;
    for (int i = 0; i < n; ++i) {
        if (errs[i].empty())
            out.rows.push_back(rows[i]);
        else
            out.errors.push_back({eps_list[i], errs[i]});
    }
    return out;
}

double theoretical_limit(const PiecewiseMap& map, double z, int p_max, double tol) {
    PeriodInfo info = map.detect_period(z, p_max, tol);
    if (!info.is_periodic) return 1.0;
    return 1.0 - 1.0 / std::abs(info.derivative_of_iterate);
}

LinearFit extrapolate_limit(std::span<const EscapeRow> rows) {
    if (rows.size() < 3) throw std::invalid_argument("extrapolate_limit: need at least 3 rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        sx += r.eps;
        sy += r.ratio;
        sxx += r.eps * r.eps;
        sxy += r.eps * r.ratio;
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300 * n)
        throw std::invalid_argument("extrapolate_limit: degenerate eps spacing");
    LinearFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (const auto& r : rows) {
        double d = r.ratio - (fit.intercept + fit.slope * r.eps);
        ss += d * d;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

QkTable qk_terms(const PiecewiseMap& map, const DensityVector& rho, GridPtr grid,
                 const NoiseModel& noise, const HoleFamily& holes, int k_max) {
    UlamOperator closed = build_closed(map, grid);
    UlamOperator open = build_open(map, grid, noise, holes);
    AveragedHoleMeasures avg = averaged_hole_measures(noise, holes, &rho);
    if (!(avg.Delta_eps > 0.0)) throw std::runtime_error("qk_terms: Delta_eps must be positive");

    auto diff_apply = [&](const DensityVector& f) {
        DensityVector a = closed.apply_density(f);
        DensityVector b = open.apply_density(f);
        for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
        return a;
    };

    QkTable table;
    table.eps = noise.epsilon;
    DensityVector v = diff_apply(rho);
    for (int k = 0; k <= k_max; ++k) {
        DensityVector w = diff_apply(v);
        table.q.push_back(w.integral() / avg.Delta_eps);
        if (k < k_max) v = open.apply_density(v);
    }
    for (double q : table.q) table.partial_sum += q;
    return table;
}

double accsm_measure(const EigenPair& pair, const NoiseModel& noise, const HoleFamily& holes,
                     const Interval& A) {
    const Grid& g = *pair.density.grid;
    if (!g.has_point(A.lo) || !g.has_point(A.hi))
        throw std::domain_error("accsm_measure: interval endpoints must lie on the grid");
    double acc = 0.0;
    for (const auto& atom : noise.atoms) {
        // int_A g 1_{X_omega} dm, exact on the grid
        double inA = integrate(pair.density, {A});
        double inHole = 0.0;
        for (const auto& h : holes.intervals(atom.omega)) {
            Interval cap = intersect(h, A);
            if (!cap.degenerate()) inHole += integrate(pair.density, {cap});
        }
        acc += atom.weight * (inA - inHole);
    }
    return acc / pair.eigenvalue;
}

}  // namespace rmaps
