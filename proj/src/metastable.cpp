#include "rmaps/metastable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rmaps {

PerturbedFamily make_benchmark_family(double c) {
    PerturbedFamily f;
    f.b = 0.5;
    f.c = c;
    f.map_for_omega = [c](double w) { return make_metastable(c, w); };
    f.infinitesimal_holes = {1.0 / 6.0, 5.0 / 6.0};
    f.exact_uniform_restricted = true;
    f.exact_lahr_limit = c;
    return f;
}

namespace {

// {x in region : T(x) > b} (above) or < b (below) for one monotone branch.
void branch_threshold_piece(const Branch& br, double lo, double hi, double b, bool above,
                            IntervalSet& out) {
    if (hi <= lo) return;
    double vlo = br.value(lo), vhi = br.value(hi);
    bool at_lo = above ? (vlo > b) : (vlo < b);
    bool at_hi = above ? (vhi > b) : (vhi < b);
    if (at_lo && at_hi) {
        out.push_back(Interval{lo, hi});
    } else if (at_lo || at_hi) {
        double xs = std::min(hi, std::max(lo, br.inverse(b)));
        if (at_lo)
            out.push_back(Interval{lo, xs});
        else
            out.push_back(Interval{xs, hi});
    }
}

}  // namespace

SideHoles compute_holes(const PerturbedFamily& family, double omega) {
    PiecewiseMap T = family.map_for_omega(omega);
    SideHoles holes;
    for (const Branch& br : T.branches()) {
        branch_threshold_piece(br, std::max(br.lo(), 0.0), std::min(br.hi(), family.b), family.b,
                               /*above=*/true, holes.left);
        branch_threshold_piece(br, std::max(br.lo(), family.b), std::min(br.hi(), 1.0), family.b,
                               /*above=*/false, holes.right);
    }
    holes.left = normalized(std::move(holes.left));
    holes.right = normalized(std::move(holes.right));
    return holes;
}

RescaledSide restrict_to_side(const PiecewiseMap& T0, double b, Side side, bool uniform_acim) {
    double lo = side == Side::left ? 0.0 : b;
    double span = side == Side::left ? b : 1.0 - b;
    std::vector<Branch> branches;
    for (const Branch& br : T0.branches()) {
        if (side == Side::left ? br.hi() > b : br.lo() < b) continue;
        if (br.is_affine()) {
            double s = br.affine().slope, t = br.affine().intercept;
            branches.emplace_back((br.lo() - lo) / span, (br.hi() - lo) / span,
                                  AffineShape{s, (s * lo + t - lo) / span});
        } else {
            // conjugate the callable triple
            auto f = [br, lo, span](double y) { return (br.value(lo + span * y) - lo) / span; };
            auto df = [br, lo, span](double y) { return br.slope_at(lo + span * y); };
            auto finv = [br, lo, span](double y) {
                return (br.inverse(lo + span * y) - lo) / span;
            };
            branches.emplace_back((br.lo() - lo) / span, (br.hi() - lo) / span,
                                  SmoothShape{f, df, finv});
        }
    }
    if (branches.empty() || branches.front().lo() != 0.0 || branches.back().hi() != 1.0)
        throw std::runtime_error("restrict_to_side: b must be a branch boundary of T0");
    RescaledSide out{PiecewiseMap(std::move(branches), T0.expansion_bound(),
                                  MapContext::open_system, /*circle=*/false, uniform_acim),
                     lo, span};
    return out;
}

std::pair<DensityVector, DensityVector> restricted_invariant_densities(
    const PerturbedFamily& family, GridPtr grid, double tol) {
    PiecewiseMap T0 = family.map_for_omega(0.0);
    if (!grid->has_point(family.b))
        throw std::runtime_error("restricted_invariant_densities: grid must contain b");

    auto solve_side = [&](Side side) {
        RescaledSide sub = restrict_to_side(T0, family.b, side, family.exact_uniform_restricted);
        // matching sub-grid: the full grid's cuts on this side, rescaled
        std::vector<double> cuts;
        for (double x : grid->cuts())
            if (x >= sub.lo - 1e-15 && x <= sub.lo + sub.span + 1e-15)
                cuts.push_back(std::min(1.0, std::max(0.0, sub.to_local(x))));
        GridPtr subgrid = build_grid(2, cuts);
        UlamOperator op = build_closed(sub.map, subgrid);
        EigenPair pair = leading_eigenpair(op, tol);
        pair.density.normalize();

        DensityVector full;
        full.grid = grid;
        full.values.assign(grid->cells(), 0.0);
        int offset = side == Side::left ? 0 : grid->cells() - subgrid->cells();
        for (int i = 0; i < subgrid->cells(); ++i)
            full.values[offset + i] = pair.density.values[i] / sub.span;
        return full;
    };
    return {solve_side(Side::left), solve_side(Side::right)};
}

double lahr(const PerturbedFamily& family, const NoiseModel& noise, const DensityVector* rho_l,
            const DensityVector* rho_r) {
    double num = 0.0, den = 0.0;
    for (const auto& atom : noise.atoms) {
        SideHoles h = compute_holes(family, atom.omega);
        double mul, mur;
        if (family.exact_uniform_restricted) {
            mul = total_length(h.left) / family.b;
            mur = total_length(h.right) / (1.0 - family.b);
        } else {
            if (!rho_l || !rho_r)
                throw std::invalid_argument("lahr: generic family needs restricted densities");
            mul = integrate(*rho_l, h.left);
            mur = integrate(*rho_r, h.right);
        }
        den += atom.weight * mul;
        num += atom.weight * mur;
    }
    if (!(den > 0.0)) throw std::runtime_error("lahr: left averaged hole measure vanishes");
    return num / den;
}

double predicted_alpha(double lahr_value) {
    if (lahr_value < 0.0) throw std::invalid_argument("predicted_alpha: lahr must be >= 0");
    return lahr_value / (1.0 + lahr_value);
}

double balance_check(const DensityVector& rho_eps, const PerturbedFamily& family,
                     const NoiseModel& noise) {
    double bl = 0.0, br = 0.0;
    for (const auto& atom : noise.atoms) {
        SideHoles h = compute_holes(family, atom.omega);
        bl += atom.weight * integrate(rho_eps, h.left);
        br += atom.weight * integrate(rho_eps, h.right);
    }
    // one-way leakage drains the feeding side completely, so both averaged
    // hole masses sit at the solver noise floor; report 0 rather than 0/0
    double denom = std::max(bl, br);
    if (denom < 1e-10) return 0.0;
    return std::abs(bl - br) / denom;
}

EigenPair open_subsystem_eigen(const PerturbedFamily& family, Side side, const NoiseModel& noise,
                               int N, double tol, int orbit_depth) {
    PiecewiseMap T0 = family.map_for_omega(0.0);
    RescaledSide sub = restrict_to_side(T0, family.b, side, family.exact_uniform_restricted);

    // perturbed leakage windows in local coordinates; the map stays unperturbed
    double span = sub.span, lo = sub.lo;
    double hl = 0.0;
    for (double h : family.infinitesimal_holes)
        if (side == Side::left ? h < family.b : h > family.b) hl = sub.to_local(h);
    HoleFamily local = HoleFamily::custom(hl, [family, side, lo, span](double w) {
        SideHoles h = compute_holes(family, w);
        const IntervalSet& src = side == Side::left ? h.left : h.right;
        IntervalSet out;
        for (const auto& iv : src)
            out.push_back(Interval{(iv.lo - lo) / span, (iv.hi - lo) / span});
        return out;
    });

    GridPtr grid = escape_grid(sub.map, noise, local, N, orbit_depth);
    UlamOperator op = build_open(sub.map, grid, noise, local);
    return leading_eigenpair(op, tol);
}

CorollaryRatio corollary_ratio(double e_l, double e_r) {
    CorollaryRatio out;
    double dl = 1.0 - e_l, dr = 1.0 - e_r;
    out.degenerate = dl <= 1e-13 || dr <= 1e-13;
    out.forward = dr > 0.0 ? dl / dr : std::numeric_limits<double>::infinity();
    out.reverse = dl > 0.0 ? dr / dl : std::numeric_limits<double>::infinity();
    return out;
}

B4Result check_B4(const PerturbedFamily& family, const NoiseModel& noise) {
    B4Result res;
    PiecewiseMap T0 = family.map_for_omega(0.0);
    bool ok = true;
    for (double h : family.infinitesimal_holes)
        if (!T0.continuous_at(h, 1e-12)) ok = false;
    for (const auto& atom : noise.atoms) {
        if (!(atom.omega > 0.0)) continue;
        res.applicable = true;
        SideHoles holes = compute_holes(family, atom.omega);
        for (double h : family.infinitesimal_holes) {
            const IntervalSet& side = h < family.b ? holes.left : holes.right;
            bool inside = false;
            for (const auto& iv : side)
                if (h >= iv.lo - 1e-15 && h <= iv.hi + 1e-15) inside = true;
            if (!inside) ok = false;
        }
    }
    res.pass = res.applicable && ok;
    return res;
}

GridPtr metastable_grid(const PerturbedFamily& family, const NoiseModel& noise, int N) {
    std::vector<double> refs{family.b};
    for (const auto& atom : noise.atoms) {
        PiecewiseMap T = family.map_for_omega(atom.omega);
        for (double c : T.breakpoints()) refs.push_back(c);
        SideHoles h = compute_holes(family, atom.omega);
        for (const auto& iv : h.left) {
            refs.push_back(iv.lo);
            refs.push_back(iv.hi);
        }
        for (const auto& iv : h.right) {
            refs.push_back(iv.lo);
            refs.push_back(iv.hi);
        }
    }
    return build_grid(N, refs);
}

MetastableReport stationary_and_compare(const PerturbedFamily& family, const NoiseModel& noise,
                                        int N, double tol) {
    noise.validate();
    MetastableReport rep;
    rep.c = family.c;
    rep.eps = noise.epsilon;

    GridPtr grid = metastable_grid(family, noise, N);
    rep.grid_N = grid->cells();

    UlamOperator op = build_averaged_closed(family.map_for_omega, grid, noise);
    EigenPair pair = leading_eigenpair(op, tol);
    pair.density.normalize();
    rep.rho_eps = pair.density;
    rep.solver_residual = pair.residual;

    std::vector<double> mass(grid->cells());
    for (int i = 0; i < grid->cells(); ++i) mass[i] = rep.rho_eps.values[i] * grid->width(i);
    rep.ergodic_warning = !irreducible_on_support(op, mass);

    auto [rho_l, rho_r] = restricted_invariant_densities(family, grid, tol);
    rep.rho_l = rho_l;
    rep.rho_r = rho_r;

    rep.lahr_eps = lahr(family, noise, &rho_l, &rho_r);
    double lahr_limit = family.exact_lahr_limit.value_or(rep.lahr_eps);
    rep.alpha_pred = predicted_alpha(lahr_limit);

    DensityVector rho0 = rho_l;
    for (int i = 0; i < grid->cells(); ++i)
        rho0.values[i] = rep.alpha_pred * rho_l.values[i] + (1.0 - rep.alpha_pred) * rho_r.values[i];
    rep.l1_error = rep.rho_eps.l1_distance(rho0);

    rep.balance_residual = balance_check(rep.rho_eps, family, noise);
    rep.alpha_mass = integrate(rep.rho_eps, {Interval{0.0, family.b}});

    EigenPair left = open_subsystem_eigen(family, Side::left, noise, N, tol);
    EigenPair right = open_subsystem_eigen(family, Side::right, noise, N, tol);
    rep.e_left = left.eigenvalue;
    rep.e_right = right.eigenvalue;
    CorollaryRatio ratio = corollary_ratio(rep.e_left, rep.e_right);
    rep.ratio_forward = ratio.forward;
    rep.ratio_reverse = ratio.reverse;
    rep.degenerate = ratio.degenerate;
    if (ratio.degenerate) {
        rep.matching_orientation = "degenerate";
        rep.alpha_ratio = rep.alpha_mass;
    } else {
        // pick the orientation whose implied alpha agrees with the mass split
        double a_fwd = ratio.forward / (1.0 + ratio.forward);
        double a_rev = ratio.reverse / (1.0 + ratio.reverse);
        bool fwd = std::abs(a_fwd - rep.alpha_mass) <= std::abs(a_rev - rep.alpha_mass);
        rep.matching_orientation = fwd ? "forward" : "reverse";
        rep.alpha_ratio = fwd ? a_fwd : a_rev;
    }
    return rep;
}

}  // namespace rmaps
