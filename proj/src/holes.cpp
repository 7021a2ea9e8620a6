#include "rmaps/holes.hpp"

#include <cmath>
#include <stdexcept>

namespace rmaps {

IntervalSet symmetric_holes(double z, double omega, bool circle) {
    if (omega < 0.0) throw std::domain_error("symmetric_holes: omega must be >= 0");
    double lo = z - 0.5 * omega, hi = z + 0.5 * omega;
    if (lo >= 0.0 && hi <= 1.0) return {Interval{lo, hi}};
    if (!circle)
        throw std::domain_error("symmetric_holes: hole escapes [0,1] without circle topology");
    if (omega >= 1.0) throw std::domain_error("symmetric_holes: hole covers the circle");
    IntervalSet out;
    if (lo < 0.0) {
        out.push_back(Interval{0.0, hi});
        out.push_back(Interval{lo + 1.0, 1.0});
    } else {
        out.push_back(Interval{0.0, hi - 1.0});
        out.push_back(Interval{lo, 1.0});
    }
    return normalized(std::move(out));
}

HoleFamily HoleFamily::symmetric(double z, bool circle) {
    return HoleFamily(z, HoleKind::symmetric, circle,
                      [z, circle](double w) { return symmetric_holes(z, w, circle); });
}

HoleFamily HoleFamily::right_sided(double z) {
    return HoleFamily(z, HoleKind::right_sided, false, [z](double w) {
        if (z + w > 1.0 + 1e-15) throw std::domain_error("right_sided hole escapes [0,1]");
        return IntervalSet{Interval{z, std::min(1.0, z + w)}};
    });
}

HoleFamily HoleFamily::custom(double z, std::function<IntervalSet(double)> rule) {
    return HoleFamily(z, HoleKind::custom, false, std::move(rule));
}

IntervalSet HoleFamily::intervals(double omega) const { return normalized(rule_(omega)); }

ConditionCReport check_condition_C(const NoiseModel& noise, const HoleFamily& holes,
                                   double upsilon) {
    double width = std::pow(noise.epsilon, upsilon);
    double lo = noise.epsilon - width, hi = noise.epsilon;
    ConditionCReport rep;
    for (const auto& a : noise.atoms) {
        double m = holes.measure(a.omega);
        if (m > lo && m < hi) rep.mass += a.weight;
    }
    rep.margin = rep.mass - (1.0 - width);
    rep.pass = rep.margin > 0.0;
    return rep;
}

AveragedHoleMeasures averaged_hole_measures(const NoiseModel& noise, const HoleFamily& holes,
                                            const DensityVector* density) {
    AveragedHoleMeasures out;
    for (const auto& a : noise.atoms) {
        IntervalSet H = holes.intervals(a.omega);
        double m = total_length(H);
        out.A_eps += a.weight * m;
        out.Delta_eps += a.weight * (density ? integrate(*density, H) : m);
    }
    return out;
}

}  // namespace rmaps
