#pragma once

#include <functional>
#include <optional>

#include "rmaps/grid.hpp"
#include "rmaps/interval.hpp"
#include "rmaps/noise.hpp"

namespace rmaps {

enum class HoleKind { symmetric, right_sided, custom };

// Symmetric hole [z - omega/2, z + omega/2]; on the circle the interval is
// wrapped into [0,1] pieces.
IntervalSet symmetric_holes(double z, double omega, bool circle = false);

// Rule omega -> H_omega around a fixed center z, with z in H_omega for all
// atoms and H_omega inside the envelope H_eps.
class HoleFamily {
public:
    static HoleFamily symmetric(double z, bool circle = false);
    static HoleFamily right_sided(double z);
    static HoleFamily custom(double z, std::function<IntervalSet(double)> rule);

    IntervalSet intervals(double omega) const;
    double measure(double omega) const { return total_length(intervals(omega)); }
    IntervalSet envelope(double eps) const { return intervals(eps); }

    double center() const { return z_; }
    HoleKind kind() const { return kind_; }
    bool circle() const { return circle_; }

private:
    HoleFamily(double z, HoleKind kind, bool circle, std::function<IntervalSet(double)> rule)
        : z_(z), kind_(kind), circle_(circle), rule_(std::move(rule)) {}
    double z_;
    HoleKind kind_;
    bool circle_;
    std::function<IntervalSet(double)> rule_;
};

struct ConditionCReport {
    bool pass = false;
    double margin = 0.0;  // mass - (1 - eps^upsilon)
    double mass = 0.0;    // theta{omega : m(H_omega) in (eps - eps^upsilon, eps)}
};

// Membership window (eps - eps^upsilon, eps) taken open on both ends; an atom
// whose hole measure equals eps exactly does not count.
ConditionCReport check_condition_C(const NoiseModel& noise, const HoleFamily& holes,
                                   double upsilon);

struct AveragedHoleMeasures {
    double A_eps = 0.0;      // integral of m(H_omega) d(theta)
    double Delta_eps = 0.0;  // integral of mu(H_omega) d(theta)
};

// density == nullptr means the exact uniform density (mu = Lebesgue).
AveragedHoleMeasures averaged_hole_measures(const NoiseModel& noise, const HoleFamily& holes,
                                            const DensityVector* density = nullptr);

}  // namespace rmaps
