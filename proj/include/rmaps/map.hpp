#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "rmaps/interval.hpp"

namespace rmaps {

enum class Side { left, right };
enum class MapContext { open_system, metastable };

// y = slope * x + intercept, exact interval arithmetic available.
struct AffineShape {
    double slope = 0.0;
    double intercept = 0.0;
};

// Monotone C^2 branch given by forward map, derivative and inverse.
struct SmoothShape {
    std::function<double(double)> forward;
    std::function<double(double)> derivative;
    std::function<double(double)> inverse;
};

class Branch {
public:
    Branch(double lo, double hi, AffineShape shape) : lo_(lo), hi_(hi), shape_(shape) {}
    Branch(double lo, double hi, SmoothShape shape) : lo_(lo), hi_(hi), shape_(std::move(shape)) {}

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool is_affine() const { return std::holds_alternative<AffineShape>(shape_); }
    const AffineShape& affine() const { return std::get<AffineShape>(shape_); }

    double value(double x) const;
    double slope_at(double x) const;
    double inverse(double y) const;
    bool invertible() const;
    bool increasing() const { return slope_at(0.5 * (lo_ + hi_)) > 0.0; }

    // Closed image of the closed branch domain, endpoints sorted.
    Interval image() const;

private:
    double lo_, hi_;
    std::variant<AffineShape, SmoothShape> shape_;
};

struct PeriodInfo {
    bool is_periodic = false;
    int period = 0;
    double derivative_of_iterate = 0.0;
    bool smooth_neighborhood = false;
};

// Piecewise C^2 expanding map of [0,1], bi-valued at branch cut points.
class PiecewiseMap {
public:
    PiecewiseMap(std::vector<Branch> branches, double expansion_bound, MapContext context,
                 bool circle = false, bool uniform_acim = false);

    double eval(double x, Side side) const;
    double derivative(double x, Side side) const;
    std::vector<std::pair<double, int>> preimages(double y) const;
    std::vector<double> orbit(double x, int n) const;
    PeriodInfo detect_period(double z, int p_max = 32, double tol = 1e-9) const;

    const std::vector<Branch>& branches() const { return branches_; }
    // Interior cut points c_{i,0} between consecutive branch domains.
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    double expansion_bound() const { return expansion_bound_; }
    MapContext context() const { return context_; }
    bool circle() const { return circle_; }
    // True when Lebesgue measure is known to be invariant (exact densities).
    bool uniform_acim() const { return uniform_acim_; }

    bool continuous_at(double x, double tol = 1e-12) const;
    // Continuous with matching one-sided derivatives (circle-aware).
    bool smooth_at(double x, double tol = 1e-12) const;

private:
    int branch_index(double x, Side side) const;

    std::vector<Branch> branches_;
    std::vector<double> breakpoints_;
    double expansion_bound_;
    MapContext context_;
    bool circle_;
    bool uniform_acim_;
};

// 2x mod 1 on the circle.
PiecewiseMap make_doubling();

// Six-branch zigzag family with almost-invariant halves. The unperturbed map
// (omega = 0) leaves [0,1/2] and [1/2,1] invariant with uniform densities;
// omega > 0 raises the left peak to 1/2+omega and lowers the right valley to
// 1/2-c*omega, opening leakage windows around 1/6 and 5/6.
PiecewiseMap make_metastable(double c, double omega);

}  // namespace rmaps
