#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rmaps/interval.hpp"

namespace rmaps {

// Partition of [0,1] into cells: uniform base grid plus mandatory refinement
// points (map breakpoints, hole endpoints, orbit points).
class Grid {
public:
    static Grid build(int N, std::span<const double> refinements);

    int cells() const { return static_cast<int>(cuts_.size()) - 1; }
    double cut(int i) const { return cuts_[i]; }
    double width(int i) const { return cuts_[i + 1] - cuts_[i]; }
    double midpoint(int i) const { return 0.5 * (cuts_[i] + cuts_[i + 1]); }
    const std::vector<double>& cuts() const { return cuts_; }

    // Index of the cell containing x (cells are [cut_i, cut_{i+1})).
    int locate(double x) const;
    // Whether x coincides with a cut point to machine precision.
    bool has_point(double x, double tol = 1e-12) const;

private:
    explicit Grid(std::vector<double> cuts) : cuts_(std::move(cuts)) {}
    std::vector<double> cuts_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(int N, std::span<const double> refinements = {});

// Piecewise-constant density with respect to Lebesgue measure.
struct DensityVector {
    GridPtr grid;
    std::vector<double> values;

    double integral() const;
    void normalize();  // scale so the integral is 1
    double l1_distance(const DensityVector& other) const;

    static DensityVector ones(GridPtr grid);
};

// Exact integral of the piecewise-constant density over an interval set.
double integrate(const DensityVector& v, const IntervalSet& set);

// Per-cell surviving fraction m(cell \ holes) / m(cell).
std::vector<double> surviving_fractions(const Grid& grid, const IntervalSet& holes);

}  // namespace rmaps
