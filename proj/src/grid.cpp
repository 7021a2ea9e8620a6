#include "rmaps/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rmaps {

namespace {
constexpr double kMergeTol = 1e-13;
}

Grid Grid::build(int N, std::span<const double> refinements) {
    if (N < 2) throw std::invalid_argument("build_grid: N must be >= 2");
    std::vector<double> cuts;
    cuts.reserve(N + 1 + refinements.size());
    for (int i = 0; i <= N; ++i) cuts.push_back(static_cast<double>(i) / N);
    for (double r : refinements) {
        if (r < 0.0 || r > 1.0) throw std::invalid_argument("build_grid: refinement outside [0,1]");
        cuts.push_back(r);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> merged;
    merged.reserve(cuts.size());
    merged.push_back(0.0);
    for (double x : cuts)
        if (x - merged.back() > kMergeTol) merged.push_back(x);
    merged.back() = 1.0;
    return Grid(std::move(merged));
}

int Grid::locate(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("grid: point outside [0,1]");
    auto it = std::upper_bound(cuts_.begin(), cuts_.end(), x);
    int i = static_cast<int>(it - cuts_.begin()) - 1;
    return std::min(i, cells() - 1);
}

bool Grid::has_point(double x, double tol) const {
    auto it = std::lower_bound(cuts_.begin(), cuts_.end(), x - tol);
    return it != cuts_.end() && std::abs(*it - x) <= tol;
}

GridPtr build_grid(int N, std::span<const double> refinements) {
    return std::make_shared<Grid>(Grid::build(N, refinements));
}

double DensityVector::integral() const {
    double s = 0.0;
    for (int i = 0; i < grid->cells(); ++i) s += values[i] * grid->width(i);
    return s;
}

void DensityVector::normalize() {
    double s = integral();
    if (!(s > 0.0)) throw std::runtime_error("density: cannot normalize, integral <= 0");
    for (double& v : values) v /= s;
}

double DensityVector::l1_distance(const DensityVector& other) const {
    if (other.grid->cells() != grid->cells())
        throw std::invalid_argument("l1_distance: grids differ");
    double s = 0.0;
    for (int i = 0; i < grid->cells(); ++i)
        s += std::abs(values[i] - other.values[i]) * grid->width(i);
    return s;
}

DensityVector DensityVector::ones(GridPtr grid) {
    DensityVector v;
    v.values.assign(grid->cells(), 1.0);
    v.grid = std::move(grid);
    return v;
}

double integrate(const DensityVector& v, const IntervalSet& set) {
    const Grid& g = *v.grid;
    double sum = 0.0;
    for (const auto& iv : set) {
        if (iv.degenerate()) continue;
        int i0 = g.locate(iv.lo);
        int i1 = iv.hi >= 1.0 ? g.cells() - 1 : g.locate(iv.hi);
        for (int i = i0; i <= i1; ++i) {
            double lo = std::max(iv.lo, g.cut(i));
            double hi = std::min(iv.hi, g.cut(i + 1));
            if (hi > lo) sum += v.values[i] * (hi - lo);
        }
    }
    return sum;
}

std::vector<double> surviving_fractions(const Grid& grid, const IntervalSet& holes) {
    std::vector<double> w(grid.cells(), 1.0);
    for (const auto& h : holes) {
        if (h.degenerate()) continue;
        int i0 = grid.locate(h.lo);
        int i1 = h.hi >= 1.0 ? grid.cells() - 1 : grid.locate(h.hi);
        for (int i = i0; i <= i1; ++i) {
            double lo = std::max(h.lo, grid.cut(i));
            double hi = std::min(h.hi, grid.cut(i + 1));
            if (hi > lo) w[i] -= (hi - lo) / grid.width(i);
        }
    }
    for (double& x : w) x = std::min(1.0, std::max(0.0, x));
    return w;
}

}  // namespace rmaps
