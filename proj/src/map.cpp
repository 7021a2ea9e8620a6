#include "rmaps/map.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rmaps/errors.hpp"

namespace rmaps {

namespace {
constexpr double kImageTol = 1e-12;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }
}  // namespace

double Branch::value(double x) const {
    if (const auto* a = std::get_if<AffineShape>(&shape_)) return a->slope * x + a->intercept;
    return std::get<SmoothShape>(shape_).forward(x);
}

double Branch::slope_at(double x) const {
    if (const auto* a = std::get_if<AffineShape>(&shape_)) return a->slope;
    return std::get<SmoothShape>(shape_).derivative(x);
}

double Branch::inverse(double y) const {
    if (const auto* a = std::get_if<AffineShape>(&shape_)) return (y - a->intercept) / a->slope;
    return std::get<SmoothShape>(shape_).inverse(y);
}

bool Branch::invertible() const {
    if (const auto* a = std::get_if<AffineShape>(&shape_)) return a->slope != 0.0;
    return static_cast<bool>(std::get<SmoothShape>(shape_).inverse);
}

Interval Branch::image() const {
    double y0 = value(lo_), y1 = value(hi_);
    if (y0 > y1) std::swap(y0, y1);
    return Interval{y0, y1};
}

PiecewiseMap::PiecewiseMap(std::vector<Branch> branches, double expansion_bound,
                           MapContext context, bool circle, bool uniform_acim)
    : branches_(std::move(branches)),
      expansion_bound_(expansion_bound),
      context_(context),
      circle_(circle),
      uniform_acim_(uniform_acim) {
    if (branches_.empty()) throw std::invalid_argument("map needs at least one branch");
    if (branches_.front().lo() != 0.0 || branches_.back().hi() != 1.0)
        throw std::invalid_argument("branch domains must tile [0,1]");
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        const Branch& b = branches_[i];
        if (!(b.lo() < b.hi())) throw std::invalid_argument("branch domain is empty");
        if (i > 0) {
            if (b.lo() != branches_[i - 1].hi())
                throw std::invalid_argument("branch domains must share endpoints");
            breakpoints_.push_back(b.lo());
        }
        Interval im = b.image();
        if (im.lo < -kImageTol || im.hi > 1.0 + kImageTol)
            throw std::invalid_argument("branch image leaves [0,1]: [" + std::to_string(im.lo) +
                                        ", " + std::to_string(im.hi) + "]");
    }
    double required = context_ == MapContext::metastable ? 2.0 : 1.0;
    if (!(expansion_bound_ > required))
        throw std::invalid_argument("expansion bound must exceed " + std::to_string(required));
    for (const Branch& b : branches_) {
        // affine slopes checked exactly; smooth branches sampled
        int samples = b.is_affine() ? 1 : 64;
        for (int s = 0; s < samples; ++s) {
            double x = b.lo() + (b.hi() - b.lo()) * (s + 0.5) / samples;
            if (std::abs(b.slope_at(x)) < expansion_bound_ - 1e-9)
                throw std::invalid_argument("branch violates declared expansion bound");
        }
    }
}

int PiecewiseMap::branch_index(double x, Side side) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("eval: x outside [0,1]");
    // cut points are bi-valued: the side picks the adjacent branch
    int lo = 0, hi = static_cast<int>(branches_.size()) - 1;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (x < branches_[mid].hi())
            hi = mid;
        else if (x > branches_[mid].hi())
            lo = mid + 1;
        else {  // exactly at the cut between mid and mid+1
            return side == Side::left ? mid : mid + 1;
        }
    }
    return lo;
}

double PiecewiseMap::eval(double x, Side side) const {
    return clamp01(branches_[branch_index(x, side)].value(x));
}

double PiecewiseMap::derivative(double x, Side side) const {
    return branches_[branch_index(x, side)].slope_at(x);
}

std::vector<std::pair<double, int>> PiecewiseMap::preimages(double y) const {
    if (y < 0.0 || y > 1.0) throw std::domain_error("preimages: y outside [0,1]");
    std::vector<std::pair<double, int>> out;
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const Branch& b = branches_[k];
        Interval im = b.image();
        if (y < im.lo || y > im.hi) continue;
        double x = b.inverse(y);
        if (x < b.lo() - 1e-14 || x > b.hi() + 1e-14) continue;
        x = std::min(b.hi(), std::max(b.lo(), x));
        if (x >= 1.0) continue;  // endpoint convention: solutions live in [0,1)
        if (!out.empty() && std::abs(out.back().first - x) <= 1e-14) continue;
        out.emplace_back(x, static_cast<int>(k));
    }
    return out;
}

std::vector<double> PiecewiseMap::orbit(double x, int n) const {
    if (n < 0) throw std::invalid_argument("orbit: n must be >= 0");
    std::vector<double> out;
    out.reserve(n + 1);
    out.push_back(x);
    for (int k = 0; k < n; ++k) {
        x = eval(x, Side::right);
        out.push_back(x);
    }
    return out;
}

bool PiecewiseMap::continuous_at(double x, double tol) const {
    double l = eval(x, Side::left), r = eval(x, Side::right);
    if (std::abs(l - r) <= tol) return true;
    if (circle_) {
        double d = std::abs(l - r);
        return std::abs(d - 1.0) <= tol;  // 0 and 1 identified
    }
    return false;
}

bool PiecewiseMap::smooth_at(double x, double tol) const {
    return continuous_at(x, tol) &&
           std::abs(derivative(x, Side::left) - derivative(x, Side::right)) <= tol;
}

PeriodInfo PiecewiseMap::detect_period(double z, int p_max, double tol) const {
    if (z < 0.0 || z >= 1.0) throw std::domain_error("detect_period: z outside [0,1)");
    if (!(tol > 0.0)) throw std::invalid_argument("detect_period: tol must be positive");

    // discontinuities and derivative kinks spoil the C^1 requirement;
    // cut points where the map is smooth (e.g. circle seams) do not count
    std::vector<double> rough;
    for (double c : breakpoints_)
        if (!smooth_at(c)) rough.push_back(c);
    if (circle_ && !smooth_at(0.0)) rough.push_back(0.0);

    auto nearest_rough = [&](double x) {
        double d = 2.0;
        for (double c : rough) {
            d = std::min(d, std::abs(x - c));
            if (circle_) d = std::min(d, 1.0 - std::abs(x - c));
        }
        return d;
    };

    PeriodInfo info;
    std::vector<double> pts = orbit(z, p_max);
    bool smooth = true;
    for (int k = 0; k < p_max; ++k) {
        double d = nearest_rough(pts[k]);
        if (d <= tol)
            throw AmbiguityError("detect_period: orbit passes within tol of a discontinuity");
        if (d <= 10.0 * tol) smooth = false;
    }
    double deriv = 1.0;
    for (int p = 1; p <= p_max; ++p) {
        deriv *= derivative(pts[p - 1], Side::right);
        double gap = std::abs(pts[p] - z);
        if (circle_) gap = std::min(gap, 1.0 - gap);
        if (gap <= tol) {
            info.is_periodic = true;
            info.period = p;
            info.derivative_of_iterate = deriv;
            info.smooth_neighborhood = smooth;
            return info;
        }
    }
    info.smooth_neighborhood = smooth;
    return info;
}

PiecewiseMap make_doubling() {
    std::vector<Branch> branches;
    branches.emplace_back(0.0, 0.5, AffineShape{2.0, 0.0});
    branches.emplace_back(0.5, 1.0, AffineShape{2.0, -1.0});
    return PiecewiseMap(std::move(branches), 2.0, MapContext::open_system,
                        /*circle=*/true, /*uniform_acim=*/true);
}

PiecewiseMap make_metastable(double c, double omega) {
    if (c < 0.0) throw std::invalid_argument("make_metastable: c must be >= 0");
    if (omega < 0.0 || omega > 0.05)
        throw std::invalid_argument("make_metastable: omega must lie in [0, 0.05]");
    const double c16 = 1.0 / 6.0, c13 = 1.0 / 3.0, c23 = 2.0 / 3.0, c56 = 5.0 / 6.0;
    const double s = 3.0 + 6.0 * omega;        // left peak slope
    const double sc = 3.0 + 6.0 * c * omega;   // right valley slope
    const double peak = 0.5 + omega;           // T(1/6)
    const double valley = 0.5 - c * omega;     // T(5/6)
    if (valley < 0.0) throw std::invalid_argument("make_metastable: valley below 0");

    std::vector<Branch> branches;
    branches.emplace_back(0.0, c16, AffineShape{s, 0.0});
    branches.emplace_back(c16, c13, AffineShape{-s, peak + s * c16});
    branches.emplace_back(c13, 0.5, AffineShape{3.0, -1.0});
    branches.emplace_back(0.5, c23, AffineShape{3.0, -1.0});
    branches.emplace_back(c23, c56, AffineShape{-sc, 1.0 + sc * c23});
    branches.emplace_back(c56, 1.0, AffineShape{sc, valley - sc * c56});
    return PiecewiseMap(std::move(branches), 3.0, MapContext::metastable);
}

}  // namespace rmaps
