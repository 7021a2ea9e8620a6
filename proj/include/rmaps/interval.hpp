#pragma once

#include <algorithm>
#include <vector>

namespace rmaps {

// Closed interval [lo, hi] inside the unit interval. A degenerate interval
// (lo == hi) is allowed and has measure zero.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi > lo ? hi - lo : 0.0; }
    bool degenerate() const { return hi <= lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

// A finite union of intervals, kept sorted by lo and pairwise disjoint.
using IntervalSet = std::vector<Interval>;

inline double total_length(const IntervalSet& s) {
    double sum = 0.0;
    for (const auto& iv : s) sum += iv.length();
    return sum;
}

inline bool set_contains(const IntervalSet& s, double x) {
    for (const auto& iv : s)
        if (iv.contains(x)) return true;
    return false;
}

// Sort and merge touching/overlapping components; drops degenerate pieces.
inline IntervalSet normalized(IntervalSet s, double merge_tol = 1e-15) {
    std::sort(s.begin(), s.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    IntervalSet out;
    for (const auto& iv : s) {
        if (iv.degenerate()) continue;
        if (!out.empty() && iv.lo <= out.back().hi + merge_tol)
            out.back().hi = std::max(out.back().hi, iv.hi);
        else
            out.push_back(iv);
    }
    return out;
}

inline Interval intersect(const Interval& a, const Interval& b) {
    return Interval{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

// cell minus the (sorted, disjoint) holes.
inline IntervalSet subtract(const Interval& cell, const IntervalSet& holes) {
    IntervalSet out;
    double cursor = cell.lo;
    for (const auto& h : holes) {
        if (h.hi <= cursor) continue;
        if (h.lo >= cell.hi) break;
        if (h.lo > cursor) out.push_back(Interval{cursor, std::min(h.lo, cell.hi)});
        cursor = std::max(cursor, h.hi);
        if (cursor >= cell.hi) break;
    }
    if (cursor < cell.hi) out.push_back(Interval{cursor, cell.hi});
    return out;
}

}  // namespace rmaps
