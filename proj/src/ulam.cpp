#include "rmaps/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <ostream>
#include <stdexcept>

#include "rmaps/errors.hpp"

namespace rmaps {

namespace {

// Accumulates one assembled row, merging duplicate columns.
struct RowBuffer {
    std::vector<std::pair<std::int32_t, double>> entries;

    void add(std::int32_t j, double v) {
        if (v != 0.0) entries.emplace_back(j, v);
    }
    void flush(std::vector<std::int64_t>& row_ptr, std::vector<std::int32_t>& col,
               std::vector<double>& val) {
        std::sort(entries.begin(), entries.end());
        // merge duplicate columns
        std::size_t w = 0;
        for (std::size_t k = 0; k < entries.size(); ++k) {
            if (w > 0 && entries[w - 1].first == entries[k].first)
                entries[w - 1].second += entries[k].second;
            else
                entries[w++] = entries[k];
        }
        entries.resize(w);
        for (const auto& [j, v] : entries) {
            col.push_back(j);
            val.push_back(v);
        }
        row_ptr.push_back(static_cast<std::int64_t>(col.size()));
        entries.clear();
    }
};

// Push the piece [a,b] (inside one branch domain) through the branch and
// scatter the image measure onto grid cells: weight * m(piece ∩ T^{-1}cell_j).
void push_piece(const Branch& br, double a, double b, const Grid& grid, double weight,
                RowBuffer& row) {
    if (b <= a) return;
    const auto& cuts = grid.cuts();
    if (br.is_affine()) {
        double s = br.affine().slope;
        double y0 = br.value(a), y1 = br.value(b);
        if (y0 > y1) std::swap(y0, y1);
        y0 = std::max(0.0, y0);
        y1 = std::min(1.0, y1);
        if (y1 <= y0) return;
        int j0 = grid.locate(y0);
        int j1 = y1 >= 1.0 ? grid.cells() - 1 : grid.locate(y1);
        double inv_slope = 1.0 / std::abs(s);
        for (int j = j0; j <= j1; ++j) {
            double lo = std::max(y0, cuts[j]);
            double hi = std::min(y1, cuts[j + 1]);
            if (hi > lo) row.add(j, weight * (hi - lo) * inv_slope);
        }
    } else {
        // monotone smooth branch: preimage lengths via the inverse
        double y0 = br.value(a), y1 = br.value(b);
        bool inc = y1 >= y0;
        if (!inc) std::swap(y0, y1);
        y0 = std::max(0.0, y0);
        y1 = std::min(1.0, y1);
        if (y1 <= y0) return;
        int j0 = grid.locate(y0);
        int j1 = y1 >= 1.0 ? grid.cells() - 1 : grid.locate(y1);
        for (int j = j0; j <= j1; ++j) {
            double lo = std::max(y0, cuts[j]);
            double hi = std::min(y1, cuts[j + 1]);
            if (hi <= lo) continue;
            double xa = br.inverse(lo), xb = br.inverse(hi);
            row.add(j, weight * std::abs(xb - xa));
        }
    }
}

void require_breakpoints(const PiecewiseMap& map, const Grid& grid) {
    for (double c : map.breakpoints())
        if (!grid.has_point(c))
            throw std::runtime_error("ulam: grid is missing a map breakpoint");
    for (const Branch& b : map.branches())
        if (!b.invertible())
            throw std::runtime_error("ulam: non-affine branch without an inverse");
}

// Assemble one row of the closed matrix for map over the surviving pieces of
// cell i. pieces must be sorted subsets of the cell.
void assemble_row(const PiecewiseMap& map, const Grid& grid, int i, const IntervalSet& pieces,
                  double weight_scale, RowBuffer& row) {
    double inv_m = 1.0 / grid.width(i);
    for (const auto& piece : pieces) {
        for (const Branch& br : map.branches()) {
            double a = std::max(piece.lo, br.lo());
            double b = std::min(piece.hi, br.hi());
            if (b > a) push_piece(br, a, b, grid, weight_scale * inv_m, row);
        }
    }
}

}  // namespace

void UlamOperator::set_csr(std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> col,
                           std::vector<double> val) {
    row_ptr_ = std::move(row_ptr);
    col_ = std::move(col);
    val_ = std::move(val);
}

void UlamOperator::apply_mass(std::span<const double> u, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const int n = rows();
    for (int i = 0; i < n; ++i) {
        double ui = u[i];
        if (ui == 0.0) continue;
        for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out[col_[k]] += ui * val_[k];
    }
}

std::vector<double> UlamOperator::apply_mass(std::span<const double> u) const {
    std::vector<double> out(rows());
    apply_mass(u, out);
    return out;
}

DensityVector UlamOperator::apply_density(const DensityVector& f) const {
    if (f.grid->cells() != rows()) throw std::invalid_argument("apply: grid mismatch");
    std::vector<double> u(rows());
    for (int i = 0; i < rows(); ++i) u[i] = f.values[i] * grid_->width(i);
    std::vector<double> v = apply_mass(u);
    DensityVector out;
    out.grid = grid_;
    out.values.resize(rows());
    for (int i = 0; i < rows(); ++i) out.values[i] = v[i] / grid_->width(i);
    return out;
}

std::vector<double> UlamOperator::row_sums() const {
    std::vector<double> s(rows(), 0.0);
    for (int i = 0; i < rows(); ++i)
        for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s[i] += val_[k];
    return s;
}

UlamOperator build_closed(const PiecewiseMap& map, GridPtr grid) {
    require_breakpoints(map, *grid);
    UlamOperator op(grid, OperatorKind::closed);
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col;
    std::vector<double> val;
    RowBuffer row;
    const int n = grid->cells();
    for (int i = 0; i < n; ++i) {
        IntervalSet cell{Interval{grid->cut(i), grid->cut(i + 1)}};
        assemble_row(map, *grid, i, cell, 1.0, row);
        row.flush(row_ptr, col, val);
    }
    op.set_csr(std::move(row_ptr), std::move(col), std::move(val));
    return op;
}

UlamOperator build_open(const PiecewiseMap& map, GridPtr grid, const NoiseModel& noise,
                        const HoleFamily& holes, bool allow_unaligned) {
    require_breakpoints(map, *grid);
    noise.validate();
    const int n = grid->cells();

    // Aligned holes make the mask a 0/1 weight per cell; a partially covered
    // cell triggers the generic interval-subtraction path (opt-in).
    std::vector<double> avg_weight(n, 0.0);
    std::vector<std::pair<double, IntervalSet>> partial_atoms;  // (theta, holes) needing pieces
    for (const auto& atom : noise.atoms) {
        IntervalSet H = holes.intervals(atom.omega);
        for (const auto& h : H) {
            if (h.degenerate()) continue;
            if (!grid->has_point(h.lo) || !grid->has_point(h.hi)) {
                if (!allow_unaligned)
                    throw std::runtime_error(
                        "build_open: hole endpoint is not a grid point (missing refinement); "
                        "pass allow_unaligned to accept the projection error");
            }
        }
        std::vector<double> w = surviving_fractions(*grid, H);
        bool binary = true;
        for (double x : w)
            if (x != 0.0 && x != 1.0) binary = false;
        if (binary) {
            for (int i = 0; i < n; ++i) avg_weight[i] += atom.weight * w[i];
        } else {
            partial_atoms.emplace_back(atom.weight, std::move(H));
        }
    }

    UlamOperator op(grid, OperatorKind::open);
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col;
    std::vector<double> val;
    RowBuffer row;
    for (int i = 0; i < n; ++i) {
        Interval cell{grid->cut(i), grid->cut(i + 1)};
        if (avg_weight[i] > 0.0) assemble_row(map, *grid, i, {cell}, avg_weight[i], row);
        for (const auto& [theta, H] : partial_atoms)
            assemble_row(map, *grid, i, subtract(cell, H), theta, row);
        row.flush(row_ptr, col, val);
    }
    op.set_csr(std::move(row_ptr), std::move(col), std::move(val));
    return op;
}

UlamOperator build_averaged_closed(const std::function<PiecewiseMap(double)>& map_for_omega,
                                   GridPtr grid, const NoiseModel& noise) {
    noise.validate();
    const int n = grid->cells();
    std::vector<PiecewiseMap> maps;
    maps.reserve(noise.atoms.size());
    for (const auto& atom : noise.atoms) {
        maps.push_back(map_for_omega(atom.omega));
        require_breakpoints(maps.back(), *grid);
    }
    UlamOperator op(grid, OperatorKind::averaged_closed);
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col;
    std::vector<double> val;
    RowBuffer row;
    for (int i = 0; i < n; ++i) {
        IntervalSet cell{Interval{grid->cut(i), grid->cut(i + 1)}};
        for (std::size_t a = 0; a < maps.size(); ++a)
            assemble_row(maps[a], *grid, i, cell, noise.atoms[a].weight, row);
        row.flush(row_ptr, col, val);
    }
    op.set_csr(std::move(row_ptr), std::move(col), std::move(val));
    return op;
}

EigenPair leading_eigenpair(const UlamOperator& op, double tol, long max_iter) {
    PowerOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return leading_eigenpair(op, opts);
}

EigenPair leading_eigenpair(const UlamOperator& op, const PowerOptions& opts) {
    const int n = op.rows();
    std::vector<double> u(n), v(n);
    if (opts.start_mass) {
        u = *opts.start_mass;
        if (static_cast<int>(u.size()) != n)
            throw std::invalid_argument("leading_eigenpair: start vector size mismatch");
    } else {
        for (int i = 0; i < n; ++i) u[i] = op.grid().width(i);
    }
    double norm = 0.0;
    for (double x : u) norm += std::abs(x);
    for (double& x : u) x /= norm;

    double e = 0.0, res = 0.0;
    long it = 0;
    for (; it < opts.max_iter; ++it) {
        op.apply_mass(u, v);
        e = 0.0;
        for (double x : v) e += std::abs(x);
        if (!(e > 0.0))
            throw ConvergenceError("leading_eigenpair: operator annihilated the iterate", 1.0, it);
        res = 0.0;
        for (int i = 0; i < n; ++i) res += std::abs(v[i] - e * u[i]);
        for (int i = 0; i < n; ++i) u[i] = v[i] / e;
        if (res <= opts.tol) break;
    }
    if (res > opts.tol)
        throw ConvergenceError("leading_eigenpair: max_iter exceeded (residual " +
                                   std::to_string(res) + ")",
                               res, it);
    EigenPair pair;
    pair.eigenvalue = e;
    pair.residual = res;
    pair.iterations = it + 1;
    pair.density.grid = op.grid_ptr();
    pair.density.values.resize(n);
    for (int i = 0; i < n; ++i) pair.density.values[i] = u[i] / op.grid().width(i);
    return pair;
}

double variation(const DensityVector& v) {
    double s = 0.0;
    for (std::size_t i = 1; i < v.values.size(); ++i) s += std::abs(v.values[i] - v.values[i - 1]);
    return s;
}

std::vector<std::pair<int, double>> ly_diagnostic(const UlamOperator& op, const DensityVector& f0,
                                                  int n_max) {
    std::vector<std::pair<int, double>> trace;
    trace.reserve(n_max + 1);
    DensityVector f = f0;
    trace.emplace_back(0, variation(f));
    for (int k = 1; k <= n_max; ++k) {
        f = op.apply_density(f);
        trace.emplace_back(k, variation(f));
    }
    return trace;
}

double check_eigen_identity(const EigenPair& pair, const NoiseModel& noise,
                            const HoleFamily& holes) {
    double acc = 0.0;
    double total = pair.density.integral();
    for (const auto& atom : noise.atoms) {
        // int g 1_{X_omega} dm = int g dm - int_{H_omega} g dm, both exact
        acc += atom.weight * (total - integrate(pair.density, holes.intervals(atom.omega)));
    }
    return std::abs(pair.eigenvalue - acc);
}

bool irreducible_on_support(const UlamOperator& op, std::span<const double> mass,
                            double support_tol) {
    const int n = op.rows();
    std::vector<char> support(n, 0);
    int seed = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        if (mass[i] > support_tol) support[i] = 1;
        if (mass[i] > best) {
            best = mass[i];
            seed = i;
        }
    }
    if (seed < 0) return false;

    auto bfs = [&](bool forward) {
        std::vector<char> seen(n, 0);
        std::vector<int> stack{seed};
        seen[seed] = 1;
        // transpose adjacency built on demand for the backward sweep
        std::vector<std::vector<int>> back;
        if (!forward) {
            back.assign(n, {});
            for (int i = 0; i < n; ++i)
                for (std::int64_t k = op.row_ptr()[i]; k < op.row_ptr()[i + 1]; ++k)
                    if (op.values()[k] != 0.0) back[op.col_index()[k]].push_back(i);
        }
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            if (forward) {
                for (std::int64_t k = op.row_ptr()[i]; k < op.row_ptr()[i + 1]; ++k) {
                    int j = op.col_index()[k];
                    if (op.values()[k] != 0.0 && !seen[j]) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
                }
            } else {
                for (int j : back[i])
                    if (!seen[j]) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
            }
        }
        for (int i = 0; i < n; ++i)
            if (support[i] && !seen[i]) return false;
        return true;
    };
    return bfs(true) && bfs(false);
}

void UlamOperator::dump_binary(std::ostream& os) const {
    auto put64 = [&](std::int64_t x) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((x >> (8 * i)) & 0xff);
        os.write(reinterpret_cast<const char*>(b), 8);
    };
    auto putd = [&](double x) {
        std::int64_t bits;
        std::memcpy(&bits, &x, 8);
        put64(bits);
    };
    put64(rows());
    put64(rows());
    put64(nnz());
    for (std::int64_t x : row_ptr_) put64(x);
    for (std::int32_t c : col_) put64(c);
    for (double v : val_) putd(v);
}

void UlamOperator::dump_mtx(std::ostream& os) const {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << rows() << " " << rows() << " " << nnz() << "\n";
    char buf[64];
    for (int i = 0; i < rows(); ++i)
        for (std::int64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", i + 1, col_[k] + 1, val_[k]);
            os << buf;
        }
}

}  // namespace rmaps
