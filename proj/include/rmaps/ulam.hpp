#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rmaps/grid.hpp"
#include "rmaps/holes.hpp"
#include "rmaps/map.hpp"
#include "rmaps/noise.hpp"

namespace rmaps {

enum class OperatorKind { closed, open, averaged_closed };

// Row-(sub)stochastic Ulam matrix M[i][j] = m(cell_i ∩ mask ∩ T^{-1} cell_j) / m(cell_i),
// stored CSR by rows. Densities act from the left via cell masses.
class UlamOperator {
public:
    UlamOperator(GridPtr grid, OperatorKind kind) : grid_(std::move(grid)), kind_(kind) {}

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    OperatorKind kind() const { return kind_; }
    int rows() const { return grid_->cells(); }
    std::int64_t nnz() const { return static_cast<std::int64_t>(val_.size()); }

    // u' = u^T M on cell masses.
    void apply_mass(std::span<const double> u, std::span<double> out) const;
    std::vector<double> apply_mass(std::span<const double> u) const;
    DensityVector apply_density(const DensityVector& f) const;

    std::vector<double> row_sums() const;

    void dump_binary(std::ostream& os) const;
    void dump_mtx(std::ostream& os) const;

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::int32_t>& col_index() const { return col_; }
    const std::vector<double>& values() const { return val_; }

    // assembly interface
    void set_csr(std::vector<std::int64_t> row_ptr, std::vector<std::int32_t> col,
                 std::vector<double> val);

private:
    GridPtr grid_;
    OperatorKind kind_;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<std::int32_t> col_;
    std::vector<double> val_;
};

// Exact Ulam matrix of the closed operator L_0; grid must contain every map
// breakpoint (construction error otherwise).
UlamOperator build_closed(const PiecewiseMap& map, GridPtr grid);

// Averaged open operator: mask by the survivor set X_omega, then push forward.
// Exactness contract: every hole endpoint must be a grid point unless
// allow_unaligned is set.
UlamOperator build_open(const PiecewiseMap& map, GridPtr grid, const NoiseModel& noise,
                        const HoleFamily& holes, bool allow_unaligned = false);

// Averaged closed operator sum_omega theta(omega) Ulam(T_omega).
UlamOperator build_averaged_closed(const std::function<PiecewiseMap(double)>& map_for_omega,
                                   GridPtr grid, const NoiseModel& noise);

struct EigenPair {
    double eigenvalue = 0.0;
    DensityVector density;  // L1-normalized, nonnegative
    double residual = 0.0;  // L1 norm of (action - e * vector)
    long iterations = 0;
};

struct PowerOptions {
    double tol = 1e-12;
    long max_iter = 1000000;
    std::optional<std::vector<double>> start_mass;  // defaults to cell widths (density 1)
};

// Power iteration with L1 renormalization; deterministic start vector 1.
EigenPair leading_eigenpair(const UlamOperator& op, double tol = 1e-12, long max_iter = 1000000);
EigenPair leading_eigenpair(const UlamOperator& op, const PowerOptions& opts);

// Discrete total variation: sum of |v_{i+1} - v_i| over adjacent cells.
double variation(const DensityVector& v);

// Variation trace of iterates op^n f0, n = 0..n_max.
std::vector<std::pair<int, double>> ly_diagnostic(const UlamOperator& op, const DensityVector& f0,
                                                  int n_max);

// |e - sum_omega theta(omega) * int g 1_{X_omega} dm| for an open eigenpair.
double check_eigen_identity(const EigenPair& pair, const NoiseModel& noise,
                            const HoleFamily& holes);

// Heuristic strong-connectivity check of the sparsity pattern restricted to
// the support of a mass vector.
bool irreducible_on_support(const UlamOperator& op, std::span<const double> mass,
                            double support_tol = 1e-13);

}  // namespace rmaps
