#pragma once

#include <optional>
#include <vector>

namespace rmaps {

struct NoiseAtom {
    double omega = 0.0;
    double weight = 0.0;
};

// Finite atomic distribution theta_eps on the noise space [0, eps].
struct NoiseModel {
    double epsilon = 0.0;
    std::vector<NoiseAtom> atoms;
    std::optional<double> upsilon;  // set by the condition-(C) constructor

    void validate() const;
    double total_weight() const;
};

// Atoms {j*eps/L : j = 0..L}, equal weights 1/(L+1).
NoiseModel make_uniform_noise(double eps, int L);

// L atoms equally spaced in (eps - eps^upsilon, eps], equal weights 1/L;
// the right endpoint of each of the L equal cells (last atom at eps).
// Discrete stand-in for the density eps^{-upsilon} on that window.
NoiseModel make_condition_C_noise(double eps, double upsilon, int L);

// Single atom at eps with weight 1 (degenerate deterministic hole).
NoiseModel make_deterministic_noise(double eps);

}  // namespace rmaps
