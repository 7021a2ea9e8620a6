#include "rmaps/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace rmaps {

double NoiseModel::total_weight() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
}

void NoiseModel::validate() const {
    // epsilon = 0 is the degenerate zero-hole envelope
    if (epsilon < 0.0) throw std::invalid_argument("noise: epsilon must be >= 0");
    if (atoms.empty()) throw std::invalid_argument("noise: needs at least one atom");
    for (const auto& a : atoms) {
        if (a.weight < 0.0) throw std::invalid_argument("noise: negative weight");
        if (a.omega < 0.0 || a.omega > epsilon + 1e-15)
            throw std::invalid_argument("noise: atom outside [0, epsilon]");
    }
    if (std::abs(total_weight() - 1.0) > 1e-14)
        throw std::invalid_argument("noise: weights must sum to 1");
}

NoiseModel make_uniform_noise(double eps, int L) {
    if (L < 1) throw std::invalid_argument("make_uniform_noise: L must be >= 1");
    NoiseModel n;
    n.epsilon = eps;
    n.atoms.reserve(L + 1);
    for (int j = 0; j <= L; ++j) n.atoms.push_back({j * eps / L, 1.0 / (L + 1)});
    n.validate();
    return n;
}

NoiseModel make_condition_C_noise(double eps, double upsilon, int L) {
    if (!(upsilon > 1.0)) throw std::invalid_argument("make_condition_C_noise: upsilon must be > 1");
    if (L < 1) throw std::invalid_argument("make_condition_C_noise: L must be >= 1");
    double width = std::pow(eps, upsilon);
    if (!(width < eps)) throw std::invalid_argument("make_condition_C_noise: eps^upsilon must be < eps");
    NoiseModel n;
    n.epsilon = eps;
    n.upsilon = upsilon;
    n.atoms.reserve(L);
    for (int j = 1; j <= L; ++j) n.atoms.push_back({(eps - width) + j * width / L, 1.0 / L});
    n.atoms.back().omega = eps;  // guard against rounding in the last cell
    n.validate();
    return n;
}

NoiseModel make_deterministic_noise(double eps) {
    NoiseModel n;
    n.epsilon = eps;
    n.atoms.push_back({eps, 1.0});
    n.validate();
    return n;
}

}  // namespace rmaps
