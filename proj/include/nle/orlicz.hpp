#ifndef NLE_ORLICZ_HPP
#define NLE_ORLICZ_HPP

#include "young.hpp"

#include <span>
#include <vector>

namespace nle {

/// Positive quadrature weights standing in for a measure. On a finite set of
/// atoms every function has a finite modular, so the distinction between the
/// Orlicz class, the Orlicz space and its bounded-function closure disappears.
class discrete_measure_space {
    std::vector<double> _weights;
    double _total_mass = 0;

public:
    discrete_measure_space() = default;
    explicit discrete_measure_space(std::vector<double> weights);

    std::size_t size() const noexcept { return _weights.size(); }
    std::span<const double> weights() const noexcept { return _weights; }
    double total_mass() const noexcept { return _total_mass; }
};

double modular(const discrete_measure_space& space, std::span<const double> u, const young_function& young);

/// inf{k > 0 : modular(u / k) <= 1}, bracketed by the single-atom bounds and bisected.
double luxemburg_norm(const discrete_measure_space& space, std::span<const double> u, const young_function& young);

struct holder_bound {
    double lhs = 0; // sum w |u v|
    double rhs = 0; // 2 |u|_M |v|_Mbar
};

holder_bound holder_pairing_bound(const discrete_measure_space& space, std::span<const double> u,
                                  std::span<const double> v, const young_function& young);

}

#endif
