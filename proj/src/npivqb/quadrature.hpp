#pragma once

#include <cstddef>
#include <vector>

namespace npivqb {

enum class QuadratureRule { kMidpoint, kGaussLegendre };

// Nodes and weights of a composite rule on [0,1].
struct Quadrature {
    QuadratureRule rule = QuadratureRule::kGaussLegendre;
    std::size_t node_count = 4096;
    std::vector<double> nodes;
    std::vector<double> weights;

    // Gauss-Legendre panels hold 16 points each, so node_count must be a
    // multiple of 16. Panel edges sit on a dyadic grid when node_count/16 is
    // a power of two.
    static Quadrature make(QuadratureRule rule, std::size_t node_count);

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

inline constexpr std::size_t kGaussPanelPoints = 16;

}  // namespace npivqb
