#include "npivqb/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include "npivqb/error.hpp"

namespace npivqb {

Quadrature Quadrature::make(QuadratureRule rule, std::size_t node_count) {
    if (node_count == 0) throw Error(ErrorCode::kConfiguration, "quadrature node count must be positive");
    Quadrature q;
    q.rule = rule;
    q.node_count = node_count;
    q.nodes.reserve(node_count);
    q.weights.reserve(node_count);
    if (rule == QuadratureRule::kMidpoint) {
        const double h = 1.0 / static_cast<double>(node_count);
        for (std::size_t i = 0; i < node_count; ++i) {
            q.nodes.push_back((static_cast<double>(i) + 0.5) * h);
            q.weights.push_back(h);
        }
        return q;
    }

    if (node_count % kGaussPanelPoints != 0) {
        throw Error(ErrorCode::kConfiguration,
                    "Gauss-Legendre node count must be a multiple of 16, got " + std::to_string(node_count));
    }
    using Rule = boost::math::quadrature::gauss<double, kGaussPanelPoints>;
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    const std::size_t panels = node_count / kGaussPanelPoints;
    const double h = 1.0 / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double mid = (static_cast<double>(p) + 0.5) * h;
        for (std::size_t k = abscissa.size(); k-- > 0;) {
            q.nodes.push_back(mid - 0.5 * h * abscissa[k]);
            q.weights.push_back(0.5 * h * weights[k]);
        }
        for (std::size_t k = 0; k < abscissa.size(); ++k) {
            q.nodes.push_back(mid + 0.5 * h * abscissa[k]);
            q.weights.push_back(0.5 * h * weights[k]);
        }
    }
    return q;
}

}  // namespace npivqb
