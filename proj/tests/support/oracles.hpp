#pragma once

// Reference computations for tests. Written against closed forms and plain
// composite rules so they share no code with the library under test.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Composite Simpson rule on [0,1] with `intervals` (even) subintervals.
struct Simpson {
    std::vector<double> nodes, weights;

    explicit Simpson(int intervals) {
        const double h = 1.0 / intervals;
        for (int i = 0; i <= intervals; ++i) {
            nodes.push_back(i * h);
            const double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            weights.push_back(c * h / 3.0);
        }
    }

    double integrate(const std::function<double(double)>& f) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

// phi_l, 1-based: phi_1 = 1, phi_l = sqrt(2) cos(pi (l-1) x).
inline double cosine(int l, double x) {
    return l == 1 ? 1.0 : std::numbers::sqrt2 * std::cos(std::numbers::pi * (l - 1) * x);
}

// Haar system, 1-based: phi_1 = 1, phi_{2^j+k+1}(x) = 2^{j/2} psi(2^j x - k).
inline double haar(int l, double x) {
    if (l == 1) return 1.0;
    int j = 0;
    while ((1 << (j + 1)) <= l - 1) ++j;
    const int k = (l - 1) - (1 << j);
    const double t = std::ldexp(x, j) - k;
    const double amp = std::sqrt(std::ldexp(1.0, j));
    if (t >= 0.0 && t < 0.5) return amp;
    if (t >= 0.5 && t < 1.0) return -amp;
    if (x == 1.0 && k == (1 << j) - 1) return -amp;
    return 0.0;
}

// Diagonal-design density 1 + sum_l rho_l phi_{l+1}(x) phi_{l+1}(w).
inline double density(const std::vector<double>& rho, double x, double w) {
    double f = 1.0;
    for (std::size_t l = 0; l < rho.size(); ++l) f += rho[l] * cosine(int(l) + 2, x) * cosine(int(l) + 2, w);
    return f;
}

// (int int phi_l(w) f(x,w) phi_m(x) dx dw)_{l,m} by 2-D Simpson.
inline Eigen::MatrixXd cross_gram(const std::vector<double>& rho, int dim, int intervals = 2048) {
    const Simpson s(intervals);
    const int m = int(s.nodes.size());
    Eigen::MatrixXd phi(m, dim), f(m, m);
    for (int i = 0; i < m; ++i) {
        for (int l = 0; l < dim; ++l) phi(i, l) = cosine(l + 1, s.nodes[i]);
    }
    // f(w_i, x_j), built from separable terms evaluated on the grid.
    Eigen::MatrixXd modes(m, int(rho.size()));
    for (int i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < rho.size(); ++l) modes(i, int(l)) = cosine(int(l) + 2, s.nodes[i]);
    }
    Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rho.data(), Eigen::Index(rho.size()));
    f = Eigen::MatrixXd::Ones(m, m) + modes * r.asDiagonal() * modes.transpose();
    const Eigen::VectorXd wt = Eigen::Map<const Eigen::VectorXd>(s.weights.data(), m);
    return phi.transpose() * wt.asDiagonal() * f * wt.asDiagonal() * phi;
}

inline double min_singular_value(const Eigen::MatrixXd& a) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues().minCoeff();
}

// sup |F_n - F| for a continuous reference CDF.
inline double ks(std::vector<double> v, const std::function<double(double)>& cdf) {
    std::sort(v.begin(), v.end());
    const double n = double(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = cdf(v[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace oracle
