#include "npivqb/basis.hpp"

#include <cmath>
#include <numbers>

#include "npivqb/error.hpp"

namespace npivqb {

std::string to_string(BasisKind kind) { return kind == BasisKind::kCosine ? "cosine" : "haar"; }

BasisKind basis_kind_from_string(const std::string& name) {
    if (name == "cosine") return BasisKind::kCosine;
    if (name == "haar") return BasisKind::kHaar;
    throw Error(ErrorCode::kConfiguration, "unknown basis kind '" + name + "'");
}

SieveCoefficients::SieveCoefficients(int level, Eigen::VectorXd coeffs) : level_(level), coeffs_(std::move(coeffs)) {
    if (level < 0 || level > 30) throw Error(ErrorCode::kDimension, "invalid resolution level " + std::to_string(level));
    if (coeffs_.size() != sieve_dim(level)) {
        throw Error(ErrorCode::kDimension, "coefficient vector has length " + std::to_string(coeffs_.size()) +
                                               ", level " + std::to_string(level) + " needs " +
                                               std::to_string(sieve_dim(level)));
    }
    if (!coeffs_.allFinite()) throw Error(ErrorCode::kData, "sieve coefficients must be finite");
}

SieveCoefficients SieveCoefficients::zeros(int level) {
    return SieveCoefficients(level, Eigen::VectorXd::Zero(sieve_dim(level)));
}

SieveCoefficients SieveCoefficients::truncated(int level) const {
    if (level > level_) {
        throw Error(ErrorCode::kDimension, "cannot truncate level " + std::to_string(level_) + " coefficients to level " +
                                               std::to_string(level));
    }
    return SieveCoefficients(level, coeffs_.head(sieve_dim(level)));
}

namespace {

Quadrature default_quadrature(BasisKind kind) {
    // Haar integrands are piecewise constant on dyadic cells; the midpoint
    // rule on 4096 = 2^12 cells integrates them exactly.
    return kind == BasisKind::kHaar ? Quadrature::make(QuadratureRule::kMidpoint, 4096)
                                    : Quadrature::make(QuadratureRule::kGaussLegendre, 4096);
}

}  // namespace

Basis::Basis(BasisKind kind) : kind_(kind), quad_(default_quadrature(kind)) {}

Basis::Basis(BasisKind kind, Quadrature quadrature) : kind_(kind), quad_(std::move(quadrature)) {}

void Basis::eval_into(int level, double x, Eigen::Ref<Eigen::VectorXd> out) const {
    eval_basis(kind_, level, x, out);
}

void eval_basis(BasisKind kind, int level, double x, Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::Index dim = sieve_dim(level);
    out[0] = 1.0;
    if (kind == BasisKind::kCosine) {
        for (Eigen::Index l = 1; l < dim; ++l) {
            out[l] = std::numbers::sqrt2 * std::cos(std::numbers::pi * static_cast<double>(l) * x);
        }
        return;
    }
    // Haar: level j contributes 2^j functions; only the one whose support
    // contains x is nonzero.
    out.tail(dim - 1).setZero();
    for (int j = 0; j < level; ++j) {
        const Eigen::Index cells = Eigen::Index{1} << j;
        const double t = std::ldexp(x, j);
        Eigen::Index k = static_cast<Eigen::Index>(std::floor(t));
        if (k >= cells) k = cells - 1;
        const double frac = t - static_cast<double>(k);
        const double amp = std::sqrt(static_cast<double>(cells));
        out[cells + k] = frac < 0.5 ? amp : -amp;
    }
}

Eigen::VectorXd Basis::eval_vector(int level, double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::kDomain, "basis argument " + std::to_string(x) + " outside [0,1]");
    if (level < 0) throw Error(ErrorCode::kDimension, "negative resolution level");
    Eigen::VectorXd out(sieve_dim(level));
    eval_into(level, x, out);
    return out;
}

Eigen::MatrixXd Basis::eval_matrix(int level, std::span<const double> xs) const {
    const Eigen::Index dim = sieve_dim(level);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(xs.size()), dim);
    Eigen::VectorXd row(dim);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        if (!(x >= 0.0 && x <= 1.0)) {
            throw Error(ErrorCode::kDomain, "basis argument " + std::to_string(x) + " outside [0,1]");
        }
        eval_into(level, x, row);
        out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return out;
}

Eigen::MatrixXd Basis::gram(int level) const {
    if (quad_.node_count < (std::size_t{1} << (level + 4))) {
        throw Error(ErrorCode::kConfiguration, "gram at level " + std::to_string(level) + " needs at least " +
                                                   std::to_string(std::size_t{1} << (level + 4)) +
                                                   " quadrature nodes");
    }
    const Eigen::MatrixXd phi = eval_matrix(level, quad_.nodes);
    const Eigen::Map<const Eigen::VectorXd> w(quad_.weights.data(), static_cast<Eigen::Index>(quad_.weights.size()));
    return phi.transpose() * w.asDiagonal() * phi;
}

SieveCoefficients Basis::project(int level, const std::function<double(double)>& f) const {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(sieve_dim(level));
    Eigen::VectorXd phi(sieve_dim(level));
    for (std::size_t i = 0; i < quad_.nodes.size(); ++i) {
        const double fx = f(quad_.nodes[i]);
        if (!std::isfinite(fx)) {
            throw Error(ErrorCode::kData, "non-finite function value at x = " + std::to_string(quad_.nodes[i]));
        }
        eval_into(level, quad_.nodes[i], phi);
        acc += quad_.weights[i] * fx * phi;
    }
    return SieveCoefficients(level, std::move(acc));
}

double synthesize(const SieveCoefficients& b, const Basis& basis, double x) {
    return b.coeffs().dot(basis.eval_vector(b.level(), x));
}

}  // namespace npivqb
