#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>

#include "npivqb/quadrature.hpp"

namespace npivqb {

enum class BasisKind { kCosine, kHaar };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

// Number of sieve functions at resolution level J.
inline Eigen::Index sieve_dim(int level) { return Eigen::Index{1} << level; }

// Coefficients b^J of g = sum_l b_l phi_l on the first 2^J basis functions.
class SieveCoefficients {
public:
    SieveCoefficients() : coeffs_(Eigen::VectorXd::Zero(1)) {}
    SieveCoefficients(int level, Eigen::VectorXd coeffs);

    static SieveCoefficients zeros(int level);

    int level() const { return level_; }
    Eigen::Index size() const { return coeffs_.size(); }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    double operator[](Eigen::Index i) const { return coeffs_[i]; }

    // Leading 2^J block; J must not exceed level().
    SieveCoefficients truncated(int level) const;

private:
    int level_ = 0;
    Eigen::VectorXd coeffs_;
};

// Orthonormal system on [0,1]. phi_1 is the constant; storage index 0 maps to
// phi_1 throughout the library.
//
//   cosine: phi_l(x) = sqrt(2) cos(pi (l-1) x), l >= 2
//   haar:   phi_{2^j + k + 1} = 2^{j/2} psi(2^j x - k), psi = 1 on [0,1/2), -1 on [1/2,1)
//
// Immutable after construction.
class Basis {
public:
    explicit Basis(BasisKind kind);
    Basis(BasisKind kind, Quadrature quadrature);

    BasisKind kind() const { return kind_; }
    const Quadrature& quadrature() const { return quad_; }

    // phi^J(x); throws kDomain for x outside [0,1].
    Eigen::VectorXd eval_vector(int level, double x) const;
    // Writes phi^J(x) into out, which must have length 2^J. No domain check.
    void eval_into(int level, double x, Eigen::Ref<Eigen::VectorXd> out) const;
    // Row i holds phi^J(xs[i])ᵀ.
    Eigen::MatrixXd eval_matrix(int level, std::span<const double> xs) const;

    Eigen::MatrixXd gram(int level) const;
    SieveCoefficients project(int level, const std::function<double(double)>& f) const;

private:
    BasisKind kind_;
    Quadrature quad_;
};

// phi^J(x) for a basis kind without building quadrature; no domain check.
void eval_basis(BasisKind kind, int level, double x, Eigen::Ref<Eigen::VectorXd> out);

double synthesize(const SieveCoefficients& b, const Basis& basis, double x);

}  // namespace npivqb
