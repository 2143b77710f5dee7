#pragma once

#include <cstdint>

#include "npivqb/basis.hpp"
#include "npivqb/design.hpp"
#include "npivqb/linalg.hpp"

namespace npivqb {

// Sufficient statistics of the quasi-likelihood at one resolution level:
//   phi_ww = E_n[phi(W) phi(W)ᵀ], phi_wx = E_n[phi(W) phi(X)ᵀ], c = E_n[phi(W) Y].
// Immutable once built.
struct EmpiricalMoments {
    std::size_t n = 0;
    int level = 0;
    BasisKind basis = BasisKind::kCosine;
    Eigen::MatrixXd phi_ww;
    Eigen::MatrixXd phi_wx;
    Eigen::VectorXd c;
    // Inverse of phi_ww, or its spectral pseudo-inverse when rank deficient.
    Eigen::MatrixXd ww_inverse;
    Eigen::Index ww_rank = 0;
    bool ww_invertible = false;

    static EmpiricalMoments from_matrices(std::size_t n, int level, Eigen::MatrixXd phi_ww, Eigen::MatrixXd phi_wx,
                                          Eigen::VectorXd c, BasisKind basis = BasisKind::kCosine,
                                          double tol = kDefaultPinvTolerance);

    Eigen::Index dim() const { return c.size(); }
    // Moments at a coarser level; the sieves are nested so this is the leading block.
    EmpiricalMoments restricted(int coarser_level) const;
    // FNV-1a hash of the statistics, for provenance records.
    std::uint64_t fingerprint() const;
};

EmpiricalMoments empirical_moments(const Sample& sample, const Basis& basis, int level,
                                   double tol = kDefaultPinvTolerance);

// m̂(w, b) = phi(w)ᵀ ww_inverse (c - phi_wx b).
double mhat(const EmpiricalMoments& em, const SieveCoefficients& b, double w);

// -(n/2) rᵀ ww_inverse r with r = c - phi_wx b. Equals -(n/2) E_n[m̂²]; the
// b-free part of the quadratic expansion is not subtracted.
double quasi_loglik(const EmpiricalMoments& em, const SieveCoefficients& b);
Eigen::VectorXd quasi_loglik_gradient(const EmpiricalMoments& em, const SieveCoefficients& b);

// quasi_loglik(b) = -bᵀ H b / 2 + bᵀ g + constant.
struct QuadraticLoglik {
    Eigen::MatrixXd hessian;  // n phi_wxᵀ M⁻ phi_wx
    Eigen::VectorXd linear;   // n phi_wxᵀ M⁻ c
    double constant = 0.0;    // -(n/2) cᵀ M⁻ c

    double operator()(const Eigen::VectorXd& b) const { return -0.5 * b.dot(hessian * b) + b.dot(linear) + constant; }
};

QuadraticLoglik quadratic_loglik(const EmpiricalMoments& em);

// Smallest singular value of phi_wx.
double tau_hat(const EmpiricalMoments& em);

}  // namespace npivqb
