#pragma once

#include <Eigen/Dense>

namespace npivqb {

inline constexpr double kDefaultPinvTolerance = 1e-10;

struct PseudoInverse {
    Eigen::MatrixXd matrix;
    Eigen::Index rank = 0;
    bool full_rank = false;
};

// Spectral pseudo-inverse; singular values below tol * s_max are zeroed.
PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double tol = kDefaultPinvTolerance);

inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& a, double tol = kDefaultPinvTolerance) {
    return pseudo_inverse(a, tol).matrix;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& a);
double min_singular_value(const Eigen::MatrixXd& a);

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Inverse of a symmetric positive-definite matrix; throws kNumerical otherwise.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a);

// Lower Cholesky factor of an SPD matrix, falling back to the symmetric
// square root for semidefinite input.
Eigen::MatrixXd spd_factor(const Eigen::MatrixXd& a);

}  // namespace npivqb
