#include "npivqb/linalg.hpp"

#include "npivqb/error.hpp"

namespace npivqb {

PseudoInverse pseudo_inverse(const Eigen::MatrixXd& a, double tol) {
    PseudoInverse out;
    if (a.size() == 0) return out;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = tol * s[0];
    Eigen::VectorXd s_inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > cutoff && s[i] > 0.0) {
            s_inv[i] = 1.0 / s[i];
            ++out.rank;
        }
    }
    out.matrix = svd.matrixV() * s_inv.asDiagonal() * svd.matrixU().transpose();
    out.full_rank = out.rank == std::min(a.rows(), a.cols());
    return out;
}

Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
}

double min_singular_value(const Eigen::MatrixXd& a) {
    const Eigen::VectorXd s = singular_values(a);
    return s.size() == 0 ? 0.0 : s[s.size() - 1];
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(a));
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::kNumerical, "matrix is not positive definite");
    return symmetrized(llt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols())));
}

Eigen::MatrixXd spd_factor(const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd sym = symmetrized(a);
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace npivqb
