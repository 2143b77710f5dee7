#include "npivqb/moments.hpp"

#include <cstring>

#include "npivqb/error.hpp"

namespace npivqb {

EmpiricalMoments EmpiricalMoments::from_matrices(std::size_t n, int level, Eigen::MatrixXd phi_ww,
                                                 Eigen::MatrixXd phi_wx, Eigen::VectorXd c, BasisKind basis,
                                                 double tol) {
    const Eigen::Index dim = sieve_dim(level);
    if (phi_ww.rows() != dim || phi_ww.cols() != dim || phi_wx.rows() != dim || phi_wx.cols() != dim || c.size() != dim) {
        throw Error(ErrorCode::kDimension, "moment matrices do not match level " + std::to_string(level));
    }
    EmpiricalMoments em;
    em.n = n;
    em.level = level;
    em.basis = basis;
    em.phi_ww = symmetrized(phi_ww);
    em.phi_wx = std::move(phi_wx);
    em.c = std::move(c);
    PseudoInverse inv = pseudo_inverse(em.phi_ww, tol);
    em.ww_inverse = symmetrized(inv.matrix);
    em.ww_rank = inv.rank;
    em.ww_invertible = inv.full_rank;
    return em;
}

EmpiricalMoments EmpiricalMoments::restricted(int coarser_level) const {
    if (coarser_level > level || coarser_level < 0) {
        throw Error(ErrorCode::kDimension, "cannot restrict level " + std::to_string(level) + " moments to level " +
                                               std::to_string(coarser_level));
    }
    const Eigen::Index d = sieve_dim(coarser_level);
    return from_matrices(n, coarser_level, phi_ww.topLeftCorner(d, d), phi_wx.topLeftCorner(d, d), c.head(d), basis);
}

std::uint64_t EmpiricalMoments::fingerprint() const {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    const std::uint64_t header[3] = {n, static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(basis)};
    mix(header, sizeof(header));
    mix(phi_ww.data(), sizeof(double) * static_cast<std::size_t>(phi_ww.size()));
    mix(phi_wx.data(), sizeof(double) * static_cast<std::size_t>(phi_wx.size()));
    mix(c.data(), sizeof(double) * static_cast<std::size_t>(c.size()));
    return h;
}

EmpiricalMoments empirical_moments(const Sample& sample, const Basis& basis, int level, double tol) {
    if (level < 0 || level > 20) throw Error(ErrorCode::kDimension, "invalid resolution level " + std::to_string(level));
    validate_sample(sample);
    const Eigen::Index dim = sieve_dim(level);
    Eigen::MatrixXd ww = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd wx = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd pw(dim), px(dim);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        basis.eval_into(level, sample.w[i], pw);
        basis.eval_into(level, sample.x[i], px);
        ww.selfadjointView<Eigen::Lower>().rankUpdate(pw);
        wx.noalias() += pw * px.transpose();
        c.noalias() += sample.y[i] * pw;
    }
    const double inv_n = 1.0 / static_cast<double>(sample.size());
    ww = ww.selfadjointView<Eigen::Lower>();
    return EmpiricalMoments::from_matrices(sample.size(), level, ww * inv_n, wx * inv_n, c * inv_n, basis.kind(), tol);
}

namespace {

void check_level(const EmpiricalMoments& em, const SieveCoefficients& b) {
    if (b.level() != em.level) {
        throw Error(ErrorCode::kDimension, "coefficients at level " + std::to_string(b.level()) +
                                               " do not match moments at level " + std::to_string(em.level));
    }
}

}  // namespace

double mhat(const EmpiricalMoments& em, const SieveCoefficients& b, double w) {
    check_level(em, b);
    if (!(w >= 0.0 && w <= 1.0)) throw Error(ErrorCode::kDomain, "m-hat argument outside [0,1]");
    Eigen::VectorXd phi(em.dim());
    eval_basis(em.basis, em.level, w, phi);
    return phi.dot(em.ww_inverse * (em.c - em.phi_wx * b.coeffs()));
}

double quasi_loglik(const EmpiricalMoments& em, const SieveCoefficients& b) {
    check_level(em, b);
    const Eigen::VectorXd r = em.c - em.phi_wx * b.coeffs();
    return -0.5 * static_cast<double>(em.n) * r.dot(em.ww_inverse * r);
}

Eigen::VectorXd quasi_loglik_gradient(const EmpiricalMoments& em, const SieveCoefficients& b) {
    check_level(em, b);
    const Eigen::VectorXd r = em.c - em.phi_wx * b.coeffs();
    return static_cast<double>(em.n) * (em.phi_wx.transpose() * (em.ww_inverse * r));
}

QuadraticLoglik quadratic_loglik(const EmpiricalMoments& em) {
    const double n = static_cast<double>(em.n);
    const Eigen::MatrixXd mw = em.ww_inverse * em.phi_wx;
    QuadraticLoglik q;
    q.hessian = symmetrized(n * em.phi_wx.transpose() * mw);
    q.linear = n * mw.transpose() * em.c;
    q.constant = -0.5 * n * em.c.dot(em.ww_inverse * em.c);
    return q;
}

double tau_hat(const EmpiricalMoments& em) { return min_singular_value(em.phi_wx); }

}  // namespace npivqb
