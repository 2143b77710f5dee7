#include "npivqb/posterior.hpp"

#include <cmath>

#include "npivqb/error.hpp"
#include "npivqb/linalg.hpp"

namespace npivqb {

Eigen::MatrixXd GaussianLaw::draw(std::size_t count, std::mt19937_64& rng) const {
    const Eigen::MatrixXd factor = spd_factor(covariance);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(count), dim());
    Eigen::VectorXd z(dim());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
        out.row(i) = (mean + factor * z).transpose();
    }
    return out;
}

void check_gaussian_law(const GaussianLaw& law) {
    if (law.covariance.rows() != law.dim() || law.covariance.cols() != law.dim()) {
        throw Error(ErrorCode::kDimension, "covariance does not match mean dimension");
    }
    if ((law.covariance - law.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, law.covariance.cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::kNumerical, "covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(law.covariance);
    if (!(eig.eigenvalues().minCoeff() > 0.0)) throw Error(ErrorCode::kNumerical, "covariance is not positive definite");
}

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::kConfiguration, "temperature eta must be positive");
}

void check_level(const EmpiricalMoments& em, const Prior& prior) {
    if (prior.level() != em.level) {
        throw Error(ErrorCode::kDimension, "prior level " + std::to_string(prior.level()) + " differs from moments level " +
                                               std::to_string(em.level));
    }
}

}  // namespace

GaussianLaw conjugate_posterior(const EmpiricalMoments& em, const Prior& prior, double eta) {
    check_level(em, prior);
    check_eta(eta);
    if (prior.family() != PriorFamily::kGaussianProduct) {
        throw Error(ErrorCode::kUnsupportedFamily, "conjugate posterior needs a gaussian prior, got " + to_string(prior.family()));
    }
    const QuadraticLoglik q = quadratic_loglik(em);
    const double sigma2 = prior.scale() * prior.scale();
    Eigen::MatrixXd precision = 2.0 * eta * q.hessian;
    precision.diagonal().array() += 1.0 / sigma2;
    GaussianLaw law;
    law.covariance = spd_inverse(precision);
    law.mean = law.covariance * (2.0 * eta * q.linear);
    return law;
}

SieveCoefficients quasi_bayes(const PosteriorResult& result) {
    if (result.is_exact()) return SieveCoefficients(result.level, result.exact().mean);
    const Eigen::MatrixXd& draws = result.mcmc().draws;
    return SieveCoefficients(result.level, draws.colwise().mean().transpose());
}

MdeResult mde(const EmpiricalMoments& em) {
    PseudoInverse inv = pseudo_inverse(em.phi_wx);
    return MdeResult{SieveCoefficients(em.level, inv.matrix * em.c), inv.rank, inv.full_rank};
}

GaussianLaw bvm_approx(const EmpiricalMoments& em, double eta, double tol) {
    check_eta(eta);
    const double tau = tau_hat(em);
    if (!(tau > tol)) {
        throw IllConditionedError(tau, "cross-Gram matrix is ill-conditioned: tau_hat = " + std::to_string(tau));
    }
    const Eigen::MatrixXd a_inv = em.phi_wx.inverse();
    GaussianLaw law;
    law.mean = mde(em).coeffs.coeffs();
    law.covariance = symmetrized(a_inv * em.phi_ww * a_inv.transpose()) / (2.0 * eta * static_cast<double>(em.n));
    return law;
}

GaussianLaw bvm_population(const Design& design, int level, std::size_t n, const Eigen::VectorXd& center, double eta) {
    check_eta(eta);
    const Eigen::VectorXd k = design.population_cross_gram(level).diagonal();
    if (center.size() != k.size()) throw Error(ErrorCode::kDimension, "BvM center has the wrong dimension");
    GaussianLaw law;
    law.mean = center;
    law.covariance = (k.array().square().inverse() / (2.0 * eta * static_cast<double>(n))).matrix().asDiagonal();
    return law;
}

Eigen::MatrixXd centering_covariance(const Sample& sample, const Basis& basis, const EmpiricalMoments& em,
                                     const SieveCoefficients& center) {
    if (center.level() != em.level) throw Error(ErrorCode::kDimension, "center level differs from moments level");
    const Eigen::Index d = em.dim();
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd pw(d), px(d);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        basis.eval_into(em.level, sample.w[i], pw);
        basis.eval_into(em.level, sample.x[i], px);
        const double resid = sample.y[i] - px.dot(center.coeffs());
        omega.noalias() += (resid * resid) * pw * pw.transpose();
    }
    omega /= static_cast<double>(sample.size());
    const Eigen::MatrixXd a_pinv = pinv(em.phi_wx);
    return symmetrized(a_pinv * omega * a_pinv.transpose()) / static_cast<double>(em.n);
}

double gaussian_kl(const GaussianLaw& p, const GaussianLaw& q) {
    if (p.dim() != q.dim()) {
        throw Error(ErrorCode::kDimension, "KL between laws of dimension " + std::to_string(p.dim()) + " and " +
                                               std::to_string(q.dim()));
    }
    Eigen::LLT<Eigen::MatrixXd> lq(symmetrized(q.covariance));
    Eigen::LLT<Eigen::MatrixXd> lp(symmetrized(p.covariance));
    if (lq.info() != Eigen::Success || lp.info() != Eigen::Success) {
        throw Error(ErrorCode::kNumerical, "KL needs positive-definite covariances");
    }
    const Eigen::VectorXd diff = q.mean - p.mean;
    const double trace = lq.solve(p.covariance).trace();
    const double quad = diff.dot(lq.solve(diff));
    const double logdet_q = 2.0 * lq.matrixLLT().diagonal().array().log().sum();
    const double logdet_p = 2.0 * lp.matrixLLT().diagonal().array().log().sum();
    return 0.5 * (trace + quad - static_cast<double>(p.dim()) + logdet_q - logdet_p);
}

PosteriorResult fit_posterior(const EmpiricalMoments& em, const Prior& prior, const SamplerConfig& config) {
    if (prior.family() == PriorFamily::kGaussianProduct) {
        PosteriorResult result;
        result.level = em.level;
        result.form = conjugate_posterior(em, prior, config.eta);
        result.provenance = Provenance{"conjugate", prior.spec(), em.fingerprint(), config.seed, config.eta};
        return result;
    }
    return rwm_sample(em, prior, config);
}

}  // namespace npivqb
