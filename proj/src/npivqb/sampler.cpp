#include <cmath>
#include <limits>

#include "npivqb/error.hpp"
#include "npivqb/linalg.hpp"
#include "npivqb/parallel.hpp"
#include "npivqb/posterior.hpp"
#include "npivqb/seeds.hpp"
#include "npivqb/stats.hpp"

namespace npivqb {

namespace {

struct ChainOutput {
    Eigen::MatrixXd draws;
    std::size_t accepted = 0;
    double step = 0.0;
};

struct Target {
    QuadraticLoglik loglik;
    const Prior* prior;
    double eta;

    double operator()(const Eigen::VectorXd& b) const {
        const double lp = prior->log_density(b);
        if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
        return 2.0 * eta * loglik(b) + lp;
    }
};

ChainOutput run_chain(const Target& target, const Eigen::MatrixXd& shape, const Eigen::VectorXd& init,
                      std::size_t draws, std::size_t burn_in, std::size_t thin, double target_accept,
                      std::uint64_t seed) {
    const Eigen::Index d = init.size();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Eigen::VectorXd current = init;
    double current_lp = target(current);
    double log_step = std::log(2.38 / std::sqrt(static_cast<double>(d)));
    Eigen::VectorXd z(d);

    auto propose = [&](double step, double& accept_prob) {
        for (Eigen::Index k = 0; k < d; ++k) z[k] = normal(rng);
        const Eigen::VectorXd candidate = current + step * (shape * z);
        const double cand_lp = target(candidate);
        const double log_ratio = cand_lp - current_lp;
        accept_prob = std::isfinite(cand_lp) ? std::min(1.0, std::exp(log_ratio)) : 0.0;
        if (unit(rng) < accept_prob) {
            current = candidate;
            current_lp = cand_lp;
            return true;
        }
        return false;
    };

    std::size_t burn_accepted = 0;
    for (std::size_t t = 1; t <= burn_in; ++t) {
        double alpha = 0.0;
        if (propose(std::exp(log_step), alpha)) ++burn_accepted;
        // Robbins-Monro on the log step using the acceptance probability.
        log_step += std::pow(static_cast<double>(t), -0.6) * (alpha - target_accept);
    }
    if (burn_in > 0 && burn_accepted == 0) {
        throw Error(ErrorCode::kStuckChain, "random-walk chain accepted no proposal during " + std::to_string(burn_in) +
                                                " burn-in iterations");
    }

    ChainOutput out;
    out.step = std::exp(log_step);
    out.draws.resize(static_cast<Eigen::Index>(draws), d);
    for (std::size_t i = 0; i < draws; ++i) {
        for (std::size_t k = 0; k < thin; ++k) {
            double alpha = 0.0;
            if (propose(out.step, alpha)) ++out.accepted;
        }
        out.draws.row(static_cast<Eigen::Index>(i)) = current.transpose();
    }
    return out;
}

}  // namespace

PosteriorResult rwm_sample(const EmpiricalMoments& em, const Prior& prior, const SamplerConfig& config) {
    if (prior.level() != em.level) throw Error(ErrorCode::kDimension, "prior and moments levels differ");
    if (config.n_draws == 0 || config.chains == 0 || config.n_draws < config.chains || config.thin == 0) {
        throw Error(ErrorCode::kConfiguration, "sampler needs n_draws >= chains >= 1 and thin >= 1");
    }
    if (!(config.target_accept > 0.0 && config.target_accept < 1.0)) {
        throw Error(ErrorCode::kConfiguration, "target acceptance rate must lie in (0,1)");
    }
    if (!(config.eta > 0.0)) throw Error(ErrorCode::kConfiguration, "temperature eta must be positive");

    const Eigen::Index d = em.dim();
    const Eigen::VectorXd init = config.init.value_or(Eigen::VectorXd::Zero(d));
    if (init.size() != d) throw Error(ErrorCode::kDimension, "sampler init has the wrong dimension");

    const Target target{quadratic_loglik(em), &prior, config.eta};
    if (!std::isfinite(target(init))) {
        throw Error(ErrorCode::kInitialization, "sampler init lies outside the prior support");
    }

    // Proposal shape: Cholesky factor of (2 eta H + prior precision)^{-1}.
    Eigen::MatrixXd curvature = 2.0 * config.eta * target.loglik.hessian;
    curvature.diagonal().array() += 1.0 / prior.coordinate_variance();
    const Eigen::MatrixXd cov = spd_inverse(curvature);
    Eigen::MatrixXd shape;
    if (config.proposal == ProposalKind::kCurvature) {
        shape = spd_factor(cov);
    } else {
        shape = Eigen::MatrixXd::Identity(d, d) * std::sqrt(cov.trace() / static_cast<double>(d));
    }

    const std::size_t chains = config.chains;
    std::vector<ChainOutput> outputs(chains);
    parallel_for(chains, chains, [&](std::size_t k) {
        const std::size_t draws = config.n_draws / chains + (k < config.n_draws % chains ? 1 : 0);
        const std::uint64_t seed = chains == 1 ? config.seed : derive_seed(config.seed, {k});
        outputs[k] = run_chain(target, shape, init, draws, config.burn_in, config.thin, config.target_accept,
                              seed);
    });

    McmcDraws result;
    result.draws.resize(static_cast<Eigen::Index>(config.n_draws), d);
    result.diagnostics.ess = Eigen::VectorXd::Zero(d);
    result.diagnostics.chains = chains;
    Eigen::Index row = 0;
    std::size_t accepted = 0;
    double step_sum = 0.0;
    for (const auto& out : outputs) {
        result.draws.middleRows(row, out.draws.rows()) = out.draws;
        row += out.draws.rows();
        accepted += out.accepted;
        step_sum += out.step;
        for (Eigen::Index j = 0; j < d; ++j) {
            const Eigen::VectorXd col = out.draws.col(j);
            result.diagnostics.ess[j] += stats::effective_sample_size({col.data(), static_cast<std::size_t>(col.size())});
        }
    }
    result.diagnostics.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(config.n_draws * config.thin);
    result.diagnostics.step_size = step_sum / static_cast<double>(chains);

    PosteriorResult pr;
    pr.level = em.level;
    pr.form = std::move(result);
    pr.provenance = Provenance{"rwm", prior.spec(), em.fingerprint(), config.seed, config.eta};
    return pr;
}

}  // namespace npivqb
