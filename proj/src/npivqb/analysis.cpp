#include "npivqb/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "npivqb/error.hpp"
#include "npivqb/parallel.hpp"
#include "npivqb/seeds.hpp"
#include "npivqb/stats.hpp"

namespace npivqb {

double l2_error(const SieveCoefficients& estimate, const Design& design) {
    const Eigen::VectorXd& b0 = design.true_coeffs().coeffs();
    const Eigen::VectorXd& b = estimate.coeffs();
    double sq = 0.0;
    const Eigen::Index common = std::min(b.size(), b0.size());
    sq += (b.head(common) - b0.head(common)).squaredNorm();
    if (b0.size() > common) sq += b0.tail(b0.size() - common).squaredNorm();
    if (b.size() > common) sq += b.tail(b.size() - common).squaredNorm();
    return std::sqrt(sq);
}

double contraction_mass(const PosteriorResult& result, const SieveCoefficients& center, double radius,
                        std::size_t mc_draws, std::uint64_t seed) {
    if (center.level() != result.level) throw Error(ErrorCode::kDimension, "center level differs from posterior level");
    if (!(radius >= 0.0)) throw Error(ErrorCode::kDomain, "contraction radius must be nonnegative");
    auto count_outside = [&](const Eigen::MatrixXd& draws) {
        std::size_t outside = 0;
        for (Eigen::Index i = 0; i < draws.rows(); ++i) {
            if ((draws.row(i).transpose() - center.coeffs()).norm() > radius) ++outside;
        }
        return static_cast<double>(outside) / static_cast<double>(draws.rows());
    };
    if (!result.is_exact()) return count_outside(result.mcmc().draws);
    if (mc_draws == 0) throw Error(ErrorCode::kConfiguration, "contraction_mass needs at least one draw");
    std::mt19937_64 rng(seed);
    return count_outside(result.exact().draw(mc_draws, rng));
}

namespace {

void check_atoms(const std::vector<double>& losses, const std::vector<double>& prior_weights) {
    if (losses.empty() || losses.size() != prior_weights.size()) {
        throw Error(ErrorCode::kDimension, "losses and prior weights must be non-empty and of equal length");
    }
    double total = 0.0;
    for (double p : prior_weights) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error(ErrorCode::kDomain, "prior weights must be nonnegative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::kDomain, "prior weights must sum to one");
    for (double l : losses) {
        if (!std::isfinite(l)) throw Error(ErrorCode::kDomain, "losses must be finite");
    }
}

}  // namespace

double info_complexity(const std::vector<double>& losses, const std::vector<double>& prior_weights,
                       const std::vector<double>& candidate, double eta) {
    check_atoms(losses, prior_weights);
    if (candidate.size() != losses.size()) throw Error(ErrorCode::kDimension, "candidate has the wrong length");
    if (!(eta > 0.0)) throw Error(ErrorCode::kConfiguration, "info_complexity needs eta > 0");
    double loss = 0.0;
    double kl = 0.0;
    for (std::size_t k = 0; k < losses.size(); ++k) {
        const double q = candidate[k];
        if (!(q >= 0.0)) throw Error(ErrorCode::kDomain, "candidate weights must be nonnegative");
        if (q == 0.0) continue;
        if (prior_weights[k] == 0.0) {
            throw Error(ErrorCode::kAbsoluteContinuity,
                        "candidate puts mass on atom " + std::to_string(k + 1) + " where the prior has none");
        }
        loss += q * losses[k];
        kl += q * std::log(q / prior_weights[k]);
    }
    return loss + kl / eta;
}

std::vector<double> gibbs_weights(const std::vector<double>& losses, const std::vector<double>& prior_weights,
                                  double eta) {
    check_atoms(losses, prior_weights);
    if (!(eta >= 0.0) || !std::isfinite(eta)) throw Error(ErrorCode::kConfiguration, "eta must be nonnegative");
    const std::size_t k = losses.size();
    std::vector<double> logw(k, -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        if (prior_weights[i] > 0.0) {
            logw[i] = std::log(prior_weights[i]) - eta * losses[i];
            top = std::max(top, logw[i]);
        }
    }
    std::vector<double> w(k, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (prior_weights[i] > 0.0) {
            w[i] = std::exp(logw[i] - top);
            total += w[i];
        }
    }
    for (double& v : w) v /= total;
    return w;
}

std::vector<double> atom_losses(const EmpiricalMoments& em, const std::vector<SieveCoefficients>& atoms) {
    std::vector<double> out;
    out.reserve(atoms.size());
    for (const auto& b : atoms) out.push_back(-2.0 * quasi_loglik(em, b));
    return out;
}

std::vector<IllposednessRow> illposedness_profile(const Design& design, const std::vector<std::size_t>& sample_sizes,
                                                  const std::vector<int>& levels, std::size_t replications,
                                                  std::uint64_t seed, BasisKind basis_kind, std::size_t threads) {
    if (replications == 0) throw Error(ErrorCode::kConfiguration, "replications must be at least 1");
    if (levels.empty() || sample_sizes.empty()) throw Error(ErrorCode::kConfiguration, "empty n or J grid");
    const int max_level = *std::max_element(levels.begin(), levels.end());
    std::vector<double> tau(levels.size());
    for (std::size_t j = 0; j < levels.size(); ++j) tau[j] = true_tau(design, levels[j]);

    const Basis basis(basis_kind);
    std::vector<IllposednessRow> rows;
    for (std::size_t n : sample_sizes) {
        // tau_hats[r][j]
        std::vector<std::vector<double>> tau_hats(replications, std::vector<double>(levels.size()));
        parallel_for(replications, threads, [&](std::size_t r) {
            const Sample s = sample(design, n, derive_seed(seed, {n, r}));
            const EmpiricalMoments full = empirical_moments(s, basis, max_level);
            for (std::size_t j = 0; j < levels.size(); ++j) {
                tau_hats[r][j] = tau_hat(levels[j] == max_level ? full : full.restricted(levels[j]));
            }
        });
        for (std::size_t j = 0; j < levels.size(); ++j) {
            std::vector<double> column(replications);
            std::size_t failures = 0;
            for (std::size_t r = 0; r < replications; ++r) {
                column[r] = tau_hats[r][j];
                if (column[r] < tau[j] / 2.0) ++failures;
            }
            IllposednessRow row;
            row.n = n;
            row.level = levels[j];
            row.tau = tau[j];
            row.median_tau_hat = stats::median(column);
            row.iqr_tau_hat = stats::iqr(column);
            row.margin_failure_rate = static_cast<double>(failures) / static_cast<double>(replications);
            row.flagged = row.margin_failure_rate > kMarginFlagRate;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace npivqb
