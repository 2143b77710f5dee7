#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "npivqb/design.hpp"
#include "npivqb/moments.hpp"
#include "npivqb/priors.hpp"

namespace npivqb {

// Temperature of the quasi-likelihood; 1/2 reproduces exp{-(n/2) E_n[m̂²]}.
inline constexpr double kDefaultTemperature = 0.5;

struct GaussianLaw {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    Eigen::Index dim() const { return mean.size(); }
    Eigen::VectorXd marginal_sd() const { return covariance.diagonal().cwiseSqrt(); }
    // Rows are independent draws.
    Eigen::MatrixXd draw(std::size_t count, std::mt19937_64& rng) const;
};

// Throws kNumerical unless the covariance is symmetric (1e-12) and positive definite.
void check_gaussian_law(const GaussianLaw& law);

enum class ProposalKind {
    // Gaussian steps shaped by the inverse of (quasi-likelihood Hessian +
    // prior precision), with one adaptive scalar.
    kCurvature,
    // Identity-shaped Gaussian steps with one adaptive scalar.
    kIsotropic,
};

struct SamplerConfig {
    std::size_t n_draws = 20000;  // retained draws, summed over chains
    std::size_t burn_in = 5000;   // per chain
    std::size_t chains = 1;
    std::size_t thin = 1;         // iterations per retained draw after burn-in
    double target_accept = 0.234;
    std::optional<Eigen::VectorXd> init;  // defaults to the origin
    std::uint64_t seed = 1;
    ProposalKind proposal = ProposalKind::kCurvature;
    double eta = kDefaultTemperature;
};

struct ChainDiagnostics {
    double acceptance_rate = 0.0;
    double step_size = 0.0;  // mean frozen step across chains
    Eigen::VectorXd ess;     // per coordinate, summed over chains
    std::size_t chains = 1;
};

struct McmcDraws {
    Eigen::MatrixXd draws;  // n_draws x 2^J
    ChainDiagnostics diagnostics;
};

struct Provenance {
    std::string method;  // "conjugate" or "rwm"
    PriorSpec prior;
    std::uint64_t moments_fingerprint = 0;
    std::uint64_t seed = 0;
    double eta = kDefaultTemperature;
};

struct PosteriorResult {
    int level = 0;
    std::variant<GaussianLaw, McmcDraws> form;
    Provenance provenance;

    bool is_exact() const { return std::holds_alternative<GaussianLaw>(form); }
    const GaussianLaw& exact() const { return std::get<GaussianLaw>(form); }
    const McmcDraws& mcmc() const { return std::get<McmcDraws>(form); }
};

// Closed form for gaussian_product priors: precision 2 eta n Aᵀ M⁻ A + sigma^-2 I.
GaussianLaw conjugate_posterior(const EmpiricalMoments& em, const Prior& prior, double eta = kDefaultTemperature);

// Random-walk Metropolis on log p_b(D_n)^{2 eta} + log prior. The step scale
// adapts toward target_accept during burn-in and is frozen afterwards.
PosteriorResult rwm_sample(const EmpiricalMoments& em, const Prior& prior, const SamplerConfig& config);

// Conjugate for gaussian priors, RWM for the other families.
PosteriorResult fit_posterior(const EmpiricalMoments& em, const Prior& prior, const SamplerConfig& config);

// Posterior mean of the coefficients.
SieveCoefficients quasi_bayes(const PosteriorResult& result);

struct MdeResult {
    SieveCoefficients coeffs;
    Eigen::Index rank = 0;
    bool full_rank = false;
};

// b̂ = pinv(phi_wx) c, the minimum-norm maximiser of quasi_loglik.
MdeResult mde(const EmpiricalMoments& em);

inline constexpr double kBvmTauTolerance = 1e-8;

// N(b̂, n^{-1} A^{-1} phi_ww A^{-T}) with empirical plug-ins, scaled by
// 1/(2 eta). Throws IllConditionedError when tau_hat <= tol.
GaussianLaw bvm_approx(const EmpiricalMoments& em, double eta = kDefaultTemperature, double tol = kBvmTauTolerance);

// Same law with the design's population matrices (phi_ww = I, phi_wx = K_J).
GaussianLaw bvm_population(const Design& design, int level, std::size_t n, const Eigen::VectorXd& center,
                           double eta = kDefaultTemperature);

// n^{-1} A^{-1} E_n[phi(W) phi(W)ᵀ û²] A^{-T}, the sampling covariance of b̂.
Eigen::MatrixXd centering_covariance(const Sample& sample, const Basis& basis, const EmpiricalMoments& em,
                                     const SieveCoefficients& center);

// KL(p || q) between multivariate normals.
double gaussian_kl(const GaussianLaw& p, const GaussianLaw& q);
// Pinsker bound on total variation.
inline double tv_upper_bound(double kl) { return std::sqrt(std::max(kl, 0.0) / 2.0); }

}  // namespace npivqb
