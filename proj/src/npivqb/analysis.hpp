#pragma once

#include <cstdint>
#include <vector>

#include "npivqb/design.hpp"
#include "npivqb/moments.hpp"
#include "npivqb/posterior.hpp"

namespace npivqb {

// ||g_est - g0|| by Parseval: coefficient difference on the sieve plus the
// tail of g0 beyond it.
double l2_error(const SieveCoefficients& estimate, const Design& design);

inline constexpr std::size_t kContractionDraws = 100000;

// Posterior mass outside {b : ||b - center|| <= radius}. Exact laws are
// integrated with mc_draws Gaussian draws from `seed`; MCMC results use the
// stored draws.
double contraction_mass(const PosteriorResult& result, const SieveCoefficients& center, double radius,
                        std::size_t mc_draws = kContractionDraws, std::uint64_t seed = 11);

// sum_k q_k loss_k + eta^{-1} KL(q || prior) over a finite set of atoms.
// Throws kAbsoluteContinuity when q puts mass where the prior has none.
double info_complexity(const std::vector<double>& losses, const std::vector<double>& prior_weights,
                       const std::vector<double>& candidate, double eta);

// q_k proportional to prior_k exp(-eta loss_k), computed in log space.
std::vector<double> gibbs_weights(const std::vector<double>& losses, const std::vector<double>& prior_weights,
                                  double eta);

// Loss of each atom: n E_n[m̂(W_i, b)²] = -2 quasi_loglik(b).
std::vector<double> atom_losses(const EmpiricalMoments& em, const std::vector<SieveCoefficients>& atoms);

struct IllposednessRow {
    std::size_t n = 0;
    int level = 0;
    double tau = 0.0;
    double median_tau_hat = 0.0;
    double iqr_tau_hat = 0.0;
    // Share of replications with tau_hat < tau / 2.
    double margin_failure_rate = 0.0;
    bool flagged = false;  // margin_failure_rate > 0.2

    bool operator==(const IllposednessRow&) const = default;
};

inline constexpr double kMarginFlagRate = 0.2;

// Replication r at (n, J) draws its sample from derive_seed(seed, {n, r});
// all levels at one (n, r) share that sample.
std::vector<IllposednessRow> illposedness_profile(const Design& design, const std::vector<std::size_t>& sample_sizes,
                                                  const std::vector<int>& levels, std::size_t replications,
                                                  std::uint64_t seed, BasisKind basis = BasisKind::kCosine,
                                                  std::size_t threads = 1);

}  // namespace npivqb
