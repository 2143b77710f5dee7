#pragma once

#include <cstdint>
#include <random>
#include <string>

#include <json.hpp>

#include "npivqb/basis.hpp"

namespace npivqb {

enum class PriorFamily { kGaussianProduct, kUniformProduct, kLaplaceProduct, kIsotropicExponential };

std::string to_string(PriorFamily family);

// Family plus its single scale parameter: sigma (gaussian), A (uniform),
// lambda (laplace, isotropic).
struct PriorSpec {
    PriorFamily family = PriorFamily::kGaussianProduct;
    double scale = 10.0;
};

nlohmann::json prior_to_json(const PriorSpec& spec);
PriorSpec prior_spec_from_json(const nlohmann::json& j);

// Generating prior on R^{2^J}.
//   gaussian_product(sigma):      prod_l N(0, sigma^2)
//   uniform_product(A):           uniform on [-A, A]^{2^J}
//   laplace_product(lambda):      prod_l (lambda/2) exp(-lambda |b_l|)
//   isotropic_exponential(lambda): density proportional to exp(-lambda ||b||)
class Prior {
public:
    Prior(PriorSpec spec, int level);

    const PriorSpec& spec() const { return spec_; }
    PriorFamily family() const { return spec_.family; }
    double scale() const { return spec_.scale; }
    int level() const { return level_; }
    Eigen::Index dim() const { return sieve_dim(level_); }

    // Log density up to a family constant; -infinity outside the support.
    double log_density(const Eigen::VectorXd& b) const;
    double log_density(const SieveCoefficients& b) const;

    // Marginal variance of one coordinate.
    double coordinate_variance() const;

    Eigen::VectorXd draw(std::mt19937_64& rng) const;

private:
    PriorSpec spec_;
    int level_;
};

SieveCoefficients sample_prior(const Prior& prior, std::uint64_t seed);

struct FlatnessResult {
    // max over probe pairs of |pi(c+b)/pi(c+b~) - 1|; a lower bound on the sup.
    double ratio = 0.0;
    // A probe landed where the prior density vanishes.
    bool violated = false;
};

FlatnessResult flatness_ratio(const Prior& prior, const SieveCoefficients& center, double radius,
                              std::size_t probes = 2048, std::uint64_t seed = 7);

// log of the Monte Carlo frequency of ||draw - center|| <= eps; -inf if no draw lands.
double small_ball_logprob(const Prior& prior, const SieveCoefficients& center, double eps, std::size_t draws,
                          std::uint64_t seed);

}  // namespace npivqb
