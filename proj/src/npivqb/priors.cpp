#include "npivqb/priors.hpp"

#include <cmath>
#include <limits>

#include "npivqb/error.hpp"

namespace npivqb {

std::string to_string(PriorFamily family) {
    switch (family) {
        case PriorFamily::kGaussianProduct: return "gaussian";
        case PriorFamily::kUniformProduct: return "uniform";
        case PriorFamily::kLaplaceProduct: return "laplace";
        case PriorFamily::kIsotropicExponential: return "isotropic";
    }
    return "unknown";
}

namespace {

const char* scale_key(PriorFamily family) {
    switch (family) {
        case PriorFamily::kGaussianProduct: return "sigma";
        case PriorFamily::kUniformProduct: return "A";
        default: return "lambda";
    }
}

}  // namespace

nlohmann::json prior_to_json(const PriorSpec& spec) {
    nlohmann::json j;
    j["family"] = to_string(spec.family);
    j[scale_key(spec.family)] = spec.scale;
    return j;
}

PriorSpec prior_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::kConfiguration, "prior must be a JSON object");
    PriorSpec spec;
    try {
        const std::string family = j.at("family").get<std::string>();
        if (family == "gaussian") {
            spec.family = PriorFamily::kGaussianProduct;
        } else if (family == "uniform") {
            spec.family = PriorFamily::kUniformProduct;
        } else if (family == "laplace") {
            spec.family = PriorFamily::kLaplaceProduct;
        } else if (family == "isotropic") {
            spec.family = PriorFamily::kIsotropicExponential;
        } else {
            throw Error(ErrorCode::kConfiguration, "unknown prior family '" + family + "'");
        }
        spec.scale = j.at(scale_key(spec.family)).get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfiguration, std::string("prior config: ") + e.what());
    }
    return spec;
}

Prior::Prior(PriorSpec spec, int level) : spec_(spec), level_(level) {
    if (!(spec_.scale > 0.0) || !std::isfinite(spec_.scale)) {
        throw Error(ErrorCode::kConfiguration, "prior scale parameter must be positive and finite");
    }
    if (level < 0) throw Error(ErrorCode::kDimension, "negative resolution level");
}

double Prior::log_density(const Eigen::VectorXd& b) const {
    if (b.size() != dim()) {
        throw Error(ErrorCode::kDimension, "prior of dimension " + std::to_string(dim()) + " evaluated at a vector of length " +
                                               std::to_string(b.size()));
    }
    switch (spec_.family) {
        case PriorFamily::kGaussianProduct: return -b.squaredNorm() / (2.0 * spec_.scale * spec_.scale);
        case PriorFamily::kUniformProduct:
            return b.cwiseAbs().maxCoeff() <= spec_.scale ? 0.0 : -std::numeric_limits<double>::infinity();
        case PriorFamily::kLaplaceProduct: return -spec_.scale * b.lpNorm<1>();
        case PriorFamily::kIsotropicExponential: return -spec_.scale * b.norm();
    }
    return 0.0;
}

double Prior::log_density(const SieveCoefficients& b) const {
    if (b.level() != level_) throw Error(ErrorCode::kDimension, "prior and coefficient levels differ");
    return log_density(b.coeffs());
}

double Prior::coordinate_variance() const {
    const double s = spec_.scale;
    switch (spec_.family) {
        case PriorFamily::kGaussianProduct: return s * s;
        case PriorFamily::kUniformProduct: return s * s / 3.0;
        case PriorFamily::kLaplaceProduct: return 2.0 / (s * s);
        case PriorFamily::kIsotropicExponential: {
            // E||b||^2 = d (d+1) / lambda^2 for a Gamma(d, lambda) radius.
            const double d = static_cast<double>(dim());
            return (d + 1.0) / (s * s);
        }
    }
    return 1.0;
}

Eigen::VectorXd Prior::draw(std::mt19937_64& rng) const {
    const Eigen::Index d = dim();
    Eigen::VectorXd b(d);
    switch (spec_.family) {
        case PriorFamily::kGaussianProduct: {
            std::normal_distribution<double> normal(0.0, spec_.scale);
            for (Eigen::Index i = 0; i < d; ++i) b[i] = normal(rng);
            break;
        }
        case PriorFamily::kUniformProduct: {
            std::uniform_real_distribution<double> unit(-spec_.scale, spec_.scale);
            for (Eigen::Index i = 0; i < d; ++i) b[i] = unit(rng);
            break;
        }
        case PriorFamily::kLaplaceProduct: {
            std::exponential_distribution<double> expo(spec_.scale);
            std::bernoulli_distribution sign(0.5);
            for (Eigen::Index i = 0; i < d; ++i) {
                const double m = expo(rng);
                b[i] = sign(rng) ? m : -m;
            }
            break;
        }
        case PriorFamily::kIsotropicExponential: {
            // Radial density proportional to t^{d-1} exp(-lambda t).
            std::normal_distribution<double> normal(0.0, 1.0);
            for (Eigen::Index i = 0; i < d; ++i) b[i] = normal(rng);
            std::gamma_distribution<double> radius(static_cast<double>(d), 1.0 / spec_.scale);
            b *= radius(rng) / b.norm();
            break;
        }
    }
    return b;
}

SieveCoefficients sample_prior(const Prior& prior, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return SieveCoefficients(prior.level(), prior.draw(rng));
}

namespace {

Eigen::VectorXd uniform_in_ball(Eigen::Index d, double radius, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = normal(rng);
    const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(d));
    return v * (r / v.norm());
}

}  // namespace

FlatnessResult flatness_ratio(const Prior& prior, const SieveCoefficients& center, double radius, std::size_t probes,
                              std::uint64_t seed) {
    if (!(radius > 0.0)) throw Error(ErrorCode::kConfiguration, "flatness radius must be positive");
    if (center.level() != prior.level()) throw Error(ErrorCode::kDimension, "prior and center levels differ");
    std::mt19937_64 rng(seed);
    FlatnessResult out;
    for (std::size_t k = 0; k < probes; ++k) {
        const Eigen::VectorXd b = center.coeffs() + uniform_in_ball(prior.dim(), radius, rng);
        const Eigen::VectorXd bt = center.coeffs() + uniform_in_ball(prior.dim(), radius, rng);
        const double la = prior.log_density(b);
        const double lb = prior.log_density(bt);
        if (!std::isfinite(la) || !std::isfinite(lb)) {
            out.violated = true;
            out.ratio = std::numeric_limits<double>::infinity();
            return out;
        }
        out.ratio = std::max(out.ratio, std::abs(std::expm1(la - lb)));
    }
    return out;
}

double small_ball_logprob(const Prior& prior, const SieveCoefficients& center, double eps, std::size_t draws,
                          std::uint64_t seed) {
    if (!(eps > 0.0)) throw Error(ErrorCode::kConfiguration, "small-ball radius must be positive");
    if (center.level() != prior.level()) throw Error(ErrorCode::kDimension, "prior and center levels differ");
    if (draws == 0) throw Error(ErrorCode::kConfiguration, "small-ball diagnostic needs at least one draw");
    std::mt19937_64 rng(seed);
    std::size_t inside = 0;
    for (std::size_t k = 0; k < draws; ++k) {
        if ((prior.draw(rng) - center.coeffs()).norm() <= eps) ++inside;
    }
    if (inside == 0) return -std::numeric_limits<double>::infinity();
    return std::log(static_cast<double>(inside) / static_cast<double>(draws));
}

}  // namespace npivqb
