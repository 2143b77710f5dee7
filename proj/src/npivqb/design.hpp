#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "npivqb/basis.hpp"

namespace npivqb {

enum class IllPosedness { kMild, kSevere };

std::string to_string(IllPosedness kind);

// Parameters of the synthetic data-generating process. `rate` is r for the
// mildly ill-posed spectrum rho_l = a l^{-r} and c for the severely ill-posed
// spectrum rho_l = a exp(-c l).
struct DesignSpec {
    IllPosedness kind = IllPosedness::kMild;
    double rate = 1.0;
    double scale = 0.06;
    int modes = 15;  // L
    double smoothness = 2.0;
    double rho_u = 0.0;
    double sigma_e = 0.0;
    std::uint64_t seed = 1;
    // Modes l (1-based, into the spectrum) that carry the endogenous error.
    std::vector<int> endogenous_modes{1, 2};
};

// Joint density f(x,w) = 1 + sum_l rho_l phi_{l+1}(x) phi_{l+1}(w) over the
// cosine basis. Both marginals are uniform, the conditional-expectation
// operator is diagonal (K phi_1 = phi_1, K phi_{l+1} = rho_l phi_{l+1}) and
// g0 has cosine coefficients (1, 1^{-(s+1/2)}, 2^{-(s+1/2)}, ...).
class Design {
public:
    // Largest admissible sum_l 4 rho_l.
    static constexpr double kMaxSpectrumMass = 0.9;

    static Design build(const DesignSpec& spec);
    // Explicit spectrum; the declared rate in `spec` is kept as metadata so
    // validate_assumptions can compare it with the realised decay.
    static Design from_spectrum(const DesignSpec& spec, std::vector<double> spectrum);

    const DesignSpec& spec() const { return spec_; }
    const std::vector<double>& spectrum() const { return spectrum_; }
    int modes() const { return static_cast<int>(spectrum_.size()); }
    // g0 coefficients, zero-padded to the next power of two >= L+1.
    const SieveCoefficients& true_coeffs() const { return true_coeffs_; }
    // M_f = 1 + sum_l 4 rho_l, the rejection-sampling envelope.
    double density_bound() const { return density_bound_; }

    double density(double x, double w) const;
    double g0(double x) const;
    // Operator K restricted to the first 2^J cosine functions.
    Eigen::MatrixXd population_cross_gram(int level) const;

private:
    Design(DesignSpec spec, std::vector<double> spectrum);

    DesignSpec spec_;
    std::vector<double> spectrum_;
    SieveCoefficients true_coeffs_;
    double density_bound_ = 1.0;
};

struct Sample {
    std::vector<double> y;
    std::vector<double> x;
    std::vector<double> w;
    // Rejection proposals consumed when drawn from a design; 0 otherwise.
    std::size_t proposals = 0;

    std::size_t size() const { return y.size(); }
};

// Throws kData listing offending rows (1-based) when x or w leave [0,1] or a
// value is non-finite.
void validate_sample(const Sample& sample);

Sample sample(const Design& design, std::size_t n, std::uint64_t seed);

double true_tau(const Design& design, int level);

struct AssumptionCheck {
    std::string id;
    bool passed = false;
    std::string detail;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;

    bool all_passed() const;
    const AssumptionCheck& get(const std::string& id) const;
};

AssumptionReport validate_assumptions(const Design& design, int max_level);

nlohmann::json design_to_json(const DesignSpec& spec);
DesignSpec design_spec_from_json(const nlohmann::json& j);

}  // namespace npivqb
