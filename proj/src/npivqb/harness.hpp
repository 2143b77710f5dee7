#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "npivqb/analysis.hpp"
#include "npivqb/config.hpp"

namespace npivqb {

// Mild: J = round(log2 n^{1/(2r+2s+1)}). Severe: J = round(log2(c' ln n)) with
// c' = 1/(4c). Both clamped to [0, cap].
int choose_level(std::size_t n, IllPosedness kind, double rate, double smoothness, int cap = 6);
int choose_level(std::size_t n, const DesignSpec& spec, int cap = 6);

// Resolution level for a fit of size n: the explicit J, or the automatic rule.
int resolve_level(const ExperimentConfig& config, std::size_t n);

struct FitReport {
    std::size_t n = 0;
    int level = 0;
    BasisKind basis = BasisKind::kCosine;
    Provenance provenance;
    SieveCoefficients qb;
    Eigen::VectorXd posterior_sd;
    MdeResult mde;
    double tau_hat = 0.0;
    Eigen::Index ww_rank = 0;
    // Empty when tau_hat is below the BvM tolerance.
    std::optional<GaussianLaw> bvm;
    Eigen::MatrixXd sandwich;  // sampling covariance of b̂
    std::optional<GaussianLaw> exact;
    std::optional<ChainDiagnostics> chain;
    // Ground truth, present when the data came from a known design.
    std::optional<double> l2_error_qb;
    std::optional<double> l2_error_mde;
    std::optional<double> true_tau;
};

// empirical_moments -> posterior -> quasi-Bayes mean, MDE and BvM law.
// `design` supplies ground truth when the sample was drawn from it.
FitReport run_fit(const ExperimentConfig& config, const Sample& data, int level, std::uint64_t sampler_seed,
                  const Design* design = nullptr, PosteriorResult* posterior_out = nullptr);

nlohmann::json fit_report_to_json(const FitReport& report);
std::string fit_report_to_csv(const FitReport& report);
nlohmann::json gaussian_law_to_json(const GaussianLaw& law);

struct RateRow {
    std::size_t n = 0;
    int level = 0;
    double tau = 0.0;
    double median_l2 = 0.0;
    double iqr_l2 = 0.0;
    double median_l2_mde = 0.0;
    double radius = 0.0;
    double median_contraction_mass = 0.0;
    double margin_failure_rate = 0.0;
    bool flagged = false;
    bool in_fit = true;
};

struct RateReport {
    std::vector<RateRow> rows;
    double slope = 0.0;
    double slope_se = 0.0;
    double intercept = 0.0;
    double theoretical_slope = 0.0;
    std::optional<std::size_t> dropped_n;
    bool contraction_nonincreasing = false;
};

struct BvmRow {
    std::size_t n = 0;
    int level = 0;
    double median_kl = 0.0;  // exact posteriors
    double iqr_kl = 0.0;
    double median_tv_bound = 0.0;
    double median_max_ks = 0.0;  // MCMC posteriors
    std::size_t ill_conditioned = 0;
};

struct BvmReport {
    std::string method;  // "conjugate" or "rwm"
    std::vector<BvmRow> rows;
    bool nonincreasing = false;
    double first_last_ratio = 0.0;
};

struct IllposednessReport {
    std::vector<IllposednessRow> rows;
    AssumptionReport assumptions;
};

RateReport run_rate_study(const ExperimentConfig& config);
BvmReport run_bvm_study(const ExperimentConfig& config);
IllposednessReport run_illposedness_study(const ExperimentConfig& config);

nlohmann::json rate_report_to_json(const RateReport& report);
std::string rate_report_to_csv(const RateReport& report);
nlohmann::json bvm_report_to_json(const BvmReport& report);
std::string bvm_report_to_csv(const BvmReport& report);
nlohmann::json illposedness_report_to_json(const IllposednessReport& report);
std::string illposedness_report_to_csv(const IllposednessReport& report);
nlohmann::json assumptions_to_json(const AssumptionReport& report);
std::string assumptions_to_csv(const AssumptionReport& report);

// Writes <dir>/<stem>.json and <dir>/<stem>.csv, creating dir if needed.
void save_report(const std::string& dir, const std::string& stem, const nlohmann::json& json, const std::string& csv);

// Command runners behind the CLI. Each writes its reports under out_dir and
// returns a one-line summary.
struct RunOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> data_path;  // fit only
};

std::string run_simulate_command(const RunOptions& options);
std::string run_fit_command(const RunOptions& options);
std::string run_rate_study_command(const RunOptions& options);
std::string run_bvm_study_command(const RunOptions& options);
std::string run_illposedness_command(const RunOptions& options);

}  // namespace npivqb
