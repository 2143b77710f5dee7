#include "npivqb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "npivqb/error.hpp"
#include "npivqb/sample_io.hpp"
#include "npivqb/seeds.hpp"
#include "npivqb/stats.hpp"

namespace npivqb {

int choose_level(std::size_t n, IllPosedness kind, double rate, double smoothness, int cap) {
    if (n < 2) throw Error(ErrorCode::kDomain, "choose_level needs n >= 2");
    if (!(rate > 0.0) || !(smoothness > 0.0)) throw Error(ErrorCode::kConfiguration, "rate and smoothness must be positive");
    const double ln_n = std::log(static_cast<double>(n));
    double log2_dim = 0.0;
    if (kind == IllPosedness::kMild) {
        log2_dim = ln_n / (2.0 * rate + 2.0 * smoothness + 1.0) / std::log(2.0);
    } else {
        const double c_prime = 1.0 / (4.0 * rate);
        log2_dim = std::log2(c_prime * ln_n);
    }
    const long level = std::lround(log2_dim);
    return static_cast<int>(std::clamp<long>(level, 0, cap));
}

int choose_level(std::size_t n, const DesignSpec& spec, int cap) {
    return choose_level(n, spec.kind, spec.rate, spec.smoothness, cap);
}

int resolve_level(const ExperimentConfig& config, std::size_t n) {
    if (config.level) return *config.level;
    if (!config.design) throw Error(ErrorCode::kConfiguration, "automatic J needs a design; set an explicit J for real data");
    return choose_level(n, *config.design, config.level_cap);
}

FitReport run_fit(const ExperimentConfig& config, const Sample& data, int level, std::uint64_t sampler_seed,
                  const Design* design, PosteriorResult* posterior_out) {
    validate_sample(data);
    const Basis basis(config.basis);
    const EmpiricalMoments em = empirical_moments(data, basis, level);
    const Prior prior(config.prior, level);
    SamplerConfig sampler = config.sampler;
    sampler.seed = sampler_seed;
    PosteriorResult posterior = config.force_rwm ? rwm_sample(em, prior, sampler) : fit_posterior(em, prior, sampler);

    FitReport report;
    report.n = data.size();
    report.level = level;
    report.basis = config.basis;
    report.provenance = posterior.provenance;
    report.qb = quasi_bayes(posterior);
    if (posterior.is_exact()) {
        report.exact = posterior.exact();
        report.posterior_sd = posterior.exact().marginal_sd();
    } else {
        const Eigen::MatrixXd& draws = posterior.mcmc().draws;
        const Eigen::RowVectorXd mean = draws.colwise().mean();
        const double denom = std::max<double>(1.0, static_cast<double>(draws.rows() - 1));
        report.posterior_sd = ((draws.rowwise() - mean).colwise().squaredNorm() / denom).cwiseSqrt().transpose();
        report.chain = posterior.mcmc().diagnostics;
    }
    report.mde = mde(em);
    report.tau_hat = tau_hat(em);
    report.ww_rank = em.ww_rank;
    try {
        report.bvm = bvm_approx(em, sampler.eta);
    } catch (const IllConditionedError&) {
        report.bvm.reset();
    }
    report.sandwich = centering_covariance(data, basis, em, report.mde.coeffs);
    if (design != nullptr) {
        report.l2_error_qb = l2_error(report.qb, *design);
        report.l2_error_mde = l2_error(report.mde.coeffs, *design);
        if (sieve_dim(level) <= design->modes() + 1) report.true_tau = true_tau(*design, level);
    }
    if (posterior_out != nullptr) *posterior_out = std::move(posterior);
    return report;
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec_json(m.row(i).transpose()));
    return rows;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << v;
    return os.str();
}

template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json gaussian_law_to_json(const GaussianLaw& law) {
    return {{"mean", vec_json(law.mean)}, {"covariance", mat_json(law.covariance)}};
}

nlohmann::json fit_report_to_json(const FitReport& r) {
    nlohmann::json j;
    j["n"] = r.n;
    j["J"] = r.level;
    j["basis"] = to_string(r.basis);
    j["method"] = r.provenance.method;
    j["prior"] = prior_to_json(r.provenance.prior);
    j["eta"] = r.provenance.eta;
    j["sampler_seed"] = r.provenance.seed;
    j["moments_fingerprint"] = hex64(r.provenance.moments_fingerprint);
    j["tau_hat"] = r.tau_hat;
    j["ww_rank"] = r.ww_rank;
    j["qb"] = vec_json(r.qb.coeffs());
    j["posterior_sd"] = vec_json(r.posterior_sd);
    j["mde"] = {{"coeffs", vec_json(r.mde.coeffs.coeffs())}, {"rank", r.mde.rank}, {"full_rank", r.mde.full_rank}};
    j["bvm"] = r.bvm ? gaussian_law_to_json(*r.bvm) : nlohmann::json(nullptr);
    j["sandwich_covariance"] = mat_json(r.sandwich);
    j["posterior"] = r.exact ? gaussian_law_to_json(*r.exact) : nlohmann::json(nullptr);
    if (r.chain) {
        j["chain"] = {{"acceptance_rate", r.chain->acceptance_rate},
                      {"step_size", r.chain->step_size},
                      {"ess", vec_json(r.chain->ess)},
                      {"chains", r.chain->chains}};
    } else {
        j["chain"] = nullptr;
    }
    j["truth"] = {{"l2_error_qb", opt_json(r.l2_error_qb)},
                  {"l2_error_mde", opt_json(r.l2_error_mde)},
                  {"tau", opt_json(r.true_tau)}};
    return j;
}

std::string fit_report_to_csv(const FitReport& r) {
    std::ostringstream os;
    os << "index,qb,posterior_sd,mde,bvm_sd,sandwich_sd\n";
    for (Eigen::Index k = 0; k < r.qb.size(); ++k) {
        os << k + 1 << ',' << format_double(r.qb[k]) << ',' << format_double(r.posterior_sd[k]) << ','
           << format_double(r.mde.coeffs[k]) << ','
           << (r.bvm ? format_double(std::sqrt(r.bvm->covariance(k, k))) : std::string("nan")) << ','
           << format_double(std::sqrt(r.sandwich(k, k))) << '\n';
    }
    return os.str();
}

nlohmann::json assumptions_to_json(const AssumptionReport& report) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) checks.push_back({{"id", c.id}, {"passed", c.passed}, {"detail", c.detail}});
    return {{"all_passed", report.all_passed()}, {"checks", checks}};
}

std::string assumptions_to_csv(const AssumptionReport& report) {
    std::ostringstream os;
    os << "id,passed,detail\n";
    for (const auto& c : report.checks) {
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), '"', '\'');
        os << c.id << ',' << (c.passed ? "true" : "false") << ",\"" << detail << "\"\n";
    }
    return os.str();
}

void save_report(const std::string& dir, const std::string& stem, const nlohmann::json& json, const std::string& csv) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + dir + ": " + ec.message());
    const std::filesystem::path base = std::filesystem::path(dir) / stem;
    write_text_file(base.string() + ".json", json.dump(2) + "\n");
    write_text_file(base.string() + ".csv", csv);
}

namespace {

ExperimentConfig load_with_overrides(const RunOptions& options) {
    ExperimentConfig cfg = load_config(options.config_path);
    if (options.seed) cfg.seed = *options.seed;
    if (options.data_path) cfg.data_path = options.data_path;
    return cfg;
}

const DesignSpec& require_design(const ExperimentConfig& cfg, const char* command) {
    if (!cfg.design) throw Error(ErrorCode::kConfiguration, std::string(command) + " needs a synthetic design");
    return *cfg.design;
}

int largest_level(const Design& design) {
    int level = 0;
    while (sieve_dim(level + 1) <= design.modes() + 1) ++level;
    return level;
}

nlohmann::json design_summary(const Design& design) {
    nlohmann::json j = design_to_json(design.spec());
    j["spectrum"] = design.spectrum();
    j["true_coeffs"] = vec_json(design.true_coeffs().coeffs());
    j["density_bound"] = design.density_bound();
    return j;
}

}  // namespace

std::string run_simulate_command(const RunOptions& options) {
    const ExperimentConfig cfg = load_with_overrides(options);
    const Design design = Design::build(require_design(cfg, "simulate"));
    const Sample data = sample(design, cfg.n, cfg.seed);
    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + options.out_dir + ": " + ec.message());
    const std::filesystem::path out(options.out_dir);
    save_csv(data, (out / "sample.csv").string());
    nlohmann::json dj = design_summary(design);
    dj["sample"] = {{"n", data.size()}, {"seed", cfg.seed}, {"proposals", data.proposals}};
    write_text_file((out / "design.json").string(), dj.dump(2) + "\n");
    const AssumptionReport assumptions = validate_assumptions(design, largest_level(design));
    save_report(options.out_dir, "assumptions", assumptions_to_json(assumptions), assumptions_to_csv(assumptions));
    std::ostringstream os;
    os << "simulate: n=" << data.size() << " acceptance=" << format_double(static_cast<double>(data.size()) /
                                                                          static_cast<double>(data.proposals))
       << " assumptions=" << (assumptions.all_passed() ? "pass" : "FAIL");
    return os.str();
}

std::string run_fit_command(const RunOptions& options) {
    const ExperimentConfig cfg = load_with_overrides(options);
    Sample data;
    std::optional<Design> design;
    if (cfg.design) design = Design::build(*cfg.design);
    if (cfg.data_path) {
        data = load_csv(*cfg.data_path);
    } else {
        data = sample(*design, cfg.n, cfg.seed);
    }
    const int level = resolve_level(cfg, data.size());
    PosteriorResult posterior;
    const FitReport report =
        run_fit(cfg, data, level, derive_seed(cfg.seed, {1}), design ? &*design : nullptr, &posterior);

    nlohmann::json j = fit_report_to_json(report);
    j["config"] = config_to_json(cfg);
    save_report(options.out_dir, "fit", j, fit_report_to_csv(report));
    const std::filesystem::path out(options.out_dir);
    if (report.exact) {
        write_text_file((out / "posterior.json").string(), gaussian_law_to_json(*report.exact).dump(2) + "\n");
    } else {
        save_draws_csv(posterior.mcmc().draws, (out / "draws.csv").string());
    }
    if (report.bvm) write_text_file((out / "bvm_law.json").string(), gaussian_law_to_json(*report.bvm).dump(2) + "\n");

    std::ostringstream os;
    os << "fit: n=" << report.n << " J=" << report.level << " method=" << report.provenance.method
       << " tau_hat=" << format_double(report.tau_hat);
    if (report.l2_error_qb) os << " l2_error=" << format_double(*report.l2_error_qb);
    return os.str();
}

}  // namespace npivqb
