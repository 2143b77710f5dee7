#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "npivqb/error.hpp"
#include "npivqb/harness.hpp"
#include "npivqb/parallel.hpp"
#include "npivqb/sample_io.hpp"
#include "npivqb/seeds.hpp"
#include "npivqb/stats.hpp"

namespace npivqb {

namespace {

// Seed streams: derive_seed(master, {stream, n, replication, purpose}).
constexpr std::uint64_t kRateStream = 1;
constexpr std::uint64_t kBvmStream = 2;
constexpr std::uint64_t kSampleSeed = 0;
constexpr std::uint64_t kSamplerSeed = 1;
constexpr std::uint64_t kMassSeed = 2;

const DesignSpec& require_design(const ExperimentConfig& cfg, const char* study) {
    if (!cfg.design) throw Error(ErrorCode::kConfiguration, std::string(study) + " needs a synthetic design");
    return *cfg.design;
}

void require_grid(const ExperimentConfig& cfg, std::size_t min_points, const char* study) {
    if (cfg.study.sample_sizes.size() < min_points) {
        throw Error(ErrorCode::kConfiguration,
                    std::string(study) + " needs at least " + std::to_string(min_points) + " values in study.n");
    }
}

// b0 at level J: truncated, or zero-padded when the sieve is larger than the design.
SieveCoefficients truth_at_level(const Design& design, int level) {
    const SieveCoefficients& b0 = design.true_coeffs();
    if (level <= b0.level()) return b0.truncated(level);
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(sieve_dim(level));
    padded.head(b0.size()) = b0.coeffs();
    return SieveCoefficients(level, padded);
}

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) return false;
    }
    return true;
}

double theoretical_slope(const DesignSpec& spec, const std::vector<std::size_t>& ns) {
    if (spec.kind == IllPosedness::kMild) return -spec.smoothness / (2.0 * spec.rate + 2.0 * spec.smoothness + 1.0);
    // (log n)^{-s} has local log-log slope -s / ln n; evaluated at the grid's geometric mean.
    double mean_log = 0.0;
    for (std::size_t n : ns) mean_log += std::log(static_cast<double>(n));
    return -spec.smoothness / (mean_log / static_cast<double>(ns.size()));
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

RateReport run_rate_study(const ExperimentConfig& cfg) {
    const DesignSpec& spec = require_design(cfg, "rate-study");
    require_grid(cfg, 2, "rate-study");
    const Design design = Design::build(spec);
    const auto& ns = cfg.study.sample_sizes;
    const std::size_t reps = cfg.study.replications;

    struct Cell {
        double l2 = 0.0;
        double l2_mde = 0.0;
        double mass = 0.0;
        bool margin_failed = false;
    };
    std::vector<int> levels(ns.size());
    std::vector<double> taus(ns.size()), radii(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) {
        levels[i] = resolve_level(cfg, ns[i]);
        taus[i] = true_tau(design, levels[i]);
        const double dim = static_cast<double>(sieve_dim(levels[i]));
        radii[i] = cfg.study.contraction_m * (std::pow(dim, -spec.smoothness) +
                                              std::sqrt(dim / static_cast<double>(ns[i])) / taus[i]);
    }

    std::vector<Cell> cells(ns.size() * reps);
    parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
        const std::size_t i = idx / reps;
        const std::size_t r = idx % reps;
        const std::uint64_t n = ns[i];
        const Sample data = sample(design, n, derive_seed(cfg.seed, {kRateStream, n, r, kSampleSeed}));
        PosteriorResult posterior;
        const FitReport fit = run_fit(cfg, data, levels[i], derive_seed(cfg.seed, {kRateStream, n, r, kSamplerSeed}),
                                      &design, &posterior);
        Cell& cell = cells[idx];
        cell.l2 = *fit.l2_error_qb;
        cell.l2_mde = *fit.l2_error_mde;
        cell.mass = contraction_mass(posterior, truth_at_level(design, levels[i]), radii[i], cfg.study.mc_draws,
                                     derive_seed(cfg.seed, {kRateStream, n, r, kMassSeed}));
        cell.margin_failed = fit.tau_hat < taus[i] / 2.0;
    });

    RateReport report;
    report.theoretical_slope = theoretical_slope(spec, ns);
    std::vector<double> masses;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        std::vector<double> l2, l2_mde, mass;
        std::size_t failures = 0;
        for (std::size_t r = 0; r < reps; ++r) {
            const Cell& c = cells[i * reps + r];
            l2.push_back(c.l2);
            l2_mde.push_back(c.l2_mde);
            mass.push_back(c.mass);
            if (c.margin_failed) ++failures;
        }
        RateRow row;
        row.n = ns[i];
        row.level = levels[i];
        row.tau = taus[i];
        row.median_l2 = stats::median(l2);
        row.iqr_l2 = stats::iqr(l2);
        row.median_l2_mde = stats::median(l2_mde);
        row.radius = radii[i];
        row.median_contraction_mass = stats::median(mass);
        row.margin_failure_rate = static_cast<double>(failures) / static_cast<double>(reps);
        row.flagged = row.margin_failure_rate > kMarginFlagRate;
        report.rows.push_back(row);
        masses.push_back(row.median_contraction_mass);
    }
    // Pre-asymptotic contamination: the smallest n leaves the regression when its margin flag fires.
    if (report.rows.front().flagged && report.rows.size() > 2) {
        report.rows.front().in_fit = false;
        report.dropped_n = report.rows.front().n;
    }
    std::vector<double> log_n, log_err;
    for (const auto& row : report.rows) {
        if (!row.in_fit) continue;
        log_n.push_back(std::log(static_cast<double>(row.n)));
        log_err.push_back(std::log(row.median_l2));
    }
    const stats::LineFit line = stats::fit_line(log_n, log_err);
    report.slope = line.slope;
    report.slope_se = line.slope_se;
    report.intercept = line.intercept;
    report.contraction_nonincreasing = nonincreasing(masses);
    return report;
}

BvmReport run_bvm_study(const ExperimentConfig& cfg) {
    const DesignSpec& spec = require_design(cfg, "bvm-study");
    require_grid(cfg, 1, "bvm-study");
    const Design design = Design::build(spec);
    const auto& ns = cfg.study.sample_sizes;
    const std::size_t reps = cfg.study.replications;
    const bool exact = cfg.prior.family == PriorFamily::kGaussianProduct && !cfg.force_rwm;
    const Basis basis(cfg.basis);

    struct Cell {
        double kl = std::numeric_limits<double>::quiet_NaN();
        double max_ks = std::numeric_limits<double>::quiet_NaN();
        bool ill_conditioned = false;
    };
    std::vector<int> levels(ns.size());
    for (std::size_t i = 0; i < ns.size(); ++i) levels[i] = resolve_level(cfg, ns[i]);

    std::vector<Cell> cells(ns.size() * reps);
    parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
        const std::size_t i = idx / reps;
        const std::size_t r = idx % reps;
        const std::uint64_t n = ns[i];
        const Sample data = sample(design, n, derive_seed(cfg.seed, {kBvmStream, n, r, kSampleSeed}));
        const EmpiricalMoments em = empirical_moments(data, basis, levels[i]);
        const Prior prior(cfg.prior, levels[i]);
        Cell& cell = cells[idx];
        GaussianLaw bvm;
        try {
            bvm = bvm_approx(em, cfg.sampler.eta);
        } catch (const IllConditionedError&) {
            cell.ill_conditioned = true;
            return;
        }
        if (exact) {
            cell.kl = gaussian_kl(conjugate_posterior(em, prior, cfg.sampler.eta), bvm);
            return;
        }
        SamplerConfig sc = cfg.sampler;
        sc.seed = derive_seed(cfg.seed, {kBvmStream, n, r, kSamplerSeed});
        const PosteriorResult post = rwm_sample(em, prior, sc);
        const Eigen::MatrixXd& draws = post.mcmc().draws;
        double worst = 0.0;
        for (Eigen::Index k = 0; k < draws.cols(); ++k) {
            const double mu = bvm.mean[k];
            const double sd = std::sqrt(bvm.covariance(k, k));
            std::vector<double> col(draws.col(k).data(), draws.col(k).data() + draws.rows());
            worst = std::max(worst, stats::ks_statistic(col, [&](double t) { return stats::normal_cdf((t - mu) / sd); }));
        }
        cell.max_ks = worst;
    });

    BvmReport report;
    report.method = exact ? "conjugate" : "rwm";
    std::vector<double> trend;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        BvmRow row;
        row.n = ns[i];
        row.level = levels[i];
        std::vector<double> kl, tv, ks;
        for (std::size_t r = 0; r < reps; ++r) {
            const Cell& c = cells[i * reps + r];
            if (c.ill_conditioned) {
                ++row.ill_conditioned;
                continue;
            }
            if (exact) {
                kl.push_back(c.kl);
                tv.push_back(tv_upper_bound(c.kl));
            } else {
                ks.push_back(c.max_ks);
            }
        }
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.median_kl = kl.empty() ? nan : stats::median(kl);
        row.iqr_kl = kl.empty() ? nan : stats::iqr(kl);
        row.median_tv_bound = tv.empty() ? nan : stats::median(tv);
        row.median_max_ks = ks.empty() ? nan : stats::median(ks);
        trend.push_back(exact ? row.median_kl : row.median_max_ks);
        report.rows.push_back(row);
    }
    const bool finite = std::all_of(trend.begin(), trend.end(), [](double v) { return std::isfinite(v); });
    report.nonincreasing = finite && nonincreasing(trend);
    report.first_last_ratio = finite && trend.back() > 0.0 ? trend.front() / trend.back()
                                                           : std::numeric_limits<double>::quiet_NaN();
    return report;
}

IllposednessReport run_illposedness_study(const ExperimentConfig& cfg) {
    const DesignSpec& spec = require_design(cfg, "illposedness");
    require_grid(cfg, 1, "illposedness");
    const Design design = Design::build(spec);
    int max_level = 0;
    while (sieve_dim(max_level + 1) <= design.modes() + 1) ++max_level;
    std::vector<int> levels = cfg.study.levels;
    if (levels.empty()) {
        for (int j = 0; j <= std::min(max_level, 4); ++j) levels.push_back(j);
    }
    IllposednessReport report;
    report.rows = illposedness_profile(design, cfg.study.sample_sizes, levels, cfg.study.replications, cfg.seed,
                                       cfg.basis, cfg.threads);
    report.assumptions = validate_assumptions(design, *std::max_element(levels.begin(), levels.end()));
    return report;
}

nlohmann::json rate_report_to_json(const RateReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"n", r.n},
                        {"J", r.level},
                        {"tau", r.tau},
                        {"median_l2_error", r.median_l2},
                        {"iqr_l2_error", r.iqr_l2},
                        {"median_l2_error_mde", r.median_l2_mde},
                        {"contraction_radius", r.radius},
                        {"median_contraction_mass", r.median_contraction_mass},
                        {"margin_failure_rate", r.margin_failure_rate},
                        {"margin_flag", r.flagged},
                        {"in_fit", r.in_fit}});
    }
    nlohmann::json j;
    j["rows"] = rows;
    j["slope"] = report.slope;
    j["slope_se"] = report.slope_se;
    j["intercept"] = report.intercept;
    j["theoretical_slope"] = report.theoretical_slope;
    j["dropped_n"] = report.dropped_n ? nlohmann::json(*report.dropped_n) : nlohmann::json(nullptr);
    j["contraction_nonincreasing"] = report.contraction_nonincreasing;
    return j;
}

std::string rate_report_to_csv(const RateReport& report) {
    std::ostringstream os;
    os << "n,J,tau,median_l2_error,iqr_l2_error,median_l2_error_mde,contraction_radius,median_contraction_mass,"
          "margin_failure_rate,margin_flag,in_fit\n";
    for (const auto& r : report.rows) {
        os << r.n << ',' << r.level << ',' << fmt(r.tau) << ',' << fmt(r.median_l2) << ',' << fmt(r.iqr_l2) << ','
           << fmt(r.median_l2_mde) << ',' << fmt(r.radius) << ',' << fmt(r.median_contraction_mass) << ','
           << fmt(r.margin_failure_rate) << ',' << (r.flagged ? "true" : "false") << ','
           << (r.in_fit ? "true" : "false") << '\n';
    }
    return os.str();
}

nlohmann::json bvm_report_to_json(const BvmReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"n", r.n},
                        {"J", r.level},
                        {"median_kl", r.median_kl},
                        {"iqr_kl", r.iqr_kl},
                        {"median_tv_bound", r.median_tv_bound},
                        {"median_max_ks", r.median_max_ks},
                        {"ill_conditioned", r.ill_conditioned}});
    }
    nlohmann::json j;
    j["method"] = report.method;
    j["rows"] = rows;
    j["nonincreasing"] = report.nonincreasing;
    j["first_last_ratio"] = report.first_last_ratio;
    return j;
}

std::string bvm_report_to_csv(const BvmReport& report) {
    std::ostringstream os;
    os << "n,J,median_kl,iqr_kl,median_tv_bound,median_max_ks,ill_conditioned\n";
    for (const auto& r : report.rows) {
        os << r.n << ',' << r.level << ',' << fmt(r.median_kl) << ',' << fmt(r.iqr_kl) << ','
           << fmt(r.median_tv_bound) << ',' << fmt(r.median_max_ks) << ',' << r.ill_conditioned << '\n';
    }
    return os.str();
}

nlohmann::json illposedness_report_to_json(const IllposednessReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        rows.push_back({{"n", r.n},
                        {"J", r.level},
                        {"tau", r.tau},
                        {"median_tau_hat", r.median_tau_hat},
                        {"iqr_tau_hat", r.iqr_tau_hat},
                        {"margin_failure_rate", r.margin_failure_rate},
                        {"margin_flag", r.flagged}});
    }
    return {{"rows", rows}, {"assumptions", assumptions_to_json(report.assumptions)}};
}

std::string illposedness_report_to_csv(const IllposednessReport& report) {
    std::ostringstream os;
    os << "n,J,tau,median_tau_hat,iqr_tau_hat,margin_failure_rate,margin_flag\n";
    for (const auto& r : report.rows) {
        os << r.n << ',' << r.level << ',' << fmt(r.tau) << ',' << fmt(r.median_tau_hat) << ','
           << fmt(r.iqr_tau_hat) << ',' << fmt(r.margin_failure_rate) << ',' << (r.flagged ? "true" : "false")
           << '\n';
    }
    return os.str();
}

namespace {

ExperimentConfig load_study_config(const RunOptions& options) {
    ExperimentConfig cfg = load_config(options.config_path);
    if (options.seed) cfg.seed = *options.seed;
    return cfg;
}

}  // namespace

std::string run_rate_study_command(const RunOptions& options) {
    const ExperimentConfig cfg = load_study_config(options);
    const RateReport report = run_rate_study(cfg);
    nlohmann::json j = rate_report_to_json(report);
    j["config"] = config_to_json(cfg);
    save_report(options.out_dir, "rate_study", j, rate_report_to_csv(report));
    std::ostringstream os;
    os << "rate-study: slope=" << fmt(report.slope) << " se=" << fmt(report.slope_se)
       << " theoretical=" << fmt(report.theoretical_slope);
    if (report.dropped_n) os << " dropped_n=" << *report.dropped_n;
    return os.str();
}

std::string run_bvm_study_command(const RunOptions& options) {
    const ExperimentConfig cfg = load_study_config(options);
    const BvmReport report = run_bvm_study(cfg);
    nlohmann::json j = bvm_report_to_json(report);
    j["config"] = config_to_json(cfg);
    save_report(options.out_dir, "bvm_study", j, bvm_report_to_csv(report));
    std::ostringstream os;
    os << "bvm-study: method=" << report.method << " nonincreasing=" << (report.nonincreasing ? "yes" : "no")
       << " first/last=" << fmt(report.first_last_ratio);
    return os.str();
}

std::string run_illposedness_command(const RunOptions& options) {
    const ExperimentConfig cfg = load_study_config(options);
    const IllposednessReport report = run_illposedness_study(cfg);
    nlohmann::json j = illposedness_report_to_json(report);
    j["config"] = config_to_json(cfg);
    save_report(options.out_dir, "illposedness", j, illposedness_report_to_csv(report));
    std::size_t flagged = 0;
    for (const auto& r : report.rows) flagged += r.flagged ? 1 : 0;
    std::ostringstream os;
    os << "illposedness: rows=" << report.rows.size() << " flagged=" << flagged
       << " assumptions=" << (report.assumptions.all_passed() ? "pass" : "FAIL");
    return os.str();
}

}  // namespace npivqb
