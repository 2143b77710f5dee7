// Acceptance suite: one PASS/FAIL line per criterion. Everything except the
// finite Gibbs check goes through the npivqb command-line tool; outputs are
// checked against reference computations in tests/support.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include <json.hpp>

#include "../support/oracles.hpp"
#include "../support/process.hpp"
#include "npivqb/analysis.hpp"
#include "npivqb/priors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

fs::path g_work;
const fs::path g_configs = NPIVQB_ACCEPTANCE_CONFIGS;
int g_log_counter = 0;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Runs a CLI subcommand; throws with the tool's output on a nonzero exit.
void cli(const std::string& command, const fs::path& config, const fs::path& out,
         const std::vector<std::string>& extra = {}) {
    std::vector<std::string> args{command, "--config", config.string(), "--out", out.string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const CliResult r = run_cli(NPIVQB_CLI_PATH, args, g_work / ("cli" + std::to_string(g_log_counter++) + ".log"));
    if (r.exit_code != 0) {
        throw std::runtime_error("npivqb " + command + " exited with " + std::to_string(r.exit_code) + ": " + r.output);
    }
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

struct SampleData {
    std::vector<double> y, x, w;
};

SampleData read_sample(const fs::path& p) {
    SampleData s;
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string a, b, c;
        std::getline(row, a, ',');
        std::getline(row, b, ',');
        std::getline(row, c, ',');
        s.y.push_back(std::stod(a));
        s.x.push_back(std::stod(b));
        s.w.push_back(std::stod(c));
    }
    return s;
}

Eigen::MatrixXd read_draws(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    const Eigen::Index cols = Eigen::Index(std::count(line.begin(), line.end(), ',') + 1);
    std::vector<double> values;
    while (std::getline(in, line)) {
        std::stringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    }
    const Eigen::Index rows = Eigen::Index(values.size()) / cols;
    return Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), rows, cols);
}

Eigen::VectorXd to_vector(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

Eigen::MatrixXd to_matrix(const json& j) {
    Eigen::MatrixXd m(Eigen::Index(j.size()), Eigen::Index(j[0].size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = to_vector(j[std::size_t(i)]).transpose();
    return m;
}

// Sample moments built directly from the CSV with the reference cosine basis.
struct Moments {
    std::size_t n = 0;
    Eigen::MatrixXd ww, wx;
    Eigen::VectorXd c;

    double loglik(const Eigen::VectorXd& b) const {
        const Eigen::VectorXd r = c - wx * b;
        return -0.5 * double(n) * r.dot(ww.ldlt().solve(r));
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& b) const {
        const Eigen::VectorXd r = c - wx * b;
        return double(n) * wx.transpose() * ww.ldlt().solve(r);
    }
};

Moments moments(const SampleData& s, int dim) {
    Moments m;
    m.n = s.y.size();
    m.ww = Eigen::MatrixXd::Zero(dim, dim);
    m.wx = Eigen::MatrixXd::Zero(dim, dim);
    m.c = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd pw(dim), px(dim);
    for (std::size_t i = 0; i < m.n; ++i) {
        for (int l = 0; l < dim; ++l) {
            pw[l] = oracle::cosine(l + 1, s.w[i]);
            px[l] = oracle::cosine(l + 1, s.x[i]);
        }
        m.ww += pw * pw.transpose();
        m.wx += pw * px.transpose();
        m.c += s.y[i] * pw;
    }
    m.ww /= double(m.n);
    m.wx /= double(m.n);
    m.c /= double(m.n);
    return m;
}

bool nonincreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1]) return false;
    }
    return true;
}

// 1. Gibbs weights minimize the information complexity on finite atom sets.
Outcome gibbs_minimizer() {
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> atoms(2, 8);
    std::normal_distribution<double> normal;
    std::exponential_distribution<double> expo(1.0);
    const double eta = 0.5;
    const auto simplex = [&](std::size_t k) {
        std::vector<double> w(k);
        double t = 0.0;
        for (auto& v : w) t += (v = expo(rng));
        for (auto& v : w) v /= t;
        return w;
    };

    // Half the instances use quasi-likelihood losses of prior draws on simulated data.
    npivqb::DesignSpec spec;
    spec.rho_u = 0.1;
    spec.sigma_e = 0.14;
    const npivqb::Design design = npivqb::Design::build(spec);
    const npivqb::Basis basis(npivqb::BasisKind::kCosine);
    const npivqb::Prior prior(npivqb::PriorSpec{npivqb::PriorFamily::kGaussianProduct, 0.5}, 1);

    std::size_t violations = 0, ties = 0, identity_misses = 0;
    double worst_identity = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const std::size_t k = std::size_t(atoms(rng));
        std::vector<double> losses(k);
        if (inst % 2 == 0) {
            const npivqb::EmpiricalMoments em =
                npivqb::empirical_moments(npivqb::sample(design, 200, 1000 + inst), basis, 1);
            std::vector<npivqb::SieveCoefficients> draws;
            for (std::size_t a = 0; a < k; ++a) draws.emplace_back(1, prior.draw(rng));
            losses = npivqb::atom_losses(em, draws);
            // Keep the weights away from a point mass so candidates are informative.
            const double lo = *std::min_element(losses.begin(), losses.end());
            const double hi = *std::max_element(losses.begin(), losses.end());
            for (auto& l : losses) l = 8.0 * (l - lo) / std::max(hi - lo, 1e-12);
        } else {
            for (auto& l : losses) l = 3.0 * normal(rng);
        }
        const std::vector<double> pw = simplex(k);
        const std::vector<double> g = npivqb::gibbs_weights(losses, pw, eta);
        const double at_g = npivqb::info_complexity(losses, pw, g, eta);
        double scale = 1.0;
        for (double l : losses) scale = std::max(scale, std::abs(l));
        const double tol = 1e-12 * scale;
        for (int t = 0; t < 1000; ++t) {
            const std::vector<double> w = simplex(k);
            const double gap = npivqb::info_complexity(losses, pw, w, eta) - at_g;
            // Reference: the gap equals KL(w || gibbs) / eta.
            double kl = 0.0;
            for (std::size_t a = 0; a < k; ++a) {
                if (w[a] > 0.0) kl += w[a] * std::log(w[a] / g[a]);
            }
            const double err = std::abs(gap - kl / eta);
            worst_identity = std::max(worst_identity, err);
            if (err > 1e-9 * scale) ++identity_misses;
            if (gap < -tol) ++violations;
            if (gap <= tol) {
                double dist = 0.0;
                for (std::size_t a = 0; a < k; ++a) dist = std::max(dist, std::abs(w[a] - g[a]));
                if (dist > 1e-5) ++ties;
            }
        }
    }
    Outcome o;
    o.pass = violations == 0 && ties == 0 && identity_misses == 0;
    o.detail = "50 instances x 1000 candidates: " + std::to_string(violations) + " below Gibbs, " +
               std::to_string(ties) + " ties away from Gibbs, max |gap - KL/eta| = " + fmt(worst_identity);
    return o;
}

// 2. Random-walk draws match the closed-form conjugate posterior.
Outcome conjugacy() {
    const fs::path exact_dir = g_work / "conjugate", mcmc_dir = g_work / "rwm";
    cli("fit", g_configs / "conjugate.json", exact_dir);
    cli("fit", g_configs / "rwm.json", mcmc_dir);
    const json post = read_json(exact_dir / "posterior.json");
    const Eigen::VectorXd mean = to_vector(post["mean"]);
    const Eigen::MatrixXd cov = to_matrix(post["covariance"]);
    const Eigen::MatrixXd draws = read_draws(mcmc_dir / "draws.csv");
    const json fit = read_json(mcmc_dir / "fit.json");
    const Eigen::VectorXd ess = to_vector(fit["chain"]["ess"]);

    bool ok = draws.rows() == 20000 && draws.cols() == 4 && mean.size() == 4;
    double worst_ks = 0.0, worst_z = 0.0;
    for (Eigen::Index k = 0; ok && k < 4; ++k) {
        const double sd = std::sqrt(cov(k, k));
        std::vector<double> col(draws.col(k).data(), draws.col(k).data() + draws.rows());
        worst_ks = std::max(worst_ks, oracle::ks(col, [&](double t) { return oracle::normal_cdf((t - mean[k]) / sd); }));
        const double se = sd / std::sqrt(ess[k]);
        worst_z = std::max(worst_z, std::abs(draws.col(k).mean() - mean[k]) / se);
    }
    Outcome o;
    o.pass = ok && worst_ks < 0.03 && worst_z < 3.0;
    o.detail = "2^J=4, n=2000, 20000 draws: max KS " + fmt(worst_ks) + " (< 0.03), max |mean error|/MC s.e. " +
               fmt(worst_z) + " (< 3)";
    return o;
}

// 3. The minimum-distance estimator maximizes the quasi-likelihood.
Outcome mde_identity() {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> normal;
    std::size_t failures = 0;
    double worst_grad = 0.0, worst_solve = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const int level = inst % 4;
        const int dim = 1 << level;
        const fs::path dir = g_work / ("mde" + std::to_string(inst));
        cli("simulate", g_configs / "mde.json", dir / "sim", {"--seed", std::to_string(inst + 1)});
        const fs::path real = dir / "real.json";
        std::ofstream(real) << json{{"data", "sim/sample.csv"}, {"J", level}}.dump();
        cli("fit", real, dir / "fit");
        const Eigen::VectorXd b = to_vector(read_json(dir / "fit" / "fit.json")["mde"]["coeffs"]);
        const Moments m = moments(read_sample(dir / "sim" / "sample.csv"), dim);

        const double grad = m.gradient(b).norm() / double(m.n);
        const Eigen::VectorXd direct = m.wx.fullPivLu().solve(m.c);
        const double solve = (direct - b).norm() / direct.norm();
        worst_grad = std::max(worst_grad, grad);
        worst_solve = std::max(worst_solve, solve);
        bool ok = b.size() == dim && grad < 1e-8 && solve < 1e-8;
        const double top = m.loglik(b);
        for (int t = 0; ok && t < 1000; ++t) {
            Eigen::VectorXd step(dim);
            for (auto& v : step) v = 0.05 * normal(rng);
            if (!(m.loglik(b + step) < top)) ok = false;
        }
        if (!ok) ++failures;
    }
    Outcome o;
    o.pass = failures == 0;
    o.detail = "20 instances: max |grad|/n " + fmt(worst_grad) + " (< 1e-8), max relative gap to direct solve " +
               fmt(worst_solve) + ", " + std::to_string(failures) + " failures";
    return o;
}

// 4. true_tau equals the quadrature cross-Gram SVD; tau_hat concentrates around it.
Outcome tau_ground_truth() {
    double worst_oracle = 0.0, worst_median = 0.0;
    bool ok = true;
    for (const char* name : {"illposedness_mild", "illposedness_severe"}) {
        const fs::path dir = g_work / name;
        cli("illposedness", g_configs / (std::string(name) + ".json"), dir);
        const json report = read_json(dir / "illposedness.json");
        const json spec = read_json(g_configs / (std::string(name) + ".json"))["design"];
        std::vector<double> rho;
        for (int l = 1; l <= spec["L"].get<int>(); ++l) {
            rho.push_back(spec["kind"] == "mild" ? spec["scale"].get<double>() * std::pow(l, -spec["r"].get<double>())
                                                 : spec["scale"].get<double>() * std::exp(-spec["c"].get<double>() * l));
        }
        if (report["rows"].size() != 5) ok = false;
        for (const auto& row : report["rows"]) {
            const int level = row["J"];
            const double reference = oracle::min_singular_value(oracle::cross_gram(rho, 1 << level));
            worst_oracle = std::max(worst_oracle, std::abs(row["tau"].get<double>() - reference));
            worst_median = std::max(worst_median, std::abs(row["median_tau_hat"].get<double>() - reference));
        }
    }
    Outcome o;
    o.pass = ok && worst_oracle < 1e-6 && worst_median < 0.05;
    o.detail = "J<=4, mild and severe: max |tau - SVD oracle| " + fmt(worst_oracle) +
               " (< 1e-6), max |median tau_hat - tau| at n=1e5 " + fmt(worst_median) + " (< 0.05)";
    return o;
}

json g_rate;

// 5. Log-log slope of the median L2 error.
Outcome rate_slope() {
    cli("rate-study", g_configs / "rate.json", g_work / "rate");
    g_rate = read_json(g_work / "rate" / "rate_study.json");
    const double slope = g_rate["slope"], target = -2.0 / 7.0;
    Outcome o;
    o.pass = std::abs(slope - target) <= 0.15 && std::abs(g_rate["theoretical_slope"].get<double>() - target) < 1e-12;
    o.detail = "slope " + fmt(slope) + " (s.e. " + fmt(g_rate["slope_se"]) + "), target " + fmt(target) + " +/- 0.15";
    if (!g_rate["dropped_n"].is_null()) o.detail += ", dropped n=" + std::to_string(g_rate["dropped_n"].get<int>());
    return o;
}

// 6. Posterior mass outside the contraction ball.
Outcome contraction() {
    if (g_rate.is_null()) return {false, "rate study did not run"};
    std::vector<double> mass;
    std::string listing;
    for (const auto& row : g_rate["rows"]) {
        mass.push_back(row["median_contraction_mass"]);
        listing += (listing.empty() ? "" : ", ") + fmt(mass.back());
    }
    const json& last = g_rate["rows"].back();
    Outcome o;
    o.pass = last["n"] == 16000 && mass.back() < 0.1 && nonincreasing(mass);
    o.detail = "median mass outside M=5 ball by n: " + listing;
    return o;
}

// 7. KL between the quasi-posterior and its normal approximation shrinks.
Outcome bvm_trend() {
    cli("bvm-study", g_configs / "bvm.json", g_work / "bvm");
    const json report = read_json(g_work / "bvm" / "bvm_study.json");
    std::vector<double> kl;
    std::string listing;
    for (const auto& row : report["rows"]) {
        kl.push_back(row["median_kl"]);
        listing += (listing.empty() ? "" : ", ") + fmt(kl.back());
    }
    const double ratio = kl.size() == 3 && kl.back() > 0.0 ? kl.front() / kl.back() : 0.0;
    Outcome o;
    o.pass = report["method"] == "conjugate" && kl.size() == 3 && nonincreasing(kl) && ratio >= 2.0;
    o.detail = "median KL at n=1000,4000,16000: " + listing + "; first/last " + fmt(ratio) + " (>= 2)";
    return o;
}

// 8. Simulated data: uniform marginals and instruments orthogonal to U.
Outcome design_soundness() {
    cli("simulate", g_configs / "simulate.json", g_work / "simulate");
    const SampleData s = read_sample(g_work / "simulate" / "sample.csv");
    const Eigen::VectorXd b0 = to_vector(read_json(g_work / "simulate" / "design.json")["true_coeffs"]);
    const double n = double(s.y.size());
    const double ks_crit = 1.628 / std::sqrt(n);  // 1% Kolmogorov critical value
    const auto uniform = [](double t) { return t; };
    const double ks_x = oracle::ks(s.x, uniform), ks_w = oracle::ks(s.w, uniform);
    // Four moment conditions, Bonferroni-adjusted two-sided 1% level.
    const double z_crit = 3.023;
    double worst_z = 0.0;
    for (int l = 1; l <= 4; ++l) {
        double sum = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            double g = 0.0;
            for (Eigen::Index k = 0; k < b0.size(); ++k) g += b0[k] * oracle::cosine(int(k) + 1, s.x[i]);
            const double v = (s.y[i] - g) * oracle::cosine(l + 1, s.w[i]);
            sum += v;
            sq += v * v;
        }
        const double mean = sum / n;
        worst_z = std::max(worst_z, std::abs(mean) / std::sqrt((sq / n - mean * mean) / n));
    }
    Outcome o;
    o.pass = s.y.size() == 100000 && ks_x < ks_crit && ks_w < ks_crit && worst_z < z_crit;
    o.detail = "n=1e5: KS(X) " + fmt(ks_x) + ", KS(W) " + fmt(ks_w) + " (< " + fmt(ks_crit) +
               "), max |z| of E[U phi_l+1(W)] for l<=4 " + fmt(worst_z) + " (< " + fmt(z_crit) + ")";
    return o;
}

// 9. Re-running every command reproduces its JSON byte for byte.
Outcome determinism() {
    struct Run {
        std::string command, config, dir;
    };
    const std::vector<Run> runs{{"simulate", "simulate.json", "simulate"},
                                {"fit", "conjugate.json", "conjugate"},
                                {"fit", "rwm.json", "rwm"},
                                {"rate-study", "rate.json", "rate"},
                                {"bvm-study", "bvm.json", "bvm"},
                                {"illposedness", "illposedness_mild.json", "illposedness_mild"}};
    std::size_t files = 0, mismatches = 0;
    for (const Run& r : runs) {
        const fs::path first = g_work / r.dir, second = g_work / (r.dir + "_again");
        if (!fs::exists(first)) cli(r.command, g_configs / r.config, first);
        cli(r.command, g_configs / r.config, second);
        for (const auto& entry : fs::directory_iterator(first)) {
            if (entry.path().extension() != ".json") continue;
            ++files;
            if (slurp(entry.path()) != slurp(second / entry.path().filename())) ++mismatches;
        }
        // A different seed must change the outcome.
        if (r.command == "simulate") {
            cli(r.command, g_configs / r.config, g_work / "simulate_seed", {"--seed", "9"});
            if (slurp(first / "sample.csv") == slurp(g_work / "simulate_seed" / "sample.csv")) ++mismatches;
        }
    }
    Outcome o;
    o.pass = files >= 6 && mismatches == 0;
    o.detail = std::to_string(files) + " JSON reports from 5 subcommands, " + std::to_string(mismatches) + " differences";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "npivqb_acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    struct Criterion {
        int id;
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Gibbs minimizer", 1.0, gibbs_minimizer},
        {2, "conjugacy", 30.0, conjugacy},
        {3, "MDE identity", 5.0, mde_identity},
        {4, "tau_J ground truth", 120.0, tau_ground_truth},
        {5, "rate study", 1200.0, rate_slope},
        {6, "contraction", 1200.0, contraction},
        {7, "BvM trend", 300.0, bvm_trend},
        {8, "design soundness", 60.0, design_soundness},
        {9, "determinism", 1e9, determinism},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + fmt(c.budget_s) + " s budget";
        }
        if (!o.pass) ++failed;
        std::printf("criterion %d %-20s %s  %s [%.2f s]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
