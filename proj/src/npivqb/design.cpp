#include "npivqb/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "npivqb/error.hpp"
#include "npivqb/quadrature.hpp"
#include "npivqb/stats.hpp"

namespace npivqb {

std::string to_string(IllPosedness kind) { return kind == IllPosedness::kMild ? "mild" : "severe"; }

namespace {

double cosine_mode(int l, double x) {
    return l == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(std::numbers::pi * static_cast<double>(l) * x);
}

int padded_level(int count) {
    int level = 0;
    while (sieve_dim(level) < count) ++level;
    return level;
}

void check_spec(const DesignSpec& spec) {
    if (!(spec.rate > 0.0)) throw Error(ErrorCode::kConfiguration, "ill-posedness rate (r or c) must be positive");
    if (!(spec.scale > 0.0)) throw Error(ErrorCode::kConfiguration, "spectrum scale must be positive");
    if (spec.modes < 1) throw Error(ErrorCode::kConfiguration, "design needs at least one spectral mode");
    if (!(spec.smoothness > 0.5)) throw Error(ErrorCode::kConfiguration, "smoothness s must exceed 1/2");
    if (!(spec.sigma_e >= 0.0) || !std::isfinite(spec.rho_u)) {
        throw Error(ErrorCode::kConfiguration, "noise scale must be nonnegative and rho_U finite");
    }
}

}  // namespace

Design::Design(DesignSpec spec, std::vector<double> spectrum) : spec_(std::move(spec)), spectrum_(std::move(spectrum)) {
    double mass = 0.0;
    for (double rho : spectrum_) {
        if (!(rho >= 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::kConfiguration, "spectrum entries must be finite and >= 0");
        mass += 4.0 * rho;
    }
    if (mass > kMaxSpectrumMass) {
        std::ostringstream msg;
        msg << "density positivity constraint violated: sum_l 4 rho_l = " << mass << " exceeds " << kMaxSpectrumMass;
        throw Error(ErrorCode::kConfiguration, msg.str());
    }
    for (int l : spec_.endogenous_modes) {
        if (l < 1 || l > static_cast<int>(spectrum_.size())) {
            throw Error(ErrorCode::kConfiguration, "endogenous mode " + std::to_string(l) + " outside the spectrum");
        }
    }
    density_bound_ = 1.0 + mass;

    const int count = static_cast<int>(spectrum_.size()) + 1;
    const int level = padded_level(count);
    Eigen::VectorXd b0 = Eigen::VectorXd::Zero(sieve_dim(level));
    b0[0] = 1.0;
    for (int l = 1; l < count; ++l) b0[l] = std::pow(static_cast<double>(l), -(spec_.smoothness + 0.5));
    true_coeffs_ = SieveCoefficients(level, std::move(b0));
}

Design Design::build(const DesignSpec& spec) {
    check_spec(spec);
    std::vector<double> rho(static_cast<std::size_t>(spec.modes));
    for (int l = 1; l <= spec.modes; ++l) {
        const double ld = static_cast<double>(l);
        rho[static_cast<std::size_t>(l - 1)] = spec.kind == IllPosedness::kMild ? spec.scale * std::pow(ld, -spec.rate)
                                                                              : spec.scale * std::exp(-spec.rate * ld);
    }
    return Design(spec, std::move(rho));
}

Design Design::from_spectrum(const DesignSpec& spec, std::vector<double> spectrum) {
    check_spec(spec);
    DesignSpec declared = spec;
    declared.modes = static_cast<int>(spectrum.size());
    return Design(std::move(declared), std::move(spectrum));
}

double Design::density(double x, double w) const {
    if (!(x >= 0.0 && x <= 1.0 && w >= 0.0 && w <= 1.0)) {
        throw Error(ErrorCode::kDomain, "density argument outside the unit square");
    }
    double f = 1.0;
    for (std::size_t l = 0; l < spectrum_.size(); ++l) {
        const int mode = static_cast<int>(l) + 1;
        f += spectrum_[l] * cosine_mode(mode, x) * cosine_mode(mode, w);
    }
    return f;
}

double Design::g0(double x) const {
    const Eigen::VectorXd& b0 = true_coeffs_.coeffs();
    double g = 0.0;
    for (Eigen::Index l = 0; l < b0.size(); ++l) {
        if (b0[l] != 0.0) g += b0[l] * cosine_mode(static_cast<int>(l), x);
    }
    return g;
}

Eigen::MatrixXd Design::population_cross_gram(int level) const {
    const Eigen::Index dim = sieve_dim(level);
    if (dim > static_cast<Eigen::Index>(spectrum_.size()) + 1) {
        throw Error(ErrorCode::kSpectrumExhausted, "level " + std::to_string(level) + " needs " + std::to_string(dim - 1) +
                                                       " spectral modes, design has " +
                                                       std::to_string(spectrum_.size()));
    }
    Eigen::VectorXd diag(dim);
    diag[0] = 1.0;
    for (Eigen::Index l = 1; l < dim; ++l) diag[l] = spectrum_[static_cast<std::size_t>(l - 1)];
    return diag.asDiagonal();
}

void validate_sample(const Sample& sample) {
    if (sample.x.size() != sample.y.size() || sample.w.size() != sample.y.size()) {
        throw Error(ErrorCode::kDimension, "sample columns have different lengths");
    }
    if (sample.size() == 0) throw Error(ErrorCode::kData, "sample is empty");
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const bool ok = std::isfinite(sample.y[i]) && sample.x[i] >= 0.0 && sample.x[i] <= 1.0 && sample.w[i] >= 0.0 &&
                        sample.w[i] <= 1.0;
        if (!ok) bad.push_back(i + 1);
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << bad.size() << " invalid row(s) (x, w must lie in [0,1], y finite): rows";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 20); ++k) msg << ' ' << bad[k];
        if (bad.size() > 20) msg << " ...";
        throw Error(ErrorCode::kData, msg.str());
    }
}

Sample sample(const Design& design, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorCode::kConfiguration, "sample size must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double bound = design.density_bound();
    const auto& rho = design.spectrum();
    const auto& spec = design.spec();

    Sample out;
    out.y.reserve(n);
    out.x.reserve(n);
    out.w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = 0.0, w = 0.0;
        for (;;) {
            x = unit(rng);
            w = unit(rng);
            const double u = unit(rng);
            ++out.proposals;
            if (u * bound <= design.density(x, w)) break;
        }
        // E[phi_{l+1}(X) | W] = rho_l phi_{l+1}(W), so each summand has
        // conditional mean zero given W.
        double endogenous = 0.0;
        for (int l : spec.endogenous_modes) {
            endogenous += cosine_mode(l, x) - rho[static_cast<std::size_t>(l - 1)] * cosine_mode(l, w);
        }
        const double eps = normal(rng);
        const double u_err = spec.rho_u * endogenous + spec.sigma_e * eps;
        out.x.push_back(x);
        out.w.push_back(w);
        out.y.push_back(design.g0(x) + u_err);
    }
    return out;
}

double true_tau(const Design& design, int level) {
    if (level < 0) throw Error(ErrorCode::kDimension, "negative resolution level");
    const Eigen::MatrixXd k = design.population_cross_gram(level);
    return k.diagonal().minCoeff();
}

bool AssumptionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck& AssumptionReport::get(const std::string& id) const {
    for (const auto& c : checks) {
        if (c.id == id) return c;
    }
    throw Error(ErrorCode::kConfiguration, "no assumption check named " + id);
}

namespace {

// Log-log (mild) or log-linear (severe) slope of the first `count` spectrum entries.
double spectrum_slope(const std::vector<double>& rho, std::size_t count, IllPosedness kind) {
    std::vector<double> xs, ys;
    for (std::size_t l = 0; l < count; ++l) {
        const double ld = static_cast<double>(l + 1);
        xs.push_back(kind == IllPosedness::kMild ? std::log(ld) : ld);
        ys.push_back(std::log(rho[l]));
    }
    return stats::fit_line(xs, ys).slope;
}

constexpr double kDecaySlopeTolerance = 0.25;

}  // namespace

AssumptionReport validate_assumptions(const Design& design, int max_level) {
    AssumptionReport report;
    const auto& rho = design.spectrum();
    const auto& spec = design.spec();
    std::ostringstream detail;

    // A1(i): 1 - sum 2 rho_l <= f <= 1 + sum 2 rho_l, since |phi_{l+1}| <= sqrt(2).
    double half_mass = 0.0;
    for (double r : rho) half_mass += 2.0 * r;
    {
        detail.str("");
        detail << "density in [" << 1.0 - half_mass << ", " << 1.0 + half_mass << "], envelope M_f = "
               << design.density_bound();
        report.checks.push_back({"A1(i)", 1.0 - half_mass > 0.0 && std::isfinite(design.density_bound()), detail.str()});
    }

    // A1(ii): |U| <= |rho_U| sum_{l in S} sqrt(2) (1 + rho_l) + sigma_e |eps|.
    {
        double amp = 0.0;
        for (int l : spec.endogenous_modes) amp += std::numbers::sqrt2 * (1.0 + rho[static_cast<std::size_t>(l - 1)]);
        const double bound = spec.rho_u * spec.rho_u * amp * amp + spec.sigma_e * spec.sigma_e;
        detail.str("");
        detail << "sup_w E[U^2 | W=w] <= " << bound;
        report.checks.push_back({"A1(ii)", std::isfinite(bound), detail.str()});
    }

    // A1(iii) through its primitive condition f_W >= 1/C1.
    {
        const Quadrature q = Quadrature::make(QuadratureRule::kGaussLegendre, 256);
        double min_fw = std::numeric_limits<double>::infinity();
        for (int k = 0; k <= 64; ++k) {
            const double w = static_cast<double>(k) / 64.0;
            min_fw = std::min(min_fw, q.integrate([&](double x) { return design.density(x, w); }));
        }
        detail.str("");
        detail << "min_w f_W(w) = " << min_fw << " (uniform marginal)";
        report.checks.push_back({"A1(iii)", min_fw >= 1.0 - 1e-8, detail.str()});
    }

    const std::size_t used = std::min(rho.size(), static_cast<std::size_t>(sieve_dim(max_level) - 1));

    // A2 on the truncated span: every used singular value positive.
    {
        std::vector<std::size_t> zeros;
        for (std::size_t l = 0; l < used; ++l) {
            if (!(rho[l] > 0.0)) zeros.push_back(l + 1);
        }
        detail.str("");
        if (zeros.empty()) {
            detail << "rho_l > 0 for l <= " << used << " (injectivity checked on the truncated span only)";
        } else {
            detail << "rho_l = 0 at l =";
            for (auto l : zeros) detail << ' ' << l;
        }
        report.checks.push_back({"A2", zeros.empty(), detail.str()});
    }

    // A3: coefficient decay b0_{l+1} ~ l^{-(s+1/2)}.
    {
        const Eigen::VectorXd& b0 = design.true_coeffs().coeffs();
        std::vector<double> xs, ys;
        for (int l = 1; l <= design.modes(); ++l) {
            if (b0[l] == 0.0) continue;
            xs.push_back(std::log(static_cast<double>(l)));
            ys.push_back(std::log(std::abs(b0[l])));
        }
        const double target = -(spec.smoothness + 0.5);
        bool ok = spec.smoothness > 0.5;
        detail.str("");
        if (xs.size() >= 2) {
            const double slope = stats::fit_line(xs, ys).slope;
            ok = ok && std::abs(slope - target) <= kDecaySlopeTolerance;
            detail << "coefficient log-log slope " << slope << ", expected " << target;
        } else {
            detail << "too few coefficients to fit decay; s = " << spec.smoothness;
        }
        report.checks.push_back({"A3", ok, detail.str()});
    }

    // A4(i): decay of tau_J matches the declared kind and rate.
    {
        detail.str("");
        bool ok = true;
        bool positive = true;
        for (std::size_t l = 0; l < used; ++l) positive = positive && rho[l] > 0.0;
        if (!positive) {
            ok = false;
            detail << "tau_J vanishes on the requested levels";
        } else if (used >= 2) {
            const double slope = spectrum_slope(rho, used, spec.kind);
            const double expected = -spec.rate;
            ok = std::abs(slope - expected) <= kDecaySlopeTolerance * std::max(1.0, spec.rate);
            detail << to_string(spec.kind) << " spectrum slope " << slope << ", declared " << expected;
        } else {
            detail << "single mode; decay not identifiable";
        }
        report.checks.push_back({"A4(i)", ok, detail.str()});
    }

    // A4(ii): the cosine basis diagonalises K, so <phi_l, K(g0 - P_J g0)> = 0.
    report.checks.push_back({"A4(ii)", true, "operator diagonal in the sieve basis; bias term vanishes"});
    return report;
}

nlohmann::json design_to_json(const DesignSpec& spec) {
    nlohmann::json j;
    j["kind"] = to_string(spec.kind);
    j[spec.kind == IllPosedness::kMild ? "r" : "c"] = spec.rate;
    j["scale"] = spec.scale;
    j["L"] = spec.modes;
    j["s"] = spec.smoothness;
    j["rho_U"] = spec.rho_u;
    j["sigma_e"] = spec.sigma_e;
    j["seed"] = spec.seed;
    j["endogenous_modes"] = spec.endogenous_modes;
    return j;
}

DesignSpec design_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::kConfiguration, "design must be a JSON object");
    DesignSpec spec;
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "mild") {
            spec.kind = IllPosedness::kMild;
            spec.rate = j.at("r").get<double>();
        } else if (kind == "severe") {
            spec.kind = IllPosedness::kSevere;
            spec.rate = j.at("c").get<double>();
        } else {
            throw Error(ErrorCode::kConfiguration, "design kind must be 'mild' or 'severe', got '" + kind + "'");
        }
        spec.scale = j.at("scale").get<double>();
        spec.modes = j.at("L").get<int>();
        spec.smoothness = j.at("s").get<double>();
        spec.rho_u = j.value("rho_U", 0.0);
        spec.sigma_e = j.value("sigma_e", 0.0);
        spec.seed = j.value("seed", std::uint64_t{1});
        if (j.contains("endogenous_modes")) spec.endogenous_modes = j.at("endogenous_modes").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kConfiguration, std::string("design config: ") + e.what());
    }
    return spec;
}

}  // namespace npivqb
