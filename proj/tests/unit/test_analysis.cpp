#include <doctest.h>

#include <random>

#include "../support/expect.hpp"
#include "../support/oracles.hpp"
#include "npivqb/analysis.hpp"

using namespace npivqb;

namespace {

DesignSpec mild_spec() {
    DesignSpec spec;
    spec.rate = 1.0;
    spec.scale = 0.06;
    spec.modes = 15;
    spec.smoothness = 2.0;
    spec.rho_u = 0.1;
    spec.sigma_e = 0.14;
    return spec;
}

PosteriorResult exact_result(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
    PosteriorResult r;
    r.level = int(std::log2(double(mean.size())));
    r.form = GaussianLaw{mean, cov};
    return r;
}

std::vector<double> random_simplex(std::size_t k, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& v : w) total += (v = e(rng));
    for (auto& v : w) v /= total;
    return w;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("l2_error examples") {
    const Design d = Design::build(mild_spec());
    CHECK(l2_error(d.true_coeffs(), d) == 0.0);

    std::vector<double> one_mode{0.1};
    DesignSpec spec = mild_spec();
    spec.endogenous_modes = {1};
    const Design small = Design::from_spectrum(spec, one_mode);
    // b0 = (1, 1): norm sqrt(2).
    CHECK(l2_error(SieveCoefficients::zeros(0), small) == doctest::Approx(std::sqrt(2.0)));

    // Estimates longer than b0 are charged for the extra coefficients.
    Eigen::VectorXd longer = Eigen::VectorXd::Zero(32);
    longer.head(16) = d.true_coeffs().coeffs();
    longer[20] = 0.3;
    CHECK(l2_error(SieveCoefficients(5, longer), d) == doctest::Approx(0.3));
}

TEST_CASE("l2_error matches quadrature of the squared difference") {
    const Design d = Design::build(mild_spec());
    const SieveCoefficients est(2, Eigen::Vector4d(0.9, 0.4, 0.0, 0.2));
    const oracle::Simpson s(8192);
    const double sq = s.integrate([&](double x) {
        double g = 0.0;
        for (int l = 1; l <= 4; ++l) g += est[l - 1] * oracle::cosine(l, x);
        return std::pow(g - d.g0(x), 2);
    });
    CHECK(std::abs(l2_error(est, d) - std::sqrt(sq)) < 1e-6);
}

TEST_CASE("contraction mass examples") {
    const PosteriorResult r = exact_result(Eigen::Vector2d::Zero(), Eigen::Matrix2d::Identity());
    const SieveCoefficients zero = SieveCoefficients::zeros(1);
    CHECK(contraction_mass(r, zero, 1e6) == 0.0);
    CHECK(contraction_mass(r, zero, 0.0) == 1.0);
    // chi^2_2 tail at 1: exp(-1/2); binomial s.e. at 1e5 draws is about 0.0015.
    CHECK(std::abs(contraction_mass(r, zero, 1.0) - std::exp(-0.5)) < 0.006);
    CHECK(code_of([&] { contraction_mass(r, SieveCoefficients::zeros(0), 1.0); }) == ErrorCode::kDimension);
    CHECK(code_of([&] { contraction_mass(r, zero, -1.0); }) == ErrorCode::kDomain);

    PosteriorResult mc;
    mc.level = 0;
    McmcDraws draws;
    draws.draws = Eigen::MatrixXd(4, 1);
    draws.draws << -2, -0.5, 0.5, 3;
    mc.form = draws;
    CHECK(contraction_mass(mc, SieveCoefficients::zeros(0), 1.0) == 0.5);
}

TEST_CASE("contraction mass is nonincreasing in the radius") {
    const PosteriorResult r = exact_result(Eigen::Vector4d(0.1, 0.2, 0, 0), Eigen::Matrix4d::Identity() * 0.3);
    const SieveCoefficients center = SieveCoefficients::zeros(2);
    double prev = 1.0;
    for (double radius = 0.0; radius <= 4.0; radius += 0.25) {
        const double m = contraction_mass(r, center, radius, 20000);
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("gibbs weights examples") {
    const std::vector<double> uniform{0.5, 0.5};
    const std::vector<double> g = gibbs_weights({0.0, 2.0}, uniform, 0.5);
    CHECK(g[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-14));
    CHECK(g[0] == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(g[1] == doctest::Approx(0.2689).epsilon(1e-4));

    const std::vector<double> prior{0.2, 0.3, 0.5};
    const std::vector<double> constant = gibbs_weights({4.0, 4.0, 4.0}, prior, 0.5);
    for (int k = 0; k < 3; ++k) CHECK(constant[k] == doctest::Approx(prior[k]).epsilon(1e-14));
    const std::vector<double> cold = gibbs_weights({1.0, 7.0, -3.0}, prior, 0.0);
    for (int k = 0; k < 3; ++k) CHECK(cold[k] == doctest::Approx(prior[k]).epsilon(1e-14));

    // exp(-1e4) underflows; log-sum-exp keeps the ratio.
    const std::vector<double> big = gibbs_weights({1e4, 1e4 + 2.0}, uniform, 0.5);
    CHECK(big[0] == doctest::Approx(g[0]).epsilon(1e-12));

    // Zero-prior atoms get zero weight.
    const std::vector<double> masked = gibbs_weights({5.0, 0.0}, {1.0, 0.0}, 0.5);
    CHECK(masked[0] == 1.0);
    CHECK(masked[1] == 0.0);
}

TEST_CASE("info complexity examples and errors") {
    const std::vector<double> prior{0.25, 0.25, 0.5};
    CHECK(info_complexity({0, 0, 0}, prior, prior, 0.5) == doctest::Approx(0.0));
    // One atom with all the mass: loss + log(1/prior)/eta.
    CHECK(info_complexity({3, 1, 2}, prior, {0, 0, 1}, 0.5) == doctest::Approx(2.0 + 2.0 * std::log(2.0)));
    CHECK(code_of([&] { info_complexity({0, 0}, {1.0, 0.0}, {0.5, 0.5}, 0.5); }) == ErrorCode::kAbsoluteContinuity);
    CHECK(code_of([&] { info_complexity({0, 0}, {0.5, 0.6}, {0.5, 0.5}, 0.5); }) == ErrorCode::kDomain);
    CHECK(code_of([&] { info_complexity({0, 0}, {0.5, 0.5}, {0.5, 0.5}, 0.0); }) == ErrorCode::kConfiguration);
    CHECK(code_of([&] { gibbs_weights({0, 0}, {0.5, 0.5}, -1.0); }) == ErrorCode::kConfiguration);
    CHECK(code_of([&] { gibbs_weights({0}, {0.5, 0.5}, 1.0); }) == ErrorCode::kDimension);
}

TEST_CASE("grid search over the two-atom simplex finds the Gibbs weights") {
    const std::vector<double> losses{0.0, 2.0}, prior{0.5, 0.5};
    for (double eta : {0.5, 1e6}) {
        double best_q = -1.0, best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= 100000; ++i) {
            const double q = i / 100000.0;
            const double v = info_complexity(losses, prior, {q, 1.0 - q}, eta);
            if (v < best) {
                best = v;
                best_q = q;
            }
        }
        const std::vector<double> g = gibbs_weights(losses, prior, eta);
        CHECK(std::abs(best_q - g[0]) < 1e-5);
        CHECK(info_complexity(losses, prior, g, eta) <= best + 1e-12);
        CHECK(info_complexity(losses, prior, g, eta) < info_complexity(losses, prior, prior, eta));
        if (eta > 1.0) CHECK(best_q == 1.0);
    }
}

TEST_CASE("gibbs weights minimize info complexity over random candidates") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> size(2, 8);
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t k = std::size_t(size(rng));
        std::vector<double> losses(k);
        for (auto& l : losses) l = 3.0 * normal(rng);
        const std::vector<double> prior = random_simplex(k, rng);
        for (double eta : {0.1, 0.5, 4.0}) {
            const std::vector<double> g = gibbs_weights(losses, prior, eta);
            const double at_g = info_complexity(losses, prior, g, eta);
            for (int t = 0; t < 1000; ++t) CHECK(at_g <= info_complexity(losses, prior, random_simplex(k, rng), eta) + 1e-12);
        }
    }
}

TEST_CASE("atom losses are -2 times the quasi-likelihood") {
    const EmpiricalMoments em = EmpiricalMoments::from_matrices(4, 0, Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                                                                Eigen::VectorXd::Ones(1));
    const std::vector<double> l = atom_losses(em, {SieveCoefficients::zeros(0), SieveCoefficients(0, Eigen::VectorXd::Ones(1))});
    CHECK(l[0] == doctest::Approx(4.0));
    CHECK(l[1] == 0.0);
}

TEST_CASE("illposedness profile") {
    const Design d = Design::build(mild_spec());
    const std::vector<IllposednessRow> rows = illposedness_profile(d, {1000, 16000, 128000}, {0, 1, 2, 3}, 20, 5, BasisKind::kCosine, 4);
    REQUIRE(rows.size() == 12);
    for (const auto& r : rows) {
        const double expected = r.level == 0 ? 1.0 : d.spectrum()[std::size_t((1 << r.level) - 2)];
        CHECK(r.tau == expected);
    }
    // rows are ordered by n, then level; J = 2 sits at offset 2.
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const IllposednessRow& r = rows[std::size_t(4 * i + 2)];
        CHECK(r.level == 2);
        const double gap = std::abs(r.median_tau_hat - r.tau);
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK_FALSE(rows[11].flagged);
    CHECK(rows == illposedness_profile(d, {1000, 16000, 128000}, {0, 1, 2, 3}, 20, 5, BasisKind::kCosine, 1));
}

TEST_CASE("severe design has log tau linear in 2^J") {
    DesignSpec spec = mild_spec();
    spec.kind = IllPosedness::kSevere;
    spec.rate = 0.5;
    spec.scale = 0.1;
    const Design d = Design::build(spec);
    for (int level = 1; level < 4; ++level) {
        const double step = std::log(true_tau(d, level + 1)) - std::log(true_tau(d, level));
        CHECK(step == doctest::Approx(-0.5 * (1 << level)).epsilon(1e-12));
    }
}

}
