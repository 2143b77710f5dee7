#include "npivqb.h"

#include <cstring>
#include <new>
#include <string>

#include "npivqb/config.hpp"
#include "npivqb/error.hpp"
#include "npivqb/harness.hpp"
#include "npivqb/sample_io.hpp"

struct npq_design {
    npivqb::Design design;
};
struct npq_sample {
    npivqb::Sample sample;
};
struct npq_moments {
    npivqb::EmpiricalMoments em;
};
struct npq_fit {
    npivqb::FitReport report;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_summary;

npq_status fail(npq_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

// Runs fn, translating library exceptions into status codes.
template <class Fn>
npq_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return NPQ_OK;
    } catch (const npivqb::Error& e) {
        return fail(static_cast<npq_status>(static_cast<int>(e.code())), e.what());
    } catch (const std::bad_alloc&) {
        return fail(NPQ_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(NPQ_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(NPQ_ERR_INTERNAL, "unknown error");
    }
}

npq_status copy_out(const Eigen::VectorXd& v, double* buf, size_t cap, size_t* len) {
    if (len == nullptr) return fail(NPQ_ERR_NULL_ARGUMENT, "length pointer is null");
    *len = static_cast<size_t>(v.size());
    if (cap < *len || (buf == nullptr && *len > 0)) return fail(NPQ_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    std::memcpy(buf, v.data(), *len * sizeof(double));
    return NPQ_OK;
}

npivqb::BasisKind to_basis(npq_basis b) {
    if (b == NPQ_BASIS_COSINE) return npivqb::BasisKind::kCosine;
    if (b == NPQ_BASIS_HAAR) return npivqb::BasisKind::kHaar;
    throw npivqb::Error(npivqb::ErrorCode::kConfiguration, "unknown basis kind");
}

#define NPQ_REQUIRE(ptr)                                                       \
    do {                                                                       \
        if ((ptr) == nullptr) return fail(NPQ_ERR_NULL_ARGUMENT, #ptr " is null"); \
    } while (0)

}  // namespace

extern "C" {

const char* npq_version(void) { return "0.1.0"; }
const char* npq_last_error(void) { return g_last_error.c_str(); }
const char* npq_last_summary(void) { return g_last_summary.c_str(); }

const char* npq_status_name(npq_status status) {
    switch (status) {
        case NPQ_OK: return "ok";
        case NPQ_ERR_DOMAIN: return "domain";
        case NPQ_ERR_DATA: return "data";
        case NPQ_ERR_CONFIGURATION: return "configuration";
        case NPQ_ERR_DIMENSION: return "dimension";
        case NPQ_ERR_SPECTRUM_EXHAUSTED: return "spectrum_exhausted";
        case NPQ_ERR_UNSUPPORTED_FAMILY: return "unsupported_family";
        case NPQ_ERR_INITIALIZATION: return "initialization";
        case NPQ_ERR_STUCK_CHAIN: return "stuck_chain";
        case NPQ_ERR_ILL_CONDITIONED: return "ill_conditioned";
        case NPQ_ERR_ABSOLUTE_CONTINUITY: return "absolute_continuity";
        case NPQ_ERR_CSV_EMPTY: return "csv_empty";
        case NPQ_ERR_CSV_MISSING_HEADER: return "csv_missing_header";
        case NPQ_ERR_CSV_MALFORMED_ROW: return "csv_malformed_row";
        case NPQ_ERR_CSV_OUT_OF_RANGE: return "csv_out_of_range";
        case NPQ_ERR_IO: return "io";
        case NPQ_ERR_NUMERICAL: return "numerical";
        case NPQ_ERR_NULL_ARGUMENT: return "null_argument";
        case NPQ_ERR_BUFFER_TOO_SMALL: return "buffer_too_small";
        case NPQ_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

npq_category npq_status_category(npq_status status) {
    switch (status) {
        case NPQ_OK: return NPQ_CATEGORY_NONE;
        case NPQ_ERR_STUCK_CHAIN:
        case NPQ_ERR_ILL_CONDITIONED:
        case NPQ_ERR_NUMERICAL: return NPQ_CATEGORY_NUMERICAL;
        case NPQ_ERR_INTERNAL: return NPQ_CATEGORY_INTERNAL;
        default: return NPQ_CATEGORY_VALIDATION;
    }
}

npq_status npq_design_create(npq_illposedness kind, double rate, double scale, int modes, double smoothness,
                             double rho_u, double sigma_e, npq_design** out) {
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        npivqb::DesignSpec spec;
        spec.kind = kind == NPQ_SEVERE ? npivqb::IllPosedness::kSevere : npivqb::IllPosedness::kMild;
        spec.rate = rate;
        spec.scale = scale;
        spec.modes = modes;
        spec.smoothness = smoothness;
        spec.rho_u = rho_u;
        spec.sigma_e = sigma_e;
        if (modes < 2) spec.endogenous_modes = {1};
        *out = new npq_design{npivqb::Design::build(spec)};
    });
}

npq_status npq_design_from_json(const char* json, npq_design** out) {
    NPQ_REQUIRE(json);
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json);
        } catch (const nlohmann::json::parse_error& e) {
            throw npivqb::Error(npivqb::ErrorCode::kConfiguration, std::string("design JSON: ") + e.what());
        }
        *out = new npq_design{npivqb::Design::build(npivqb::design_spec_from_json(j))};
    });
}

void npq_design_free(npq_design* design) { delete design; }

npq_status npq_design_density(const npq_design* design, double x, double w, double* out) {
    NPQ_REQUIRE(design);
    NPQ_REQUIRE(out);
    return guarded([&] { *out = design->design.density(x, w); });
}

npq_status npq_design_true_tau(const npq_design* design, int level, double* out) {
    NPQ_REQUIRE(design);
    NPQ_REQUIRE(out);
    return guarded([&] { *out = npivqb::true_tau(design->design, level); });
}

npq_status npq_design_true_coeffs(const npq_design* design, double* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(design);
    return copy_out(design->design.true_coeffs().coeffs(), buf, cap, len);
}

npq_status npq_design_spectrum(const npq_design* design, double* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(design);
    const auto& rho = design->design.spectrum();
    return copy_out(Eigen::Map<const Eigen::VectorXd>(rho.data(), static_cast<Eigen::Index>(rho.size())), buf, cap,
                    len);
}

npq_status npq_sample_simulate(const npq_design* design, size_t n, uint64_t seed, npq_sample** out) {
    NPQ_REQUIRE(design);
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { *out = new npq_sample{npivqb::sample(design->design, n, seed)}; });
}

npq_status npq_sample_from_arrays(const double* y, const double* x, const double* w, size_t n, npq_sample** out) {
    NPQ_REQUIRE(y);
    NPQ_REQUIRE(x);
    NPQ_REQUIRE(w);
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        npivqb::Sample s;
        s.y.assign(y, y + n);
        s.x.assign(x, x + n);
        s.w.assign(w, w + n);
        npivqb::validate_sample(s);
        *out = new npq_sample{std::move(s)};
    });
}

npq_status npq_sample_load_csv(const char* path, npq_sample** out) {
    NPQ_REQUIRE(path);
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] { *out = new npq_sample{npivqb::load_csv(path)}; });
}

npq_status npq_sample_save_csv(const npq_sample* sample, const char* path) {
    NPQ_REQUIRE(sample);
    NPQ_REQUIRE(path);
    return guarded([&] { npivqb::save_csv(sample->sample, path); });
}

size_t npq_sample_size(const npq_sample* sample) { return sample == nullptr ? 0 : sample->sample.size(); }

npq_status npq_sample_columns(const npq_sample* sample, double* y, double* x, double* w) {
    NPQ_REQUIRE(sample);
    const auto& s = sample->sample;
    if (y != nullptr) std::copy(s.y.begin(), s.y.end(), y);
    if (x != nullptr) std::copy(s.x.begin(), s.x.end(), x);
    if (w != nullptr) std::copy(s.w.begin(), s.w.end(), w);
    return NPQ_OK;
}

void npq_sample_free(npq_sample* sample) { delete sample; }

npq_status npq_moments_compute(const npq_sample* sample, npq_basis basis, int level, npq_moments** out) {
    NPQ_REQUIRE(sample);
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        if (level < 0 || level > 10) throw npivqb::Error(npivqb::ErrorCode::kDimension, "level must lie in [0,10]");
        const npivqb::Basis b(to_basis(basis));
        *out = new npq_moments{npivqb::empirical_moments(sample->sample, b, level)};
    });
}

void npq_moments_free(npq_moments* moments) { delete moments; }

size_t npq_moments_dim(const npq_moments* moments) {
    return moments == nullptr ? 0 : static_cast<size_t>(moments->em.dim());
}

npq_status npq_moments_tau_hat(const npq_moments* moments, double* out) {
    NPQ_REQUIRE(moments);
    NPQ_REQUIRE(out);
    return guarded([&] { *out = npivqb::tau_hat(moments->em); });
}

npq_status npq_moments_quasi_loglik(const npq_moments* moments, const double* b, size_t len, double* out) {
    NPQ_REQUIRE(moments);
    NPQ_REQUIRE(b);
    NPQ_REQUIRE(out);
    return guarded([&] {
        if (len != static_cast<size_t>(moments->em.dim())) {
            throw npivqb::Error(npivqb::ErrorCode::kDimension, "coefficient vector has the wrong length");
        }
        const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(b, static_cast<Eigen::Index>(len));
        *out = npivqb::quasi_loglik(moments->em, npivqb::SieveCoefficients(moments->em.level, v));
    });
}

npq_status npq_moments_mde(const npq_moments* moments, double* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(moments);
    Eigen::VectorXd b;
    const npq_status st = guarded([&] { b = npivqb::mde(moments->em).coeffs.coeffs(); });
    if (st != NPQ_OK) return st;
    return copy_out(b, buf, cap, len);
}

npq_status npq_fit_run(const char* config_json, const npq_sample* sample, uint64_t seed, npq_fit** out) {
    NPQ_REQUIRE(config_json);
    NPQ_REQUIRE(sample);
    NPQ_REQUIRE(out);
    *out = nullptr;
    return guarded([&] {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(config_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw npivqb::Error(npivqb::ErrorCode::kConfiguration, std::string("config JSON: ") + e.what());
        }
        // The sample is supplied directly, so a data entry is not needed.
        if (j.is_object() && !j.contains("design") && !j.contains("data")) j["data"] = "<in-memory>";
        const npivqb::ExperimentConfig cfg = npivqb::config_from_json(j);
        std::optional<npivqb::Design> design;
        if (cfg.design) design = npivqb::Design::build(*cfg.design);
        const int level = npivqb::resolve_level(cfg, sample->sample.size());
        *out = new npq_fit{npivqb::run_fit(cfg, sample->sample, level, seed, design ? &*design : nullptr)};
    });
}

void npq_fit_free(npq_fit* fit) { delete fit; }
int npq_fit_level(const npq_fit* fit) { return fit == nullptr ? -1 : fit->report.level; }
double npq_fit_tau_hat(const npq_fit* fit) { return fit == nullptr ? -1.0 : fit->report.tau_hat; }

npq_status npq_fit_qb(const npq_fit* fit, double* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(fit);
    return copy_out(fit->report.qb.coeffs(), buf, cap, len);
}

npq_status npq_fit_mde(const npq_fit* fit, double* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(fit);
    return copy_out(fit->report.mde.coeffs.coeffs(), buf, cap, len);
}

npq_status npq_fit_posterior_sd(const npq_fit* fit, double* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(fit);
    return copy_out(fit->report.posterior_sd, buf, cap, len);
}

npq_status npq_fit_report_json(const npq_fit* fit, char* buf, size_t cap, size_t* len) {
    NPQ_REQUIRE(fit);
    NPQ_REQUIRE(len);
    std::string text;
    const npq_status st = guarded([&] { text = npivqb::fit_report_to_json(fit->report).dump(2); });
    if (st != NPQ_OK) return st;
    *len = text.size();
    if (buf == nullptr || cap < text.size() + 1) return fail(NPQ_ERR_BUFFER_TOO_SMALL, "output buffer too small");
    std::memcpy(buf, text.c_str(), text.size() + 1);
    return NPQ_OK;
}

npq_status npq_run_command(npq_command command, const char* config_path, const uint64_t* seed, const char* out_dir,
                           const char* data_path) {
    NPQ_REQUIRE(config_path);
    NPQ_REQUIRE(out_dir);
    return guarded([&] {
        npivqb::RunOptions opts;
        opts.config_path = config_path;
        opts.out_dir = out_dir;
        if (seed != nullptr) opts.seed = *seed;
        if (data_path != nullptr) opts.data_path = std::string(data_path);
        switch (command) {
            case NPQ_CMD_SIMULATE: g_last_summary = npivqb::run_simulate_command(opts); break;
            case NPQ_CMD_FIT: g_last_summary = npivqb::run_fit_command(opts); break;
            case NPQ_CMD_RATE_STUDY: g_last_summary = npivqb::run_rate_study_command(opts); break;
            case NPQ_CMD_BVM_STUDY: g_last_summary = npivqb::run_bvm_study_command(opts); break;
            case NPQ_CMD_ILLPOSEDNESS: g_last_summary = npivqb::run_illposedness_command(opts); break;
            default: throw npivqb::Error(npivqb::ErrorCode::kConfiguration, "unknown command");
        }
    });
}

}  // extern "C"
