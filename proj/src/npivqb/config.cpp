#include "npivqb/config.hpp"

#include <filesystem>
#include <set>

#include "npivqb/error.hpp"
#include "npivqb/sample_io.hpp"

namespace npivqb {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfiguration, what); }

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) bad("unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get(const nlohmann::json& j, const char* key, const std::string& where) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        bad("'" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

std::size_t get_count(const nlohmann::json& j, const char* key, const std::string& where) {
    const nlohmann::json& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) bad("'" + std::string(key) + "' in " + where + " must be a nonnegative integer");
    return v.get<std::size_t>();
}

SamplerConfig sampler_from_json(const nlohmann::json& j, SamplerConfig cfg) {
    if (!j.is_object()) bad("sampler must be a JSON object");
    reject_unknown(j, {"n_draws", "burn_in", "chains", "thin", "target_accept", "proposal", "init"}, "sampler");
    if (j.contains("n_draws")) cfg.n_draws = get_count(j, "n_draws", "sampler");
    if (j.contains("burn_in")) cfg.burn_in = get_count(j, "burn_in", "sampler");
    if (j.contains("chains")) cfg.chains = get_count(j, "chains", "sampler");
    if (j.contains("thin")) cfg.thin = get_count(j, "thin", "sampler");
    if (j.contains("target_accept")) cfg.target_accept = get<double>(j, "target_accept", "sampler");
    if (j.contains("proposal")) {
        const std::string p = get<std::string>(j, "proposal", "sampler");
        if (p == "curvature") {
            cfg.proposal = ProposalKind::kCurvature;
        } else if (p == "isotropic") {
            cfg.proposal = ProposalKind::kIsotropic;
        } else {
            bad("sampler proposal must be 'curvature' or 'isotropic', got '" + p + "'");
        }
    }
    if (j.contains("init")) {
        const auto v = get<std::vector<double>>(j, "init", "sampler");
        cfg.init = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (cfg.n_draws == 0 || cfg.chains == 0 || cfg.thin == 0) bad("sampler n_draws, chains and thin must be positive");
    if (!(cfg.target_accept > 0.0 && cfg.target_accept < 1.0)) bad("sampler target_accept must lie in (0,1)");
    return cfg;
}

StudyGrid study_from_json(const nlohmann::json& j) {
    if (!j.is_object()) bad("study must be a JSON object");
    reject_unknown(j, {"n", "replications", "J", "contraction_M", "mc_draws"}, "study");
    StudyGrid grid;
    if (j.contains("n")) {
        const nlohmann::json& ns = j.at("n");
        if (!ns.is_array()) bad("study.n must be an array");
        for (const auto& v : ns) {
            if (!v.is_number_integer() || v.get<long long>() < 1) bad("study.n entries must be positive integers");
            grid.sample_sizes.push_back(v.get<std::size_t>());
        }
        for (std::size_t i = 1; i < grid.sample_sizes.size(); ++i) {
            if (grid.sample_sizes[i] <= grid.sample_sizes[i - 1]) bad("study.n must be strictly increasing");
        }
    }
    if (j.contains("replications")) grid.replications = get_count(j, "replications", "study");
    if (grid.replications < 1) bad("study.replications must be at least 1");
    if (j.contains("J")) {
        grid.levels = get<std::vector<int>>(j, "J", "study");
        for (int level : grid.levels) {
            if (level < 0 || level > 10) bad("study.J entries must lie in [0,10]");
        }
    }
    if (j.contains("contraction_M")) grid.contraction_m = get<double>(j, "contraction_M", "study");
    if (!(grid.contraction_m > 0.0)) bad("study.contraction_M must be positive");
    if (j.contains("mc_draws")) grid.mc_draws = get_count(j, "mc_draws", "study");
    if (grid.mc_draws < 1) bad("study.mc_draws must be positive");
    return grid;
}

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir) {
    if (!j.is_object()) bad("config must be a JSON object");
    reject_unknown(j, {"design", "data", "basis", "J", "J_cap", "prior", "eta", "posterior", "sampler", "n", "study", "seed",
                    "threads"},
                   "config");
    ExperimentConfig cfg;
    if (j.contains("design")) {
        cfg.design = design_spec_from_json(j.at("design"));
        cfg.seed = cfg.design->seed;
    }
    if (j.contains("data")) {
        std::filesystem::path p = get<std::string>(j, "data", "config");
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        cfg.data_path = p.lexically_normal().string();
    }
    if (!cfg.design && !cfg.data_path) bad("config needs a 'design' or a 'data' entry");
    if (j.contains("basis")) cfg.basis = basis_kind_from_string(get<std::string>(j, "basis", "config"));
    if (j.contains("J")) {
        const nlohmann::json& v = j.at("J");
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") bad("J must be \"auto\" or a nonnegative integer");
        } else if (v.is_number_integer() && v.get<long long>() >= 0 && v.get<long long>() <= 10) {
            cfg.level = v.get<int>();
        } else {
            bad("J must be \"auto\" or an integer in [0,10]");
        }
    }
    if (j.contains("J_cap")) cfg.level_cap = get<int>(j, "J_cap", "config");
    if (cfg.level_cap < 0 || cfg.level_cap > 10) bad("J_cap must lie in [0,10]");
    if (!cfg.design && !cfg.level) bad("real-data mode needs an explicit integer J: the automatic rule requires r and s");
    if (j.contains("prior")) cfg.prior = prior_spec_from_json(j.at("prior"));
    if (j.contains("sampler")) cfg.sampler = sampler_from_json(j.at("sampler"), cfg.sampler);
    if (j.contains("eta")) cfg.sampler.eta = get<double>(j, "eta", "config");
    if (!(cfg.sampler.eta > 0.0) || !std::isfinite(cfg.sampler.eta)) bad("eta must be positive");
    if (j.contains("posterior")) {
        const std::string p = get<std::string>(j, "posterior", "config");
        if (p != "auto" && p != "rwm") bad("posterior must be 'auto' or 'rwm', got '" + p + "'");
        cfg.force_rwm = p == "rwm";
    }
    if (j.contains("n")) cfg.n = get_count(j, "n", "config");
    if (cfg.n < 1) bad("n must be positive");
    if (j.contains("study")) cfg.study = study_from_json(j.at("study"));
    if (j.contains("seed")) {
        const nlohmann::json& v = j.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            bad("seed must be a nonnegative integer");
        }
        cfg.seed = v.get<std::uint64_t>();
    }
    if (j.contains("threads")) cfg.threads = get_count(j, "threads", "config");
    if (cfg.threads < 1) bad("threads must be at least 1");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        bad("config " + path + " is not valid JSON: " + e.what());
    }
    const std::string base = std::filesystem::path(path).parent_path().string();
    return config_from_json(j, base.empty() ? "." : base);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    if (cfg.design) j["design"] = design_to_json(*cfg.design);
    if (cfg.data_path) j["data"] = *cfg.data_path;
    j["basis"] = to_string(cfg.basis);
    if (cfg.level) {
        j["J"] = *cfg.level;
    } else {
        j["J"] = "auto";
    }
    j["J_cap"] = cfg.level_cap;
    j["prior"] = prior_to_json(cfg.prior);
    j["eta"] = cfg.sampler.eta;
    j["posterior"] = cfg.force_rwm ? "rwm" : "auto";
    nlohmann::json s;
    s["n_draws"] = cfg.sampler.n_draws;
    s["burn_in"] = cfg.sampler.burn_in;
    s["chains"] = cfg.sampler.chains;
    s["thin"] = cfg.sampler.thin;
    s["target_accept"] = cfg.sampler.target_accept;
    s["proposal"] = cfg.sampler.proposal == ProposalKind::kCurvature ? "curvature" : "isotropic";
    if (cfg.sampler.init) s["init"] = std::vector<double>(cfg.sampler.init->begin(), cfg.sampler.init->end());
    j["sampler"] = s;
    j["n"] = cfg.n;
    nlohmann::json st;
    st["n"] = cfg.study.sample_sizes;
    st["replications"] = cfg.study.replications;
    st["J"] = cfg.study.levels;
    st["contraction_M"] = cfg.study.contraction_m;
    st["mc_draws"] = cfg.study.mc_draws;
    j["study"] = st;
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

}  // namespace npivqb
