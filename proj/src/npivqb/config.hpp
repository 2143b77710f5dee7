#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "npivqb/analysis.hpp"
#include "npivqb/basis.hpp"
#include "npivqb/design.hpp"
#include "npivqb/posterior.hpp"
#include "npivqb/priors.hpp"

namespace npivqb {

struct StudyGrid {
    std::vector<std::size_t> sample_sizes;  // "n"
    std::size_t replications = 20;
    std::vector<int> levels;  // "J"; illposedness grid
    double contraction_m = 5.0;
    std::size_t mc_draws = kContractionDraws;
};

// Parsed experiment file. Example:
//
//   {
//     "design": {"kind": "mild", "r": 1, "scale": 0.06, "L": 15, "s": 2,
//                "rho_U": 0.05, "sigma_e": 0.07},
//     "basis": "cosine",
//     "J": "auto", "J_cap": 6,
//     "prior": {"family": "gaussian", "sigma": 10},
//     "eta": 0.5,
//     "posterior": "auto",
//     "sampler": {"n_draws": 20000, "burn_in": 5000, "chains": 1, "thin": 1,
//                 "target_accept": 0.234, "proposal": "curvature"},
//     "n": 2000,
//     "study": {"n": [1000, 4000, 16000], "replications": 20,
//               "J": [0, 1, 2], "contraction_M": 5, "mc_draws": 100000},
//     "seed": 1, "threads": 1
//   }
//
// "data" (a CSV path, relative to the config file) may replace or accompany
// "design". Without a design, J must be an explicit integer.
struct ExperimentConfig {
    std::optional<DesignSpec> design;
    std::optional<std::string> data_path;
    BasisKind basis = BasisKind::kCosine;
    std::optional<int> level;  // empty means automatic
    int level_cap = 6;
    PriorSpec prior;
    SamplerConfig sampler;
    // Random-walk Metropolis even when the prior admits the closed form.
    bool force_rwm = false;
    std::size_t n = 1000;
    StudyGrid study;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace npivqb
