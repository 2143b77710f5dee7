#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "npivqb.h"

namespace {

struct CommandArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> data;
};

CLI::App* add_command(CLI::App& app, const char* name, const char* help, CommandArgs& args) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", args.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "master seed; overrides the config");
    sub->add_option("--out", args.out, "output directory")->required();
    return sub;
}

int exit_code(npq_status status) {
    switch (npq_status_category(status)) {
        case NPQ_CATEGORY_NONE: return 0;
        case NPQ_CATEGORY_VALIDATION: return 2;
        case NPQ_CATEGORY_NUMERICAL: return 3;
        default: return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-Bayesian NPIV estimation and simulation studies"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(npq_version()));

    CommandArgs args;
    struct Entry {
        CLI::App* app;
        npq_command command;
    };
    const Entry entries[] = {
        {add_command(app, "simulate", "draw a sample from a synthetic design", args), NPQ_CMD_SIMULATE},
        {add_command(app, "fit", "fit the quasi-posterior to synthetic or CSV data", args), NPQ_CMD_FIT},
        {add_command(app, "rate-study", "L2 error rate of the quasi-Bayes estimator over n", args), NPQ_CMD_RATE_STUDY},
        {add_command(app, "bvm-study", "distance between quasi-posterior and its normal limit over n", args),
         NPQ_CMD_BVM_STUDY},
        {add_command(app, "illposedness", "true and empirical sieve ill-posedness", args), NPQ_CMD_ILLPOSEDNESS},
    };
    entries[1].app->add_option("--data", args.data, "CSV with header y,x,w; overrides the config")
        ->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    for (const Entry& e : entries) {
        if (!e.app->parsed()) continue;
        const std::uint64_t seed = args.seed.value_or(0);
        const npq_status status = npq_run_command(e.command, args.config.c_str(), args.seed ? &seed : nullptr,
                                                  args.out.c_str(), args.data ? args.data->c_str() : nullptr);
        if (status != NPQ_OK) {
            std::cerr << "error (" << npq_status_name(status) << "): " << npq_last_error() << '\n';
            return exit_code(status);
        }
        std::cout << npq_last_summary() << '\n';
        return 0;
    }
    return 2;
}
