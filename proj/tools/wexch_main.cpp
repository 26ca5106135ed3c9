#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wexch/experiments.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wexch::config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& experiment, const std::string& config_path, std::uint64_t seed_offset,
        const std::string& out_dir) {
    wexch::ExperimentConfig cfg = wexch::ExperimentConfig::parse(slurp(config_path));
    if (cfg.experiment() != experiment)
        throw wexch::config_error("config experiment '" + cfg.experiment() +
                                  "' does not match the subcommand '" + experiment + "'");
    const wexch::ExperimentResult res = wexch::run_experiment(cfg, seed_offset);
    const std::string payload = res.json.dump(2) + "\n";
    if (out_dir.empty()) {
        std::cout << payload;
    } else {
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path dir(out_dir);
        std::ofstream(dir / (experiment + "_result.json")) << payload;
        for (const auto& [name, contents] : res.artifacts) std::ofstream(dir / name) << contents;
        std::cout << "wrote " << (dir / (experiment + "_result.json")).string() << "\n";
    }
    if (!out_dir.empty())
        for (const auto& [name, contents] : res.artifacts)
            std::cout << "wrote " << (std::filesystem::path(out_dir) / name).string() << "\n";
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted exchangeability toolkit"};
    app.require_subcommand(1);

    const char* workers = std::getenv("WEXCH_WORKERS");
#ifdef _OPENMP
    if (workers != nullptr) omp_set_num_threads(std::max(1, std::atoi(workers)));
#else
    (void)workers;
#endif

    std::string config_path;
    std::uint64_t seed_offset = 0;
    std::string out_dir;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"check-conditions", "check_conditions"},
        {"verify", "verify"},
        {"lln", "lln"},
        {"zero-one", "zero_one"},
        {"recover", "recover"},
    };
    for (const auto& [cli_name, experiment] : commands) {
        CLI::App* sub = app.add_subcommand(cli_name, "run the " + cli_name + " experiment");
        sub->add_option("--config", config_path, "experiment config file (JSON)")->required();
        sub->add_option("--seed-offset", seed_offset, "added to every configured seed");
        sub->add_option("--out", out_dir, "directory for result JSON and CSV traces");
        sub->callback([&, experiment] {
            std::exit(run(experiment, config_path, seed_offset, out_dir));
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
