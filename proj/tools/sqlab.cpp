#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sqlab/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"square-path experiment harness"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;

    const std::pair<const char*, const char*> commands[] = {
        {"generate", "write one G(n,p) graph"},
        {"attack", "apply an adversary to a graph and report the damage"},
        {"search", "square path / cycle search campaign"},
        {"pipeline", "end-to-end square cycle embedding campaign"},
        {"measure", "triangle, expansion and path-count statistics"},
        {"prune", "pruning campaign on random chains"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--trials", trials, "override trial count");
        sub->add_option("--seed", seed, "override master seed");
        sub->add_option("--out", out_dir, "override output directory");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : sqlab::kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        auto cfg = sqlab::ExperimentConfig::load(config_path);
        if (trials) cfg.trials = *trials;
        if (seed) cfg.master_seed = *seed;
        if (out_dir) cfg.out_dir = *out_dir;
        const auto outcome = sqlab::run_command(command, cfg);
        for (const auto& f : outcome.files) std::cout << "wrote " << f << '\n';
        if (!outcome.summary.is_null()) std::cout << outcome.summary.dump(2) << '\n';
        if (outcome.exit_code == sqlab::kExitBar) std::cerr << "sqlab: acceptance bar not met\n";
        return outcome.exit_code;
    } catch (const sqlab::ConfigError& e) {
        std::cerr << "sqlab: config error: " << e.what() << '\n';
        return sqlab::kExitConfig;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "sqlab: i/o error: " << e.what() << '\n';
        return sqlab::kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "sqlab: i/o error: " << e.what() << '\n';
        return sqlab::kExitIo;
    } catch (const sqlab::GraphFormatError& e) {
        std::cerr << "sqlab: i/o error: " << e.what() << '\n';
        return sqlab::kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "sqlab: config error: " << e.what() << '\n';
        return sqlab::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "sqlab: " << e.what() << '\n';
        return 1;
    }
}
