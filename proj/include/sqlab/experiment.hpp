#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sqlab/embedder.hpp"
#include "sqlab/serialize.hpp"

namespace sqlab {

/// Malformed or inconsistent configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitBar = 3, kExitIo = 4 };

struct ExperimentConfig {
    Json raw;
    std::size_t trials = 1;
    std::uint64_t master_seed = 0;
    std::string out_dir = ".";
    PipelineMode mode = PipelineMode::dense_surrogate;

    /// Parses a config document; throws ConfigError.
    static ExperimentConfig parse(const Json& doc);
    static ExperimentConfig load(const std::string& path);

    /// The command block (`raw[command]`), or an empty object.
    const Json& block(const std::string& command) const;
    /// seed for trial i: derive_seed(master_seed, i)
    std::uint64_t trial_seed(std::size_t i) const;
};

struct CommandOutcome {
    int exit_code = kExitOk;
    std::vector<std::string> files;  // written outputs
    std::string csv;                 // main CSV text, if any
    Json summary;
};

CommandOutcome cmd_generate(const ExperimentConfig& cfg);
CommandOutcome cmd_attack(const ExperimentConfig& cfg);
CommandOutcome cmd_search(const ExperimentConfig& cfg);
CommandOutcome cmd_pipeline(const ExperimentConfig& cfg);
CommandOutcome cmd_measure(const ExperimentConfig& cfg);
CommandOutcome cmd_prune(const ExperimentConfig& cfg);

/// Dispatches by name; unknown names throw ConfigError.
CommandOutcome run_command(const std::string& command, const ExperimentConfig& cfg);

/// Graph described by a source block, e.g. {"kind":"gnp","n":[6,12],"p":[0.3,0.5]}.
/// Ranges and lists are resolved from `seed`; the chosen n and p are returned.
struct GraphDraw {
    Graph graph;
    std::size_t n = 0;
    std::optional<double> p;
};
GraphDraw draw_graph(const Json& source, std::uint64_t seed);

/// Drops the named column from CSV text (used to compare runs without wall time).
std::string csv_without_column(const std::string& csv, const std::string& column);

}  // namespace sqlab
