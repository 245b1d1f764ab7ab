#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "medn/agent.hpp"
#include "medn/config.hpp"

namespace medn {

// Per-seed artifacts written by run_train into <output_dir>/seed_<n>/.
struct SeedArtifacts {
    std::uint64_t seed = 0;
    std::filesystem::path directory;
    std::filesystem::path stats;       // stats.csv
    std::filesystem::path checkpoint;  // checkpoint.bin
    std::filesystem::path config;      // config.json (resolved, single seed)
    std::filesystem::path evaluation;  // eval.json
    EvalResult final_evaluation;
};

// stats.csv header row.
inline constexpr const char* kStatsHeader =
    "step,episode_return,loss,entropy,epsilon,episode_end,updated";

void write_stats_row(std::ostream& out, const TrainStats& stats);
std::vector<TrainStats> read_stats(const std::filesystem::path& path);

// Trains, checkpoints and evaluates one seed of the config.
SeedArtifacts train_seed(const RunConfig& config, std::uint64_t seed,
                         const std::filesystem::path& directory);

// One training run per seed (seeds may run concurrently; results do not
// depend on scheduling).
std::vector<SeedArtifacts> run_train(const RunConfig& config, unsigned jobs = 0);

EvalResult read_evaluation(const std::filesystem::path& eval_json);
void write_evaluation(const std::filesystem::path& eval_json, const EvalResult& result);

// Evaluates a checkpoint. The default seed is the one a training run uses
// for its final evaluation.
EvalResult run_eval(const std::filesystem::path& checkpoint, const std::string& env_name,
                    std::size_t episodes, double epsilon);

// Methods x environments score table.
struct ComparisonTable {
    struct Cell {
        double mean = 0.0;
        double std = 0.0;  // population std over per-seed mean returns
        std::vector<double> seed_means;
    };

    std::vector<std::string> methods;
    std::vector<std::string> envs;
    std::vector<std::uint64_t> seeds;
    // cells[m][e]
    std::vector<std::vector<Cell>> cells;

    // Row index of the best mean in column e (lowest index on ties).
    std::size_t winner(std::size_t env) const;

    std::string markdown() const;
    std::string csv() const;
};

// "ME" = dueling network + MaxEnt loss, "DN" = dueling network + DQN loss.
RunConfig method_config(const RunConfig& base, const std::string& method, const std::string& env);

// Trains every method on every env and seed under
// <output_dir>/<env>/<method>/seed_<n>/, then builds the table by reading
// the per-seed eval.json files back. Writes table.md and table.csv.
ComparisonTable run_compare(const RunConfig& base, unsigned jobs = 0);

// Rebuilds the table from artifacts already on disk.
ComparisonTable table_from_artifacts(const std::filesystem::path& output_dir,
                                     const std::vector<std::string>& methods,
                                     const std::vector<std::string>& envs,
                                     const std::vector<std::uint64_t>& seeds);

// Mean of the logged entropy over the first `fraction` of a stats file.
double early_mean_entropy(const std::vector<TrainStats>& stats, double fraction);

// Value-iteration dump for a tabular environment (text, one state per line).
std::string run_oracle(const std::string& env_name, double gamma, double tol);

} // namespace medn
