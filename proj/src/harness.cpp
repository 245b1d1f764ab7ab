#include "medn/harness.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "medn/checkpoint.hpp"
#include "medn/errors.hpp"

namespace medn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << text;
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

// Runs tasks on up to `jobs` threads; rethrows the first failure.
template <typename Task>
void run_parallel(std::size_t count, unsigned jobs, Task task) {
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    workers.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

fs::path seed_directory(const fs::path& root, std::uint64_t seed) {
    return root / ("seed_" + std::to_string(seed));
}

} // namespace

void write_stats_row(std::ostream& out, const TrainStats& s) {
    out << s.step << ',' << fmt17(s.episode_return) << ',' << fmt17(s.loss_value) << ','
        << fmt17(s.mean_entropy) << ',' << fmt17(s.epsilon) << ',' << (s.episode_end ? 1 : 0)
        << ',' << (s.updated ? 1 : 0) << '\n';
}

std::vector<TrainStats> read_stats(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    if (!std::getline(in, line) || line != kStatsHeader) {
        throw FormatError("stats file '" + path.string() + "' lacks the expected header");
    }
    std::vector<TrainStats> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        TrainStats s;
        char c1, c2, c3, c4, c5, c6;
        int end = 0;
        int updated = 0;
        if (!(fields >> s.step >> c1 >> s.episode_return >> c2 >> s.loss_value >> c3 >>
              s.mean_entropy >> c4 >> s.epsilon >> c5 >> end >> c6 >> updated)) {
            throw FormatError("stats file '" + path.string() + "': malformed row '" + line + "'");
        }
        s.episode_end = end != 0;
        s.updated = updated != 0;
        rows.push_back(s);
    }
    return rows;
}

void write_evaluation(const fs::path& eval_json, const EvalResult& result) {
    const json j{{"returns", result.returns}, {"mean", result.mean}, {"std", result.std}};
    write_text(eval_json, j.dump(2) + "\n");
}

EvalResult read_evaluation(const fs::path& eval_json) {
    try {
        const json j = json::parse(read_text(eval_json));
        EvalResult r;
        r.returns = j.at("returns").get<std::vector<double>>();
        r.mean = j.at("mean").get<double>();
        r.std = j.at("std").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw FormatError("evaluation file '" + eval_json.string() + "': " + e.what());
    }
}

SeedArtifacts train_seed(const RunConfig& config, std::uint64_t seed, const fs::path& directory) {
    ensure_directory(directory);
    SeedArtifacts art;
    art.seed = seed;
    art.directory = directory;
    art.stats = directory / "stats.csv";
    art.checkpoint = directory / "checkpoint.bin";
    art.config = directory / "config.json";
    art.evaluation = directory / "eval.json";

    RunConfig resolved = config;
    resolved.seeds = {seed};
    write_text(art.config, dump_run_config(resolved));

    Agent agent(config.agent, config.network, config.optimizer,
                make_environment(config.env_name), seed);
    std::ostringstream stats;
    stats << kStatsHeader << '\n';
    for (std::uint64_t t = 0; t < config.total_steps; ++t) {
        write_stats_row(stats, agent.train_step());
    }
    write_text(art.stats, stats.str());
    save_checkpoint(art.checkpoint, agent.online());

    const auto env = make_environment(config.env_name);
    art.final_evaluation = evaluate(agent.online(), *env, config.eval_episodes,
                                    config.eval_epsilon, evaluation_seed(agent.online()));
    write_evaluation(art.evaluation, art.final_evaluation);
    return art;
}

std::vector<SeedArtifacts> run_train(const RunConfig& config, unsigned jobs) {
    config.validate();
    ensure_directory(config.output_dir);
    std::vector<SeedArtifacts> out(config.seeds.size());
    run_parallel(config.seeds.size(), jobs, [&](std::size_t i) {
        out[i] = train_seed(config, config.seeds[i], seed_directory(config.output_dir, config.seeds[i]));
    });
    return out;
}

EvalResult run_eval(const fs::path& checkpoint, const std::string& env_name, std::size_t episodes,
                    double epsilon) {
    const QNetwork network = load_checkpoint(checkpoint);
    const auto env = make_environment(env_name);
    return evaluate(network, *env, episodes, epsilon, evaluation_seed(network));
}

std::size_t ComparisonTable::winner(std::size_t env) const {
    std::size_t best = 0;
    for (std::size_t m = 1; m < methods.size(); ++m) {
        if (cells[m][env].mean > cells[best][env].mean) {
            best = m;
        }
    }
    return best;
}

std::string ComparisonTable::markdown() const {
    std::ostringstream out;
    out << "| Methods |";
    for (const auto& e : envs) {
        out << ' ' << e << " |";
    }
    out << "\n|:---:|";
    for (std::size_t e = 0; e < envs.size(); ++e) {
        out << ":---:|";
    }
    out << '\n';
    char buf[96];
    for (std::size_t m = 0; m < methods.size(); ++m) {
        out << "| " << methods[m] << " |";
        for (std::size_t e = 0; e < envs.size(); ++e) {
            std::snprintf(buf, sizeof buf, "%.2f ± %.2f", cells[m][e].mean, cells[m][e].std);
            if (winner(e) == m) {
                out << " **" << buf << "** |";
            } else {
                out << ' ' << buf << " |";
            }
        }
        out << '\n';
    }
    out << "\nMean ± std of per-seed evaluation returns over " << seeds.size() << " seeds; best per column in bold.\n";
    return out.str();
}

std::string ComparisonTable::csv() const {
    std::ostringstream out;
    out << "method,env,mean,std,seeds,winner\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (std::size_t e = 0; e < envs.size(); ++e) {
            out << methods[m] << ',' << envs[e] << ',' << fmt17(cells[m][e].mean) << ','
                << fmt17(cells[m][e].std) << ',' << seeds.size() << ','
                << (winner(e) == m ? 1 : 0) << '\n';
        }
    }
    return out.str();
}

RunConfig method_config(const RunConfig& base, const std::string& method, const std::string& env) {
    RunConfig c = base;
    c.env_name = env;
    c.network.architecture = Architecture::Dueling;
    if (method == "ME") {
        c.agent.loss = LossKind::MaxEnt;
    } else if (method == "DN") {
        c.agent.loss = LossKind::Dqn;
    } else {
        throw ConfigError({"compare.methods entry '" + method + "' is not a known method (ME, DN)"});
    }
    c.output_dir = base.output_dir / env / method;
    return c;
}

ComparisonTable table_from_artifacts(const fs::path& output_dir,
                                     const std::vector<std::string>& methods,
                                     const std::vector<std::string>& envs,
                                     const std::vector<std::uint64_t>& seeds) {
    ComparisonTable table;
    table.methods = methods;
    table.envs = envs;
    table.seeds = seeds;
    table.cells.assign(methods.size(), std::vector<ComparisonTable::Cell>(envs.size()));
    for (std::size_t m = 0; m < methods.size(); ++m) {
        for (std::size_t e = 0; e < envs.size(); ++e) {
            auto& cell = table.cells[m][e];
            for (std::uint64_t seed : seeds) {
                const fs::path dir = seed_directory(output_dir / envs[e] / methods[m], seed);
                cell.seed_means.push_back(read_evaluation(dir / "eval.json").mean);
            }
            double sum = 0.0;
            for (double v : cell.seed_means) {
                sum += v;
            }
            cell.mean = sum / static_cast<double>(cell.seed_means.size());
            double sq = 0.0;
            for (double v : cell.seed_means) {
                sq += (v - cell.mean) * (v - cell.mean);
            }
            cell.std = std::sqrt(sq / static_cast<double>(cell.seed_means.size()));
        }
    }
    return table;
}

double early_mean_entropy(const std::vector<TrainStats>& stats, double fraction) {
    const auto count = static_cast<std::size_t>(static_cast<double>(stats.size()) * fraction);
    if (count == 0) {
        throw ContractError("early_mean_entropy: window is empty");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        sum += stats[i].mean_entropy;
    }
    return sum / static_cast<double>(count);
}

ComparisonTable run_compare(const RunConfig& base, unsigned jobs) {
    base.validate();
    std::vector<std::string> violations;
    if (base.compare_methods.size() < 2) {
        violations.emplace_back("compare.methods needs at least 2 methods");
    }
    if (base.seeds.size() < 3) {
        violations.emplace_back("seeds needs at least 3 entries for compare");
    }
    if (!violations.empty()) {
        throw ConfigError(std::move(violations));
    }
    const std::vector<std::string> envs =
        base.compare_envs.empty() ? std::vector<std::string>{base.env_name} : base.compare_envs;

    struct Job {
        RunConfig config;
        std::uint64_t seed;
    };
    std::vector<Job> work;
    for (const auto& env : envs) {
        for (const auto& method : base.compare_methods) {
            const RunConfig c = method_config(base, method, env);
            c.validate();
            for (std::uint64_t seed : base.seeds) {
                work.push_back({c, seed});
            }
        }
    }
    ensure_directory(base.output_dir);
    run_parallel(work.size(), jobs, [&](std::size_t i) {
        train_seed(work[i].config, work[i].seed,
                   seed_directory(work[i].config.output_dir, work[i].seed));
    });

    ComparisonTable table =
        table_from_artifacts(base.output_dir, base.compare_methods, envs, base.seeds);
    write_text(base.output_dir / "table.md", table.markdown());
    write_text(base.output_dir / "table.csv", table.csv());

    std::ostringstream exploration;
    exploration << "method,env,seed,early_entropy\n";
    for (const auto& env : envs) {
        for (const auto& method : base.compare_methods) {
            for (std::uint64_t seed : base.seeds) {
                const auto stats =
                    read_stats(seed_directory(base.output_dir / env / method, seed) / "stats.csv");
                exploration << method << ',' << env << ',' << seed << ','
                            << fmt17(early_mean_entropy(stats, 0.1)) << '\n';
            }
        }
    }
    write_text(base.output_dir / "exploration.csv", exploration.str());
    return table;
}

std::string run_oracle(const std::string& env_name, double gamma, double tol) {
    const auto env = make_environment(env_name);
    const auto mdp = env->tabular();
    if (!mdp) {
        throw ContractError("oracle: environment '" + env_name + "' has no tabular model");
    }
    const ValueIterationResult vi = value_iteration(*mdp, gamma, tol);
    const auto policy = greedy_policy(*mdp, vi.q);
    std::ostringstream out;
    char head[96];
    std::snprintf(head, sizeof head, " gamma=%.10g tol=%.3g", gamma, tol);
    out << "# value iteration env=" << env_name << head
        << " sweeps=" << vi.sweep_deltas.size() << '\n';
    out << "state,terminal,V";
    for (std::size_t a = 0; a < mdp->n_actions; ++a) {
        out << ",Q" << a;
    }
    out << ",greedy\n";
    for (std::size_t s = 0; s < mdp->n_states; ++s) {
        out << s << ',' << (mdp->terminal[s] ? 1 : 0) << ',' << fmt17(vi.values[s]);
        for (std::size_t a = 0; a < mdp->n_actions; ++a) {
            out << ',' << fmt17(vi.q.at(s, a));
        }
        out << ',' << policy[s] << '\n';
    }
    return out.str();
}

} // namespace medn
