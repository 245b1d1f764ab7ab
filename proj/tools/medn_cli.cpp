// medn: train, evaluate and compare dueling Q-network agents on the bundled
// toy environments.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "medn/config.hpp"
#include "medn/errors.hpp"
#include "medn/harness.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool quiet = false;
    unsigned jobs = 0;
};

medn::RunConfig resolve(const CommonOptions& opts) {
    medn::RunConfig config = medn::load_run_config(opts.config_path);
    if (opts.seed) {
        config.seeds = {*opts.seed};
    }
    if (!opts.out.empty()) {
        config.output_dir = opts.out;
    }
    config.validate();
    return config;
}

void print_eval(const medn::EvalResult& r) {
    std::printf("mean %.6f std %.6f over %zu episodes\n", r.mean, r.std, r.returns.size());
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dueling Q-network training with an advantage-entropy loss"};
    app.require_subcommand(1);

    CommonOptions train_opts;
    auto* train = app.add_subcommand("train", "train one agent per seed");
    train->add_option("--config", train_opts.config_path, "run configuration (JSON)")->required();
    train->add_option("--seed", train_opts.seed, "train only this seed");
    train->add_option("--out", train_opts.out, "output directory override");
    train->add_option("--jobs", train_opts.jobs, "parallel seeds (0 = all cores)");
    train->add_flag("--quiet", train_opts.quiet, "suppress progress output");

    CommonOptions compare_opts;
    std::vector<std::string> methods;
    auto* compare = app.add_subcommand("compare", "train ME and DN on every seed and tabulate");
    compare->add_option("--config", compare_opts.config_path, "run configuration (JSON)")->required();
    compare->add_option("--methods", methods, "method labels (ME, DN)")->delimiter(',');
    compare->add_option("--out", compare_opts.out, "output directory override");
    compare->add_option("--jobs", compare_opts.jobs, "parallel runs (0 = all cores)");
    compare->add_flag("--quiet", compare_opts.quiet, "suppress the printed table");

    std::string checkpoint;
    std::string eval_env;
    std::size_t episodes = 10;
    double eval_epsilon = 0.01;
    std::string eval_out;
    bool eval_quiet = false;
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
    eval->add_option("--env", eval_env, "environment name")->required();
    eval->add_option("--episodes", episodes, "episodes to run")->check(CLI::PositiveNumber);
    eval->add_option("--epsilon", eval_epsilon, "exploration rate during evaluation")
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--out", eval_out, "write eval.json into this directory");
    eval->add_flag("--quiet", eval_quiet, "suppress printed statistics");

    std::string oracle_env;
    double gamma = 0.99;
    double tol = 1e-10;
    std::string oracle_out;
    auto* oracle = app.add_subcommand("oracle", "dump value-iteration V*/Q* for a tabular env");
    oracle->add_option("--env", oracle_env, "environment name")->required();
    oracle->add_option("--gamma", gamma, "discount");
    oracle->add_option("--tol", tol, "sup-norm stopping tolerance");
    oracle->add_option("--out", oracle_out, "write oracle.csv into this directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*train) {
            const medn::RunConfig config = resolve(train_opts);
            const auto runs = medn::run_train(config, train_opts.jobs);
            if (!train_opts.quiet) {
                for (const auto& r : runs) {
                    std::printf("seed %llu -> %s: ", static_cast<unsigned long long>(r.seed),
                                r.directory.string().c_str());
                    print_eval(r.final_evaluation);
                }
            }
        } else if (*compare) {
            medn::RunConfig config = resolve(compare_opts);
            if (!methods.empty()) {
                config.compare_methods = methods;
                config.validate();
            }
            const auto table = medn::run_compare(config, compare_opts.jobs);
            if (!compare_opts.quiet) {
                std::cout << table.markdown();
            }
        } else if (*eval) {
            const auto result = medn::run_eval(checkpoint, eval_env, episodes, eval_epsilon);
            if (!eval_out.empty()) {
                std::filesystem::create_directories(eval_out);
                medn::write_evaluation(std::filesystem::path(eval_out) / "eval.json", result);
            }
            if (!eval_quiet) {
                print_eval(result);
            }
        } else if (*oracle) {
            const std::string text = medn::run_oracle(oracle_env, gamma, tol);
            if (!oracle_out.empty()) {
                std::filesystem::create_directories(oracle_out);
                std::ofstream(std::filesystem::path(oracle_out) / "oracle.csv") << text;
            }
            std::cout << text;
        }
    } catch (const medn::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kExitValidation;
    } catch (const medn::ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
