#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lanefree/calibration.hpp"
#include "lanefree/config.hpp"
#include "lanefree/selfplay.hpp"

namespace {

using namespace lanefree;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;
constexpr int kExitPartialGrid = 3;

struct CommonFlags {
    std::string config_path;
    std::optional<double> flow;
    std::optional<int> iterations;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::optional<int> rollout_depth;
    std::string model_path;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (see `config` command)");
    cmd->add_option("--flow", flags.flow, "demand flow, veh/h");
    cmd->add_option("--iterations", flags.iterations, "search iterations per decision");
    cmd->add_option("--seed", flags.seed, "environment seed");
    cmd->add_option("--duration", flags.duration, "episode duration, s");
    cmd->add_option("--rollout-depth", flags.rollout_depth, "max total search depth");
    cmd->add_option("--model", flags.model_path, "trained model file");
}

AppConfig resolve_config(const CommonFlags& flags) {
    AppConfig cfg;
    std::string path = flags.config_path;
    if (path.empty()) {
        if (const char* env_path = std::getenv("LANEFREE_CONFIG")) path = env_path;
    }
    if (!path.empty()) {
        try {
            cfg = load_config(path);
        } catch (const std::exception& e) {
            throw std::invalid_argument(e.what());
        }
    }
    if (flags.flow) cfg.plan.env.demand_flow = *flags.flow;
    if (flags.iterations) {
        cfg.plan.mcts.iterations = *flags.iterations;
        cfg.plan.iteration_grid = {*flags.iterations};
    }
    if (flags.seed) {
        cfg.plan.env.seed = *flags.seed;
        cfg.plan.seeds = {*flags.seed};
    }
    if (flags.duration) cfg.plan.env.sim_duration = *flags.duration;
    if (flags.rollout_depth) {
        cfg.plan.mcts.max_rollout_depth = *flags.rollout_depth;
        cfg.plan.puct.base.max_rollout_depth = *flags.rollout_depth;
    }
    if (!flags.model_path.empty()) cfg.plan.model_path = flags.model_path;
    cfg.plan.puct.base.iterations = cfg.plan.mcts.iterations;
    cfg.plan.puct.base.min_visits = cfg.plan.mcts.min_visits;
    cfg.plan.puct.base.max_rollout_depth = cfg.plan.mcts.max_rollout_depth;
    return cfg;
}

int cmd_simulate(const CommonFlags& flags, const std::string& algorithm_name_arg,
                 const std::string& trajectory_out, const std::vector<int>& ids) {
    const auto algorithm = parse_algorithm(algorithm_name_arg);
    if (!algorithm) {
        std::fprintf(stderr, "unknown algorithm: %s\n", algorithm_name_arg.c_str());
        return kExitConfigError;
    }
    AppConfig cfg = resolve_config(flags);
    MlpModel model;
    if (algorithm_needs_model(*algorithm)) {
        if (cfg.plan.model_path.empty()) {
            std::fprintf(stderr, "algorithm %s requires --model\n", algorithm_name_arg.c_str());
            return kExitConfigError;
        }
        model = load_model(cfg.plan.model_path);
    }

    Env env(cfg.plan.env);
    const Planner planner =
        make_planner(*algorithm, cfg.plan.env, cfg.plan.mcts, cfg.plan.puct, cfg.plan.reward,
                     algorithm_needs_model(*algorithm) ? &model : nullptr);
    RunOptions options;
    options.isotropic = algorithm_is_isotropic(*algorithm);
    std::vector<TrajectoryRow> trajectory;
    if (!trajectory_out.empty()) {
        options.log_ids = &ids;
        options.trajectory = &trajectory;
    }
    const EpisodeMetrics m = run_episode(env, planner, cfg.plan.env.sim_duration, options);
    if (!trajectory_out.empty()) write_trajectory_log(trajectory_out, trajectory);

    std::printf("algorithm=%s flow=%g iterations=%d seed=%llu\n", algorithm_name_arg.c_str(),
                cfg.plan.env.demand_flow, cfg.plan.mcts.iterations,
                static_cast<unsigned long long>(cfg.plan.env.seed));
    std::printf("collisions=%ld speed_average=%.6g delay_average=%.6g entered=%ld exited=%ld\n",
                m.collisions, m.speed_average, m.delay_average, m.vehicles_entered,
                m.vehicles_exited);
    return kExitOk;
}

int cmd_collect(const CommonFlags& flags, std::size_t rows_target, const std::string& out_path) {
    AppConfig cfg = resolve_config(flags);
    MctsConfig mcts = cfg.plan.mcts;
    mcts.isotropic = true;
    const std::vector<DatasetRow> rows =
        collect_selfplay(cfg.plan.env, mcts, cfg.plan.reward, rows_target);
    save_dataset(out_path, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return kExitOk;
}

int cmd_train(const CommonFlags& flags, const std::string& dataset_path,
              const std::string& model_out) {
    AppConfig cfg = resolve_config(flags);
    if (flags.seed) cfg.train.seed = *flags.seed;
    const std::vector<DatasetRow> rows = load_dataset(dataset_path);
    cfg.train.verbose = true;
    TrainReport report;
    const MlpModel model = train(to_train_samples(rows), kPolicyWidths, cfg.train, &report);
    save_model(model_out, model);
    std::printf("final validation accuracy: %.4f\nmodel written to %s\n",
                report.final_validation_accuracy, model_out.c_str());
    return kExitOk;
}

int cmd_calibrate(const std::string& model_path, const std::string& dataset_path,
                  const std::string& out_path) {
    const MlpModel model = load_model(model_path);
    const std::vector<DatasetRow> rows = load_dataset(dataset_path);
    const CalibrationReport report = reliability_report(model, rows);
    write_calibration_report(out_path, report);
    std::printf("ece=%.6f top1_accuracy=%.6f total=%ld\nreport written to %s\n", report.ece,
                report.top1_accuracy, report.total, out_path.c_str());
    return kExitOk;
}

int cmd_experiment(const CommonFlags& flags, const std::vector<std::string>& algorithm_names,
                   const std::vector<double>& flows, const std::vector<int>& iterations,
                   const std::vector<std::uint64_t>& seeds, const std::string& out_path) {
    AppConfig cfg = resolve_config(flags);
    if (!algorithm_names.empty()) {
        cfg.plan.algorithms.clear();
        for (const std::string& name : algorithm_names) {
            const auto parsed = parse_algorithm(name);
            if (!parsed) {
                std::fprintf(stderr, "unknown algorithm: %s\n", name.c_str());
                return kExitConfigError;
            }
            cfg.plan.algorithms.push_back(*parsed);
        }
    }
    if (!flows.empty()) cfg.plan.flows = flows;
    if (!iterations.empty()) cfg.plan.iteration_grid = iterations;
    if (!seeds.empty()) cfg.plan.seeds = seeds;

    const std::string aggregate = out_path + ".aggregate.csv";
    const ExperimentOutcome outcome = run_experiment(cfg.plan, out_path, aggregate);
    std::printf("episodes run=%d skipped=%d failed=%d\nraw=%s\naggregate=%s\n",
                outcome.episodes_run, outcome.episodes_skipped, outcome.episodes_failed,
                out_path.c_str(), aggregate.c_str());
    return outcome.episodes_failed > 0 ? kExitPartialGrid : kExitOk;
}

int cmd_trajectories(const CommonFlags& flags, const std::string& algorithm_name_arg,
                     const std::vector<int>& ids, const std::string& out_path) {
    return cmd_simulate(flags, algorithm_name_arg, out_path, ids);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lane-free highway traffic simulation with MCTS planning"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string algorithm = "mcts-nudging";
    std::string out_path;
    std::string dataset_path;
    std::string model_out;
    std::string trajectory_out;
    std::vector<int> ids;
    std::size_t rows_target = 0;
    std::vector<std::string> algorithm_names;
    std::vector<double> flows;
    std::vector<int> iteration_list;
    std::vector<std::uint64_t> seed_list;

    CLI::App* simulate = app.add_subcommand("simulate", "run one episode and print metrics");
    add_common(simulate, flags);
    simulate->add_option("--algorithm", algorithm, "mcts | mcts-nudging | nn-mcts | nn");
    simulate->add_option("--trajectories", trajectory_out, "optional trajectory CSV output");
    simulate->add_option("--ids", ids, "vehicle ids to log");

    CLI::App* collect = app.add_subcommand("collect", "self-play dataset collection");
    add_common(collect, flags);
    collect->add_option("--rows", rows_target, "number of dataset rows")->required();
    collect->add_option("--out", out_path, "dataset CSV output path")->required();

    CLI::App* train_cmd = app.add_subcommand("train", "train the policy network");
    add_common(train_cmd, flags);
    train_cmd->add_option("--dataset", dataset_path, "dataset CSV")->required();
    train_cmd->add_option("--model-out", model_out, "model output path")->required();

    CLI::App* calibrate = app.add_subcommand("calibrate", "reliability diagram report");
    add_common(calibrate, flags);
    calibrate->add_option("--dataset", dataset_path, "dataset CSV")->required();
    calibrate->add_option("--out", out_path, "report output path")->required();

    CLI::App* experiment = app.add_subcommand("experiment", "run the sweep grid");
    add_common(experiment, flags);
    experiment->add_option("--algorithms", algorithm_names, "algorithms to sweep");
    experiment->add_option("--flows", flows, "demand flows to sweep");
    experiment->add_option("--iterations-list", iteration_list, "iteration counts to sweep");
    experiment->add_option("--seeds", seed_list, "seeds to sweep");
    experiment->add_option("--out", out_path, "raw results CSV path")->required();

    CLI::App* trajectories = app.add_subcommand("trajectories", "episode with trajectory export");
    add_common(trajectories, flags);
    trajectories->add_option("--algorithm", algorithm, "planner to use");
    trajectories->add_option("--ids", ids, "vehicle ids to log")->required();
    trajectories->add_option("--out", out_path, "trajectory CSV path")->required();

    CLI::App* config_cmd = app.add_subcommand("config", "print the default config document");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(flags, algorithm, trajectory_out, ids);
        if (collect->parsed()) return cmd_collect(flags, rows_target, out_path);
        if (train_cmd->parsed()) return cmd_train(flags, dataset_path, model_out);
        if (calibrate->parsed()) {
            if (flags.model_path.empty()) {
                std::fprintf(stderr, "calibrate requires --model\n");
                return kExitConfigError;
            }
            return cmd_calibrate(flags.model_path, dataset_path, out_path);
        }
        if (experiment->parsed()) {
            return cmd_experiment(flags, algorithm_names, flows, iteration_list, seed_list,
                                  out_path);
        }
        if (trajectories->parsed()) return cmd_trajectories(flags, algorithm, ids, out_path);
        if (config_cmd->parsed()) {
            std::printf("%s\n", default_config_json().c_str());
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    }
    return kExitConfigError;
}
