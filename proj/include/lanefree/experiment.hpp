#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanefree/env.hpp"
#include "lanefree/guided.hpp"
#include "lanefree/mcts.hpp"
#include "lanefree/mlp.hpp"
#include "lanefree/reward.hpp"

namespace lanefree {

enum class Algorithm { Mcts, MctsNudging, NnMcts, Nn };

std::string algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(const std::string& name);

/// Builds the per-vehicle policy for one episode. `model` must be
/// non-null for the NN-backed algorithms. Front-only observation is
/// implied by Algorithm::Mcts; everything else is isotropic.
Planner make_planner(Algorithm algorithm, const EnvConfig& env_cfg, const MctsConfig& mcts_cfg,
                     const PuctConfig& puct_cfg, const RewardParams& reward,
                     const MlpModel* model);

bool algorithm_is_isotropic(Algorithm a);
bool algorithm_needs_model(Algorithm a);

struct ExperimentPlan {
    std::vector<Algorithm> algorithms{Algorithm::MctsNudging};
    std::vector<double> flows{5400.0};
    std::vector<int> iteration_grid{30, 50, 100, 200, 500, 750, 1000};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    EnvConfig env;
    RewardParams reward;
    MctsConfig mcts;
    PuctConfig puct;
    std::string model_path;  // required when an NN variant is planned
};

struct ResultRow {
    std::string algorithm;
    double flow = 0.0;
    int iterations = 0;
    std::uint64_t seed = 0;
    long collisions = 0;
    double speed_average = 0.0;
    double delay_average = 0.0;
    long vehicles_entered = 0;
    long vehicles_exited = 0;
    double wall_clock_s = 0.0;
    bool failed = false;
    std::string error;
};

/// One episode of one grid cell.
ResultRow run_cell(Algorithm algorithm, double flow, int iterations, std::uint64_t seed,
                   const ExperimentPlan& plan, const MlpModel* model);

struct ExperimentOutcome {
    int episodes_run = 0;
    int episodes_skipped = 0;  // already present in the raw file
    int episodes_failed = 0;
};

/// Runs the full grid, appending to `raw_path` (resumable: present
/// (algorithm, flow, iterations, seed) keys are skipped) and rewriting
/// the aggregate mean/SD table at `aggregate_path`.
ExperimentOutcome run_experiment(const ExperimentPlan& plan, const std::string& raw_path,
                                 const std::string& aggregate_path);

std::vector<ResultRow> load_results(const std::string& raw_path);
void write_aggregate(const std::string& path, const std::vector<ResultRow>& rows);

}  // namespace lanefree
