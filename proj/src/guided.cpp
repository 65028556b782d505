#include "lanefree/guided.hpp"

#include <stdexcept>

namespace lanefree {

std::uint64_t prediction_tree_size(int levels) {
    std::uint64_t total = 0, level_size = 1;
    for (int k = 0; k < levels; ++k) {
        total += level_size;
        level_size *= kNumActions;
    }
    return total;
}

std::vector<PlanningState> enumerate_prediction_tree(const PlanningState& root, int levels,
                                                     double dt, const RoadGeometry& road) {
    if (levels < 1) throw std::invalid_argument("levels must be >= 1");
    if (root.terminal) throw std::invalid_argument("root must not be terminal");
    std::vector<PlanningState> states;
    states.reserve(static_cast<std::size_t>(prediction_tree_size(levels)));
    states.push_back(root);
    std::size_t level_start = 0, level_size = 1;
    for (int level = 1; level < levels; ++level) {
        for (std::size_t i = level_start; i < level_start + level_size; ++i) {
            for (int a = 0; a < kNumActions; ++a) {
                // Copy rather than reference: push_back may reallocate.
                const PlanningState parent = states[i];
                states.push_back(parent.terminal ? parent
                                                 : simulate_transition(parent, a, dt, road));
            }
        }
        level_start += level_size;
        level_size *= kNumActions;
    }
    return states;
}

PredictionTable batch_predict(const MlpModel& model, const std::vector<PlanningState>& states,
                              int levels) {
    PredictionTable table;
    table.levels = levels;
    table.rows.reserve(states.size());
    for (const PlanningState& s : states) {
        const Eigen::VectorXd p = forward_one(model, to_eigen(vectorize_state(s)));
        std::array<double, kNumActions> row{};
        for (int i = 0; i < kNumActions; ++i) row[static_cast<std::size_t>(i)] = p[i];
        table.rows.push_back(row);
    }
    return table;
}

const double* prediction_for(SearchNode<PlanningState>& node, const PredictionTable& table,
                             const MlpModel& model, long* invocations) {
    if (table.contains(node.tree_index)) return table.row(node.tree_index).data();
    if (node.prior.empty()) {
        const Eigen::VectorXd p = forward_one(model, to_eigen(vectorize_state(node.state)));
        node.prior.assign(p.data(), p.data() + p.size());
        if (invocations != nullptr) *invocations += 1;
    }
    return node.prior.data();
}

GuidedResult plan_guided_search(const PlanningState& s, const PuctConfig& cfg,
                                const RewardParams& params, const RoadGeometry& road, double dt,
                                const MlpModel& model) {
    const std::vector<PlanningState> states =
        enumerate_prediction_tree(s, cfg.prediction_levels, dt, road);
    const PredictionTable table = batch_predict(model, states, cfg.prediction_levels);

    GuidedResult result;
    result.model_invocations = 1;

    auto prior_fn = [&](SearchNode<PlanningState>* node) -> const double* {
        return prediction_for(*node, table, model, &result.model_invocations);
    };

    TrafficProblem problem{road, dt, params};
    MctsConfig base = cfg.base;
    base.exploration = cfg.c_b;
    result.search = mcts_search(problem, s, base, cfg.c_pb, prior_fn);
    result.action = result.search.action;
    return result;
}

}  // namespace lanefree
