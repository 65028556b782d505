#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "lanefree/features.hpp"
#include "lanefree/mcts.hpp"
#include "lanefree/mlp.hpp"

namespace lanefree {

struct PuctConfig {
    double c_b = std::sqrt(2.0);
    double c_pb = 4.0;
    int prediction_levels = 3;  // 241 pre-predicted nodes
    MctsConfig base;
};

/// Prior vectors for the breadth-first enumeration of the complete
/// 15-ary action tree. The child of node n under action a sits at
/// index n*15 + a + 1.
struct PredictionTable {
    int levels = 0;
    std::vector<std::array<double, kNumActions>> rows;

    bool contains(std::uint64_t index) const { return index < rows.size(); }
    const std::array<double, kNumActions>& row(std::uint64_t index) const {
        return rows[static_cast<std::size_t>(index)];
    }
};

/// Node count of a complete 15-ary tree with `levels` levels:
/// 1, 16, 241, 3616, ...
std::uint64_t prediction_tree_size(int levels);

/// Breadth-first enumeration of all states reachable within levels-1
/// transitions. Terminal states fill their descendants' slots with
/// themselves so the closed-form index map holds.
std::vector<PlanningState> enumerate_prediction_tree(const PlanningState& root, int levels,
                                                     double dt, const RoadGeometry& road);

/// One batched inference pass over the enumerated states.
PredictionTable batch_predict(const MlpModel& model, const std::vector<PlanningState>& states,
                              int levels);

/// Prior vector for a search node: the table row when the node's
/// enumeration index is covered, otherwise a single prediction memoized
/// on the node. `invocations`, when given, counts model calls.
const double* prediction_for(SearchNode<PlanningState>& node, const PredictionTable& table,
                             const MlpModel& model, long* invocations = nullptr);

struct GuidedResult {
    int action = 0;
    long model_invocations = 0;  // batch pass counts as one
    SearchResult search;
};

/// PUCT search with priors from the precomputed table; nodes beyond the
/// table get a single memoized prediction each.
GuidedResult plan_guided_search(const PlanningState& s, const PuctConfig& cfg,
                                const RewardParams& params, const RoadGeometry& road, double dt,
                                const MlpModel& model);

inline int plan_guided(const PlanningState& s, const PuctConfig& cfg, const RewardParams& params,
                       const RoadGeometry& road, double dt, const MlpModel& model) {
    return plan_guided_search(s, cfg, params, road, dt, model).action;
}

}  // namespace lanefree
