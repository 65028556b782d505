#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "lanefree/reward.hpp"
#include "lanefree/types.hpp"

namespace lanefree {

struct MctsConfig {
    int iterations = 200;
    double exploration = std::sqrt(2.0);  // C in the UCT formula
    int min_visits = 5;                   // leaf visits required before expansion
    int max_rollout_depth = 6;            // cap on total depth below the root
    bool isotropic = true;                // observe tailing vehicles too
    std::uint64_t seed = 0;
};

/// UCT over per-action statistics. Unvisited actions are taken first,
/// lowest index first; otherwise ties break toward the lowest index.
inline int select_uct(int node_visits, std::span<const int> counts,
                      std::span<const double> values, double exploration) {
    for (std::size_t a = 0; a < counts.size(); ++a) {
        if (counts[a] == 0) return static_cast<int>(a);
    }
    const double log_n = std::log(static_cast<double>(node_visits));
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < counts.size(); ++a) {
        const double score = values[a] + exploration * std::sqrt(log_n / counts[a]);
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(a);
        }
    }
    return best;
}

/// PUCT selection: UCT plus the prior term C_pb * P(s,a) / (N(s,a)+1).
/// Unvisited actions have an infinite exploration term; ties among them
/// break toward the highest prior, then the lowest index.
inline int select_puct(int node_visits, std::span<const int> counts,
                       std::span<const double> values, std::span<const double> prior,
                       double c_b, double c_pb) {
    int best_unvisited = -1;
    for (std::size_t a = 0; a < counts.size(); ++a) {
        if (counts[a] == 0 &&
            (best_unvisited < 0 || prior[a] > prior[static_cast<std::size_t>(best_unvisited)])) {
            best_unvisited = static_cast<int>(a);
        }
    }
    if (best_unvisited >= 0) return best_unvisited;
    const double log_n = std::log(static_cast<double>(node_visits));
    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < counts.size(); ++a) {
        const double score = values[a] + c_b * std::sqrt(log_n / counts[a]) +
                             c_pb * prior[a] / (counts[a] + 1);
        if (score > best_score) {
            best_score = score;
            best = static_cast<int>(a);
        }
    }
    return best;
}

template <class State>
struct SearchNode {
    State state;
    std::uint64_t tree_index = 0;  // breadth-first index in the complete action tree
    bool terminal = false;
    int visits = 0;
    int expanded_count = 0;
    std::vector<std::unique_ptr<SearchNode>> children;
    std::vector<int> action_counts;
    std::vector<double> action_values;
    std::vector<double> prior;  // memoized when a guided search needs it

    SearchNode(State s, std::uint64_t index, bool term, int num_actions)
        : state(std::move(s)),
          tree_index(index),
          terminal(term),
          children(static_cast<std::size_t>(num_actions)),
          action_counts(static_cast<std::size_t>(num_actions), 0),
          action_values(static_cast<std::size_t>(num_actions), 0.0) {}
};

template <class State>
using SearchPath = std::vector<std::pair<SearchNode<State>*, int>>;

/// Running-mean update of Q and counts along the traversed path.
template <class State>
void backpropagate(const SearchPath<State>& path, double value) {
    for (const auto& [node, action] : path) {
        node->visits += 1;
        const auto a = static_cast<std::size_t>(action);
        node->action_counts[a] += 1;
        node->action_values[a] +=
            (value - node->action_values[a]) / node->action_counts[a];
    }
}

struct SearchResult {
    int action = 0;
    std::vector<int> root_counts;
    std::vector<double> root_values;
    long model_invocations = 0;  // filled by the guided variant
};

/// Core MCTS loop shared by the plain and NN-guided planners.
///
/// Problem requirements:
///   State; int num_actions(); State apply(const State&, int action);
///   bool is_terminal(const State&); int depth(const State&);
///   double evaluate(const State&, bool collided);
///
/// `prior_fn` maps a node to its 15-entry prior vector (or nullptr for
/// the unguided search, in which case plain UCT is used).
template <class Problem, class PriorFn>
SearchResult mcts_search(const Problem& problem, const typename Problem::State& root_state,
                         const MctsConfig& cfg, double c_pb, PriorFn&& prior_fn) {
    using State = typename Problem::State;
    if (problem.is_terminal(root_state)) {
        throw std::invalid_argument("cannot plan from a terminal state");
    }
    const int num_actions = problem.num_actions();
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<int> any_action(0, num_actions - 1);

    SearchNode<State> root(root_state, 0, false, num_actions);
    SearchPath<State> path;
    std::vector<int> untried;

    for (int it = 0; it < cfg.iterations; ++it) {
        SearchNode<State>* node = &root;
        path.clear();

        // Selection: descend through fully expanded internal nodes.
        while (!node->terminal && node->expanded_count == num_actions) {
            int a;
            const double* prior = prior_fn(node);
            if (prior != nullptr) {
                a = select_puct(node->visits, node->action_counts, node->action_values,
                                std::span<const double>(prior, static_cast<std::size_t>(num_actions)),
                                cfg.exploration, c_pb);
            } else {
                a = select_uct(node->visits, node->action_counts, node->action_values,
                               cfg.exploration);
            }
            path.emplace_back(node, a);
            node = node->children[static_cast<std::size_t>(a)].get();
        }

        // Terminal leaves consume the iteration without bookkeeping.
        if (node->terminal) continue;

        // Expansion: one uniformly random untried action, once the leaf
        // has accumulated enough visits and is above the depth cap.
        if (node->visits >= cfg.min_visits && node->expanded_count < num_actions &&
            problem.depth(node->state) < cfg.max_rollout_depth) {
            untried.clear();
            for (int a = 0; a < num_actions; ++a) {
                if (!node->children[static_cast<std::size_t>(a)]) untried.push_back(a);
            }
            const int a = untried[std::uniform_int_distribution<std::size_t>(
                0, untried.size() - 1)(rng)];
            State child_state = problem.apply(node->state, a);
            const bool term = problem.is_terminal(child_state);
            node->children[static_cast<std::size_t>(a)] = std::make_unique<SearchNode<State>>(
                std::move(child_state), node->tree_index * num_actions + a + 1, term,
                num_actions);
            node->expanded_count += 1;
            path.emplace_back(node, a);
            node = node->children[static_cast<std::size_t>(a)].get();
        }

        // Simulation: random actions until terminal or the depth cap.
        State state = node->state;
        bool collided = node->terminal;
        while (!collided && problem.depth(state) < cfg.max_rollout_depth) {
            state = problem.apply(state, any_action(rng));
            collided = problem.is_terminal(state);
        }
        const double value = problem.evaluate(state, collided);

        node->visits += 1;  // leaf visit before expansion, per the node invariant
        backpropagate(path, value);
    }

    // Root action: most visited, then highest Q, then lowest index.
    SearchResult result;
    result.root_counts = root.action_counts;
    result.root_values = root.action_values;
    int best = 0;
    for (int a = 1; a < num_actions; ++a) {
        const auto ai = static_cast<std::size_t>(a);
        const auto bi = static_cast<std::size_t>(best);
        if (root.action_counts[ai] > root.action_counts[bi] ||
            (root.action_counts[ai] == root.action_counts[bi] &&
             root.action_values[ai] > root.action_values[bi])) {
            best = a;
        }
    }
    result.action = best;
    return result;
}

/// Advance the ego by the chosen action and every neighbor by the
/// neutral action; flags the result terminal on collision or boundary
/// exceedance.
inline PlanningState simulate_transition(const PlanningState& s, int action, double dt,
                                         const RoadGeometry& road) {
    if (s.terminal) {
        throw std::invalid_argument("cannot transition from a terminal state");
    }
    PlanningState out;
    out.ego = step_kinematics(s.ego, action_from_index(action), dt);
    out.neighbors.reserve(s.neighbors.size());
    for (const VehicleState& nb : s.neighbors) {
        out.neighbors.push_back(step_neutral(nb, dt));
    }
    out.depth = s.depth + 1;
    out.terminal = out_of_bounds(out.ego, road);
    for (const VehicleState& nb : out.neighbors) {
        if (out.terminal) break;
        if (rect_overlap(out.ego, nb)) out.terminal = true;
    }
    return out;
}

/// The lane-free traffic planning problem fed to the search loop.
struct TrafficProblem {
    using State = PlanningState;

    RoadGeometry road;
    double time_step = 0.25;
    RewardParams reward;

    int num_actions() const { return kNumActions; }
    State apply(const State& s, int action) const {
        return simulate_transition(s, action, time_step, road);
    }
    bool is_terminal(const State& s) const { return s.terminal; }
    int depth(const State& s) const { return s.depth; }
    double evaluate(const State& s, bool collided) const {
        return reward_total(s, collided, reward);
    }
};

struct RolloutResult {
    PlanningState state;
    bool collided = false;
    int steps_after_root = 0;
};

/// Random-action simulation until terminal or the total-depth cap.
inline RolloutResult rollout(const PlanningState& s, const MctsConfig& cfg,
                             const RoadGeometry& road, double dt, std::mt19937_64& rng) {
    if (s.terminal) {
        throw std::invalid_argument("cannot roll out from a terminal state");
    }
    std::uniform_int_distribution<int> any_action(0, kNumActions - 1);
    PlanningState state = s;
    while (!state.terminal && state.depth < cfg.max_rollout_depth) {
        state = simulate_transition(state, any_action(rng), dt, road);
    }
    return RolloutResult{state, state.terminal, state.depth};
}

/// Plain MCTS over the traffic problem; returns the root action.
inline SearchResult plan_search(const PlanningState& s, const MctsConfig& cfg,
                                const RewardParams& params, const RoadGeometry& road,
                                double dt) {
    const TrafficProblem problem{road, dt, params};
    return mcts_search(problem, s, cfg, 0.0,
                       [](const SearchNode<PlanningState>*) -> const double* { return nullptr; });
}

inline int plan(const PlanningState& s, const MctsConfig& cfg, const RewardParams& params,
                const RoadGeometry& road = RoadGeometry{}, double dt = 0.25) {
    return plan_search(s, cfg, params, road, dt).action;
}

}  // namespace lanefree
