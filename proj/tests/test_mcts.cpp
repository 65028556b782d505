#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "lanefree/mcts.hpp"

using namespace lanefree;

namespace {

VehicleState vehicle_at(double px, double py, double vx) {
    VehicleState v;
    v.px = px;
    v.py = py;
    v.vx = vx;
    return v;
}

PlanningState lone_ego(double vx, double desired) {
    PlanningState s;
    s.ego = vehicle_at(100.0, 5.1, vx);
    s.ego.desired_speed = desired;
    return s;
}

}  // namespace

TEST_CASE("backpropagation is a running mean") {
    SearchNode<int> node(0, 0, false, 15);
    SearchPath<int> path{{&node, 3}};
    backpropagate(path, 0.4);
    CHECK(node.visits == 1);
    CHECK(node.action_counts[3] == 1);
    CHECK(node.action_values[3] == 0.4);
    backpropagate(path, 0.8);
    CHECK(node.action_values[3] == doctest::Approx(0.6).epsilon(1e-15));
    // A constant stream on a fresh edge is reproduced exactly.
    SearchPath<int> fresh{{&node, 9}};
    for (int i = 0; i < 100; ++i) backpropagate(fresh, 0.5);
    CHECK(node.action_counts[9] == 100);
    CHECK(node.action_values[9] == 0.5);
}

TEST_CASE("select_uct follows the UCT formula") {
    std::vector<int> counts(15, 2);
    std::vector<double> values(15, 0.5);

    SUBCASE("full tie breaks to index 0") {
        CHECK(select_uct(30, counts, values, 1.0) == 0);
    }
    SUBCASE("exploitation dominates at small C") {
        values[0] = 0.9;
        values[1] = 0.1;
        CHECK(select_uct(30, counts, values, 1e-6) == 0);
    }
    SUBCASE("an under-visited arm wins at equal Q") {
        counts[9] = 1;  // all Q = 0.5, N(s) = 30, C = 1
        // UCT(a9) = 0.5 + sqrt(ln 30 / 1) = 2.344; others 0.5 + sqrt(ln 30 / 2) = 1.804.
        CHECK(select_uct(30, counts, values, 1.0) == 9);
    }
    SUBCASE("unvisited arms are taken first, lowest index first") {
        counts[5] = 0;
        counts[11] = 0;
        CHECK(select_uct(30, counts, values, 1.0) == 5);
    }
}

TEST_CASE("select_puct reproduces the worked arithmetic") {
    // score(a0) = Q + C_b sqrt(ln N / N_a) + C_pb P / (N_a + 1)
    //           = 0.5 + sqrt(ln 8 / 2) + 0.3 / 3 = 1.61966
    const double score = 0.5 + 1.0 * std::sqrt(std::log(8.0) / 2.0) + 1.0 * 0.3 / 3.0;
    CHECK(score == doctest::Approx(1.61966).epsilon(1e-4 / 1.61966));

    std::vector<int> counts(15, 2);
    std::vector<double> values(15, 0.5);
    std::vector<double> prior(15, 1.0 / 15.0);

    SUBCASE("prior term alone decides equal-Q ties") {
        prior[3] = 0.9;
        CHECK(select_puct(30, counts, values, prior, 1.0, 1.0) == 3);
    }
    SUBCASE("C_pb = 0 degenerates to UCT for visited arms") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> q(0.0, 1.0);
        std::uniform_int_distribution<int> n(1, 10);
        for (int trial = 0; trial < 200; ++trial) {
            int total = 0;
            for (int a = 0; a < 15; ++a) {
                values[static_cast<std::size_t>(a)] = q(rng);
                counts[static_cast<std::size_t>(a)] = n(rng);
                total += counts[static_cast<std::size_t>(a)];
            }
            CHECK(select_puct(total, counts, values, prior, 1.3, 0.0) ==
                  select_uct(total, counts, values, 1.3));
        }
    }
    SUBCASE("huge C_pb makes the prior argmax win from fresh counts") {
        std::fill(counts.begin(), counts.end(), 1);
        prior[12] = 0.5;
        values[2] = 0.99;  // best Q elsewhere
        CHECK(select_puct(15, counts, values, prior, 1.0, 1e9) == 12);
    }
    SUBCASE("unvisited arms break ties by the highest prior") {
        counts[4] = 0;
        counts[10] = 0;
        prior[10] = 0.4;
        CHECK(select_puct(30, counts, values, prior, 1.0, 1.0) == 10);
    }
}

TEST_CASE("simulate_transition advances ego and neighbors") {
    RoadGeometry road;

    SUBCASE("lone ego advances linearly and stays non-terminal") {
        PlanningState s = lone_ego(25.0, 30.0);
        const PlanningState next = simulate_transition(s, 7, 0.25, road);
        CHECK(next.ego.px == s.ego.px + 25.0 * 0.25);
        CHECK(next.ego.vx == 25.0);
        CHECK(next.depth == 1);
        CHECK_FALSE(next.terminal);
    }
    SUBCASE("accelerating into a stopped vehicle 3 m ahead is terminal") {
        PlanningState s = lone_ego(25.0, 30.0);
        s.neighbors.push_back(vehicle_at(s.ego.px + 3.0 + 3.5, s.ego.py, 0.0));
        // Gap between rectangles is 3.0 m; ego covers 6.4 m next step.
        const PlanningState next = simulate_transition(s, 13, 0.25, road);
        CHECK(next.terminal);
    }
    SUBCASE("steering off the road terminates within a few steps") {
        PlanningState s = lone_ego(25.0, 25.0);
        s.ego.py = 0.9;
        int steps = 0;
        while (!s.terminal && steps < 20) {
            s = simulate_transition(s, 6, 0.25, road);  // (0, -1)
            ++steps;
        }
        CHECK(s.terminal);
        CHECK(steps <= 6);
    }
    SUBCASE("transition from a terminal state is a contract violation") {
        PlanningState s = lone_ego(25.0, 30.0);
        s.terminal = true;
        CHECK_THROWS_AS(simulate_transition(s, 7, 0.25, road), std::invalid_argument);
    }
}

TEST_CASE("rollout respects the depth cap and detects doom") {
    RoadGeometry road;
    MctsConfig cfg;

    SUBCASE("lone ego mid-road never collides; full depth reached") {
        std::mt19937_64 rng(1);
        for (int i = 0; i < 200; ++i) {
            const RolloutResult r = rollout(lone_ego(25.0, 30.0), cfg, road, 0.25, rng);
            CHECK_FALSE(r.collided);
            CHECK(r.steps_after_root == 6);
        }
    }
    SUBCASE("a state at the cap is returned unchanged") {
        PlanningState s = lone_ego(25.0, 30.0);
        s.depth = 6;
        std::mt19937_64 rng(2);
        const RolloutResult r = rollout(s, cfg, road, 0.25, rng);
        CHECK(r.steps_after_root == 6);
        CHECK(r.state.ego.px == s.ego.px);
        CHECK_FALSE(r.collided);
    }
    SUBCASE("boxed ego behind a stopped wall almost always collides") {
        // 1 m gap, closing at 25 m/s: 6.25 m of travel next step beats
        // the best case 5.09 m stopping profile, lateral escape blocked.
        PlanningState s = lone_ego(25.0, 30.0);
        const double wall_px = s.ego.px + 1.0 + 3.5;
        for (double py = 0.8; py <= 9.6; py += 1.5) {
            s.neighbors.push_back(vehicle_at(wall_px, py, 0.0));
        }
        int collided = 0;
        std::mt19937_64 rng(3);
        for (int i = 0; i < 1000; ++i) {
            if (rollout(s, cfg, road, 0.25, rng).collided) ++collided;
        }
        CHECK(collided >= 990);
    }
}

TEST_CASE("plan on a lone ego tracks the desired speed") {
    RewardParams params;
    MctsConfig cfg;
    cfg.iterations = 1000;
    cfg.seed = 5;

    SUBCASE("below desired speed: full throttle") {
        const int a = plan(lone_ego(25.0, 35.0), cfg, params);
        CHECK(action_from_index(a).ax == 5.0);
    }
    SUBCASE("at desired speed: hold") {
        const int a = plan(lone_ego(30.0, 30.0), cfg, params);
        CHECK(action_from_index(a).ax == 0.0);
    }
    SUBCASE("terminal root is a contract violation") {
        PlanningState s = lone_ego(25.0, 35.0);
        s.terminal = true;
        CHECK_THROWS_AS(plan(s, cfg, params), std::invalid_argument);
    }
}

TEST_CASE("plan is deterministic under a fixed seed") {
    RewardParams params;
    MctsConfig cfg;
    cfg.iterations = 300;
    PlanningState s = lone_ego(27.0, 33.0);
    s.neighbors.push_back(vehicle_at(s.ego.px + 15.0, s.ego.py + 0.5, 24.0));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        cfg.seed = seed;
        const SearchResult a = plan_search(s, cfg, params, RoadGeometry{}, 0.25);
        const SearchResult b = plan_search(s, cfg, params, RoadGeometry{}, 0.25);
        CHECK(a.action == b.action);
        CHECK(a.root_counts == b.root_counts);
        CHECK(a.root_values == b.root_values);
    }
}

TEST_CASE("root statistics stay within the reward bounds") {
    RewardParams params;
    MctsConfig cfg;
    cfg.iterations = 500;
    cfg.seed = 8;
    PlanningState s = lone_ego(25.0, 30.0);
    s.neighbors.push_back(vehicle_at(s.ego.px + 10.0, s.ego.py, 22.0));
    const SearchResult r = plan_search(s, cfg, params, RoadGeometry{}, 0.25);
    int total = 0;
    for (int a = 0; a < kNumActions; ++a) {
        total += r.root_counts[static_cast<std::size_t>(a)];
        // One neighbor: r in [alpha*(-1) + beta*(-10), 1].
        if (r.root_counts[static_cast<std::size_t>(a)] > 0) {
            CHECK(r.root_values[static_cast<std::size_t>(a)] <= 1.0);
            CHECK(r.root_values[static_cast<std::size_t>(a)] >= -11.0);
        }
    }
    CHECK(total <= cfg.iterations);  // terminal-leaf iterations add no counts
    CHECK(total > 0);
}

TEST_CASE("a fast tailing vehicle rewards yielding") {
    // The surrogate field's nudging pressure, stated on rewards directly:
    // moving aside (and away) from a fast approaching tail beats holding
    // the line, all else equal.
    RewardParams params;
    RoadGeometry road;
    PlanningState s = lone_ego(30.0, 30.0);
    s.ego.py = 4.0;
    s.neighbors.push_back(vehicle_at(s.ego.px - 16.0, 4.3, 38.0));

    PlanningState hold = s;
    PlanningState yield = s;
    for (int step = 0; step < 2; ++step) {
        hold = simulate_transition(hold, 7, 0.25, road);    // (0, 0)
        yield = simulate_transition(yield, 6, 0.25, road);  // (0, -1)
    }
    REQUIRE_FALSE(yield.terminal);
    CHECK(reward_total(yield, false, params) > reward_total(hold, false, params));
}

// Tiny deterministic MDP with 3 actions and horizon 2 used as an
// exhaustive-search oracle for the search loop.
namespace {

struct ToyProblem {
    using State = std::pair<int, int>;  // (node id, depth)

    std::array<std::array<double, 3>, 4> leaf_reward{};  // [first action][second action]

    int num_actions() const { return 3; }
    State apply(const State& s, int action) const {
        return {s.first * 3 + action + 1, s.second + 1};
    }
    bool is_terminal(const State&) const { return false; }
    int depth(const State& s) const { return s.second; }
    double evaluate(const State& s, bool) const {
        // Identify the leaf from its breadth-first id.
        if (s.second < 2) return 0.0;
        const int leaf = s.first - 4;  // leaves are ids 4..12
        return leaf_reward[static_cast<std::size_t>(leaf / 3)][static_cast<std::size_t>(leaf % 3)];
    }
};

int toy_exhaustive_argmax(const ToyProblem& p) {
    int best = 0;
    double best_value = -1e18;
    for (int a = 0; a < 3; ++a) {
        double value = -1e18;
        for (int b = 0; b < 3; ++b) {
            value = std::max(value, p.leaf_reward[static_cast<std::size_t>(a)]
                                                 [static_cast<std::size_t>(b)]);
        }
        if (value > best_value) {
            best_value = value;
            best = a;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("MCTS agrees with exhaustive search on random toy MDPs") {
    MctsConfig cfg;
    cfg.iterations = 10000;
    cfg.max_rollout_depth = 2;

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> reward(0.0, 1.0);
    int matches = 0;
    const int trials = 20;
    for (int trial = 0; trial < trials; ++trial) {
        ToyProblem p;
        for (auto& row : p.leaf_reward) {
            for (double& r : row) r = reward(rng);
        }
        cfg.seed = static_cast<std::uint64_t>(trial);
        const SearchResult result =
            mcts_search(p, ToyProblem::State{0, 0}, cfg, 0.0,
                        [](const SearchNode<ToyProblem::State>*) -> const double* {
                            return nullptr;
                        });
        if (result.action == toy_exhaustive_argmax(p)) ++matches;
    }
    CHECK(matches >= 19);
}
