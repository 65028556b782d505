#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lanefree/config.hpp"
#include "lanefree/experiment.hpp"
#include "lanefree/selfplay.hpp"

using namespace lanefree;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

ExperimentPlan tiny_plan() {
    ExperimentPlan plan;
    plan.algorithms = {Algorithm::Mcts, Algorithm::MctsNudging};
    plan.flows = {5400.0};
    plan.iteration_grid = {10, 20};
    plan.seeds = {1, 2, 3, 4, 5};
    plan.env.sim_duration = 2.0;  // 8 steps; enough to exercise the loop
    return plan;
}

}  // namespace

TEST_CASE("algorithm names round-trip") {
    for (Algorithm a : {Algorithm::Mcts, Algorithm::MctsNudging, Algorithm::NnMcts, Algorithm::Nn}) {
        const auto parsed = parse_algorithm(algorithm_name(a));
        REQUIRE(parsed.has_value());
        CHECK(*parsed == a);
    }
    CHECK_FALSE(parse_algorithm("alphago").has_value());
    CHECK(algorithm_is_isotropic(Algorithm::MctsNudging));
    CHECK_FALSE(algorithm_is_isotropic(Algorithm::Mcts));
    CHECK(algorithm_needs_model(Algorithm::Nn));
    CHECK_FALSE(algorithm_needs_model(Algorithm::MctsNudging));
}

TEST_CASE("the grid produces one row per cell and resumes cleanly") {
    const std::string raw = temp_path("exp_raw.csv");
    const std::string agg = temp_path("exp_agg.csv");
    std::remove(raw.c_str());
    std::remove(agg.c_str());

    const ExperimentPlan plan = tiny_plan();
    const ExperimentOutcome first = run_experiment(plan, raw, agg);
    CHECK(first.episodes_run == 20);  // 2 algorithms x 1 flow x 2 iteration counts x 5 seeds
    CHECK(first.episodes_skipped == 0);
    CHECK(first.episodes_failed == 0);

    const std::vector<ResultRow> rows = load_results(raw);
    REQUIRE(rows.size() == 20);
    for (const ResultRow& r : rows) {
        CHECK_FALSE(r.failed);
        CHECK(r.wall_clock_s >= 0.0);
        CHECK(std::isfinite(r.speed_average));
    }

    SUBCASE("rerun skips every completed cell") {
        const ExperimentOutcome second = run_experiment(plan, raw, agg);
        CHECK(second.episodes_run == 0);
        CHECK(second.episodes_skipped == 20);
        CHECK(load_results(raw).size() == 20);
    }
    SUBCASE("a widened grid only runs the new cells") {
        ExperimentPlan wider = plan;
        wider.seeds.push_back(6);
        const ExperimentOutcome second = run_experiment(wider, raw, agg);
        CHECK(second.episodes_run == 4);
        CHECK(second.episodes_skipped == 20);
        CHECK(load_results(raw).size() == 24);
    }
    std::remove(raw.c_str());
    std::remove(agg.c_str());
}

TEST_CASE("the aggregate recomputes exactly from the raw rows") {
    std::vector<ResultRow> rows;
    for (int seed = 1; seed <= 5; ++seed) {
        ResultRow r;
        r.algorithm = "mcts-nudging";
        r.flow = 5400.0;
        r.iterations = 100;
        r.seed = static_cast<std::uint64_t>(seed);
        r.collisions = 2 * seed;  // mean 6, sample SD sqrt(10)
        r.speed_average = 28.0;
        r.delay_average = 1.5;
        rows.push_back(r);
    }
    const std::string path = temp_path("agg_check.csv");
    write_aggregate(path, rows);

    std::ifstream in(path);
    std::string header, line;
    std::getline(in, header);
    CHECK(header.rfind("algorithm,flow,iterations,episodes,", 0) == 0);
    REQUIRE(std::getline(in, line));
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    CHECK(field == "mcts-nudging");
    std::getline(ss, field, ',');  // flow
    std::getline(ss, field, ',');  // iterations
    std::getline(ss, field, ',');
    CHECK(field == "5");
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(6.0));
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(std::sqrt(10.0)));
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(28.0));
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(0.0));  // identical speeds -> SD 0
    std::remove(path.c_str());
}

TEST_CASE("failed cells are recorded without aborting the grid") {
    ExperimentPlan plan = tiny_plan();
    plan.algorithms = {Algorithm::MctsNudging};
    plan.iteration_grid = {10};
    plan.seeds = {1};
    plan.flows = {5400.0, -1.0};  // the second flow is invalid

    const std::string raw = temp_path("exp_fail_raw.csv");
    const std::string agg = temp_path("exp_fail_agg.csv");
    std::remove(raw.c_str());
    std::remove(agg.c_str());

    const ExperimentOutcome outcome = run_experiment(plan, raw, agg);
    CHECK(outcome.episodes_run == 2);
    CHECK(outcome.episodes_failed == 1);

    const std::vector<ResultRow> rows = load_results(raw);
    REQUIRE(rows.size() == 2);
    int failed = 0;
    for (const ResultRow& r : rows) {
        if (r.failed) {
            ++failed;
            CHECK_FALSE(r.error.empty());
        }
    }
    CHECK(failed == 1);
    std::remove(raw.c_str());
    std::remove(agg.c_str());
}

TEST_CASE("an NN plan without a model path is a configuration error") {
    ExperimentPlan plan = tiny_plan();
    plan.algorithms = {Algorithm::Nn};
    CHECK_THROWS_AS(run_experiment(plan, temp_path("x.csv"), temp_path("y.csv")),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        make_planner(Algorithm::NnMcts, plan.env, plan.mcts, plan.puct, plan.reward, nullptr),
        std::invalid_argument);
}

TEST_CASE("self-play collection emits one full row per vehicle-step") {
    EnvConfig env;
    env.seed = 11;
    MctsConfig mcts;
    mcts.iterations = 20;
    RewardParams reward;

    CHECK(collect_selfplay(env, mcts, reward, 0).empty());

    const std::vector<DatasetRow> rows = collect_selfplay(env, mcts, reward, 40);
    REQUIRE(rows.size() >= 40);
    for (const DatasetRow& r : rows) {
        CHECK(r.label >= 0);
        CHECK(r.label < kNumActions);
        CHECK(r.features[1] > 0.0);  // ego v_x
    }
    const std::vector<DatasetRow> again = collect_selfplay(env, mcts, reward, 40);
    REQUIRE(again.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(again[i].label == rows[i].label);
        CHECK(again[i].features == rows[i].features);
    }
}

TEST_CASE("config documents parse, reject junk, and default sanely") {
    const AppConfig defaults = parse_config(default_config_json());
    CHECK(defaults.plan.env.sim_duration == 3600.0);
    CHECK(defaults.plan.env.time_step == 0.25);
    CHECK(defaults.plan.env.road.width == 10.2);
    CHECK(defaults.plan.mcts.iterations == 200);
    CHECK(defaults.plan.puct.c_pb == 4.0);
    CHECK(defaults.plan.puct.prediction_levels == 3);
    CHECK(defaults.train.batch_size == 64);
    CHECK(defaults.train.epochs == 50);
    CHECK(defaults.plan.iteration_grid ==
          std::vector<int>{30, 50, 100, 200, 500, 750, 1000});
    CHECK(defaults.plan.seeds.size() == 5);

    const AppConfig partial = parse_config(R"({"env": {"demand_flow": 9400}})");
    CHECK(partial.plan.env.demand_flow == 9400.0);
    CHECK(partial.plan.env.road.length == 500.0);  // untouched defaults

    const AppConfig tuned =
        parse_config(R"({"mcts": {"iterations": 77}, "puct": {"c_pb": 2.5}})");
    CHECK(tuned.plan.mcts.iterations == 77);
    CHECK(tuned.plan.puct.base.iterations == 77);  // puct inherits the mcts base
    CHECK(tuned.plan.puct.c_pb == 2.5);

    CHECK_THROWS(parse_config(R"({"envv": {}})"));
    CHECK_THROWS(parse_config(R"({"env": {"warp_speed": 1}})"));
    CHECK_THROWS(parse_config(R"({"experiment": {"algorithms": ["alphago"]}})"));
    CHECK_THROWS(parse_config("not json"));
}
