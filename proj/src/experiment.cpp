#include "lanefree/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "lanefree/features.hpp"

namespace lanefree {

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Mcts: return "mcts";
        case Algorithm::MctsNudging: return "mcts-nudging";
        case Algorithm::NnMcts: return "nn-mcts";
        case Algorithm::Nn: return "nn";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
    if (name == "mcts") return Algorithm::Mcts;
    if (name == "mcts-nudging") return Algorithm::MctsNudging;
    if (name == "nn-mcts") return Algorithm::NnMcts;
    if (name == "nn") return Algorithm::Nn;
    return std::nullopt;
}

bool algorithm_is_isotropic(Algorithm a) { return a != Algorithm::Mcts; }

bool algorithm_needs_model(Algorithm a) {
    return a == Algorithm::NnMcts || a == Algorithm::Nn;
}

Planner make_planner(Algorithm algorithm, const EnvConfig& env_cfg, const MctsConfig& mcts_cfg,
                     const PuctConfig& puct_cfg, const RewardParams& reward,
                     const MlpModel* model) {
    if (algorithm_needs_model(algorithm) && model == nullptr) {
        throw std::invalid_argument(algorithm_name(algorithm) + " requires a trained model");
    }
    const std::uint64_t base_seed = env_cfg.seed;
    const double dt = env_cfg.time_step;
    const RoadGeometry road = env_cfg.road;

    switch (algorithm) {
        case Algorithm::Mcts:
        case Algorithm::MctsNudging:
            return [=](const PlanningState& s, int id, long step) {
                MctsConfig cfg = mcts_cfg;
                cfg.isotropic = algorithm_is_isotropic(algorithm);
                cfg.seed = mix_seed(base_seed, static_cast<std::uint64_t>(id),
                                    static_cast<std::uint64_t>(step));
                return plan(s, cfg, reward, road, dt);
            };
        case Algorithm::NnMcts:
            return [=](const PlanningState& s, int id, long step) {
                PuctConfig cfg = puct_cfg;
                cfg.base.iterations = mcts_cfg.iterations;
                cfg.base.seed = mix_seed(base_seed, static_cast<std::uint64_t>(id),
                                         static_cast<std::uint64_t>(step));
                return plan_guided(s, cfg, reward, road, dt, *model);
            };
        case Algorithm::Nn:
            return [=](const PlanningState& s, int, long) { return greedy_policy(*model, s); };
    }
    throw std::logic_error("unreachable");
}

ResultRow run_cell(Algorithm algorithm, double flow, int iterations, std::uint64_t seed,
                   const ExperimentPlan& plan, const MlpModel* model) {
    ResultRow row;
    row.algorithm = algorithm_name(algorithm);
    row.flow = flow;
    row.iterations = iterations;
    row.seed = seed;

    const auto start = std::chrono::steady_clock::now();
    try {
        EnvConfig env_cfg = plan.env;
        env_cfg.demand_flow = flow;
        env_cfg.seed = seed;
        MctsConfig mcts_cfg = plan.mcts;
        mcts_cfg.iterations = iterations;

        Env env(env_cfg);
        const Planner planner =
            make_planner(algorithm, env_cfg, mcts_cfg, plan.puct, plan.reward, model);
        RunOptions options;
        options.isotropic = algorithm_is_isotropic(algorithm);
        const EpisodeMetrics metrics = run_episode(env, planner, env_cfg.sim_duration, options);

        row.collisions = metrics.collisions;
        row.speed_average = metrics.speed_average;
        row.delay_average = metrics.delay_average;
        row.vehicles_entered = metrics.vehicles_entered;
        row.vehicles_exited = metrics.vehicles_exited;
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    row.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

namespace {

constexpr const char* kRawHeader =
    "algorithm,flow,iterations,seed,collisions,speed_average,delay_average,"
    "vehicles_entered,vehicles_exited,wall_clock_s,status,error";

void append_row(std::ofstream& out, const ResultRow& r) {
    out.precision(9);
    out << r.algorithm << ',' << r.flow << ',' << r.iterations << ',' << r.seed << ','
        << r.collisions << ',' << r.speed_average << ',' << r.delay_average << ','
        << r.vehicles_entered << ',' << r.vehicles_exited << ',' << r.wall_clock_s << ','
        << (r.failed ? "failed" : "ok") << ',' << r.error << '\n';
    out.flush();
}

}  // namespace

std::vector<ResultRow> load_results(const std::string& raw_path) {
    std::vector<ResultRow> rows;
    std::ifstream in(raw_path);
    if (!in) return rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first && line.rfind("algorithm,", 0) == 0) {
            first = false;
            continue;
        }
        first = false;
        std::istringstream ss(line);
        ResultRow r;
        std::string field;
        std::getline(ss, r.algorithm, ',');
        std::getline(ss, field, ',');
        r.flow = std::stod(field);
        std::getline(ss, field, ',');
        r.iterations = std::stoi(field);
        std::getline(ss, field, ',');
        r.seed = std::stoull(field);
        std::getline(ss, field, ',');
        r.collisions = std::stol(field);
        std::getline(ss, field, ',');
        r.speed_average = std::stod(field);
        std::getline(ss, field, ',');
        r.delay_average = std::stod(field);
        std::getline(ss, field, ',');
        r.vehicles_entered = std::stol(field);
        std::getline(ss, field, ',');
        r.vehicles_exited = std::stol(field);
        std::getline(ss, field, ',');
        r.wall_clock_s = std::stod(field);
        std::getline(ss, field, ',');
        r.failed = field == "failed";
        std::getline(ss, r.error);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_aggregate(const std::string& path, const std::vector<ResultRow>& rows) {
    using Key = std::tuple<std::string, double, int>;
    std::map<Key, std::vector<const ResultRow*>> groups;
    for (const ResultRow& r : rows) {
        if (!r.failed) groups[Key{r.algorithm, r.flow, r.iterations}].push_back(&r);
    }

    auto mean_sd = [](const std::vector<double>& xs) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        if (xs.size() > 1) {
            for (double x : xs) var += (x - mean) * (x - mean);
            var /= static_cast<double>(xs.size() - 1);
        }
        return std::pair<double, double>{mean, std::sqrt(var)};
    };

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open aggregate file for writing: " + path);
    out.precision(9);
    out << "algorithm,flow,iterations,episodes,collisions_mean,collisions_sd,"
           "speed_mean,speed_sd,delay_mean,delay_sd\n";
    for (const auto& [key, group] : groups) {
        std::vector<double> collisions, speeds, delays;
        for (const ResultRow* r : group) {
            collisions.push_back(static_cast<double>(r->collisions));
            speeds.push_back(r->speed_average);
            delays.push_back(r->delay_average);
        }
        const auto [cm, cs] = mean_sd(collisions);
        const auto [sm, ss] = mean_sd(speeds);
        const auto [dm, ds] = mean_sd(delays);
        out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
            << group.size() << ',' << cm << ',' << cs << ',' << sm << ',' << ss << ',' << dm
            << ',' << ds << '\n';
    }
}

ExperimentOutcome run_experiment(const ExperimentPlan& plan, const std::string& raw_path,
                                 const std::string& aggregate_path) {
    MlpModel model;
    bool model_loaded = false;
    for (Algorithm a : plan.algorithms) {
        if (algorithm_needs_model(a)) {
            if (plan.model_path.empty()) {
                throw std::invalid_argument("experiment plan includes an NN variant but no model path");
            }
            model = load_model(plan.model_path);
            model_loaded = true;
            break;
        }
    }

    std::vector<ResultRow> existing = load_results(raw_path);
    std::set<std::tuple<std::string, double, int, std::uint64_t>> done;
    for (const ResultRow& r : existing) {
        done.insert({r.algorithm, r.flow, r.iterations, r.seed});
    }

    const bool fresh = existing.empty();
    std::ofstream out(raw_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open results file for writing: " + raw_path);
    if (fresh) out << kRawHeader << '\n';

    ExperimentOutcome outcome;
    for (Algorithm algorithm : plan.algorithms) {
        for (double flow : plan.flows) {
            for (int iterations : plan.iteration_grid) {
                for (std::uint64_t seed : plan.seeds) {
                    if (done.count({algorithm_name(algorithm), flow, iterations, seed}) > 0) {
                        ++outcome.episodes_skipped;
                        continue;
                    }
                    ResultRow row = run_cell(algorithm, flow, iterations, seed, plan,
                                             model_loaded ? &model : nullptr);
                    append_row(out, row);
                    existing.push_back(row);
                    ++outcome.episodes_run;
                    if (row.failed) ++outcome.episodes_failed;
                }
            }
        }
    }
    write_aggregate(aggregate_path, existing);
    return outcome;
}

}  // namespace lanefree
