#include "lanefree/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lanefree {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& section) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            if (key == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw std::runtime_error("unknown config key '" + key + "' in " + section);
    }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
    AppConfig cfg;
    json doc = json::parse(json_text);
    check_keys(doc, {"env", "reward", "mcts", "puct", "train", "experiment"}, "config root");

    if (doc.contains("env")) {
        const json& e = doc["env"];
        check_keys(e,
                   {"sim_duration", "time_step", "road_length", "road_width", "demand_flow",
                    "departure_speed", "desired_speed_min", "desired_speed_max",
                    "vehicle_length", "vehicle_width", "visibility", "seed"},
                   "env");
        EnvConfig& env = cfg.plan.env;
        read(e, "sim_duration", env.sim_duration);
        read(e, "time_step", env.time_step);
        read(e, "road_length", env.road.length);
        read(e, "road_width", env.road.width);
        read(e, "demand_flow", env.demand_flow);
        read(e, "departure_speed", env.departure_speed);
        read(e, "desired_speed_min", env.desired_speed_min);
        read(e, "desired_speed_max", env.desired_speed_max);
        read(e, "vehicle_length", env.vehicle_length);
        read(e, "vehicle_width", env.vehicle_width);
        read(e, "visibility", env.visibility);
        read(e, "seed", env.seed);
    }

    if (doc.contains("reward")) {
        const json& r = doc["reward"];
        check_keys(r,
                   {"collision_penalty", "epsilon", "alpha", "beta", "c", "time_headway",
                    "margin_x", "margin_y", "d_max"},
                   "reward");
        RewardParams& reward = cfg.plan.reward;
        read(r, "collision_penalty", reward.collision_penalty);
        read(r, "epsilon", reward.epsilon);
        read(r, "alpha", reward.alpha);
        read(r, "beta", reward.beta);
        read(r, "c", reward.c);
        read(r, "time_headway", reward.field.time_headway);
        read(r, "margin_x", reward.field.margin_x);
        read(r, "margin_y", reward.field.margin_y);
        read(r, "d_max", reward.field.d_max);
    }

    if (doc.contains("mcts")) {
        const json& m = doc["mcts"];
        check_keys(m, {"iterations", "exploration", "min_visits", "max_rollout_depth"}, "mcts");
        read(m, "iterations", cfg.plan.mcts.iterations);
        read(m, "exploration", cfg.plan.mcts.exploration);
        read(m, "min_visits", cfg.plan.mcts.min_visits);
        read(m, "max_rollout_depth", cfg.plan.mcts.max_rollout_depth);
    }

    if (doc.contains("puct")) {
        const json& p = doc["puct"];
        check_keys(p, {"c_b", "c_pb", "prediction_levels"}, "puct");
        read(p, "c_b", cfg.plan.puct.c_b);
        read(p, "c_pb", cfg.plan.puct.c_pb);
        read(p, "prediction_levels", cfg.plan.puct.prediction_levels);
    }
    cfg.plan.puct.base = cfg.plan.mcts;

    if (doc.contains("train")) {
        const json& t = doc["train"];
        check_keys(t,
                   {"batch_size", "epochs", "learning_rate", "lr_decay", "lr_decay_every",
                    "dropout", "validation_split", "seed"},
                   "train");
        read(t, "batch_size", cfg.train.batch_size);
        read(t, "epochs", cfg.train.epochs);
        read(t, "learning_rate", cfg.train.learning_rate);
        read(t, "lr_decay", cfg.train.lr_decay);
        read(t, "lr_decay_every", cfg.train.lr_decay_every);
        read(t, "dropout", cfg.train.dropout);
        read(t, "validation_split", cfg.train.validation_split);
        read(t, "seed", cfg.train.seed);
    }

    if (doc.contains("experiment")) {
        const json& x = doc["experiment"];
        check_keys(x, {"algorithms", "flows", "iterations", "seeds", "model_path"}, "experiment");
        if (x.contains("algorithms")) {
            cfg.plan.algorithms.clear();
            for (const auto& name : x["algorithms"]) {
                const auto parsed = parse_algorithm(name.get<std::string>());
                if (!parsed) {
                    throw std::runtime_error("unknown algorithm '" + name.get<std::string>() +
                                             "' in experiment.algorithms");
                }
                cfg.plan.algorithms.push_back(*parsed);
            }
        }
        if (x.contains("flows")) cfg.plan.flows = x["flows"].get<std::vector<double>>();
        if (x.contains("iterations")) {
            cfg.plan.iteration_grid = x["iterations"].get<std::vector<int>>();
        }
        if (x.contains("seeds")) cfg.plan.seeds = x["seeds"].get<std::vector<std::uint64_t>>();
        read(x, "model_path", cfg.plan.model_path);
    }

    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string default_config_json() {
    const AppConfig cfg;
    json doc;
    doc["env"] = {{"sim_duration", cfg.plan.env.sim_duration},
                  {"time_step", cfg.plan.env.time_step},
                  {"road_length", cfg.plan.env.road.length},
                  {"road_width", cfg.plan.env.road.width},
                  {"demand_flow", cfg.plan.env.demand_flow},
                  {"departure_speed", cfg.plan.env.departure_speed},
                  {"desired_speed_min", cfg.plan.env.desired_speed_min},
                  {"desired_speed_max", cfg.plan.env.desired_speed_max},
                  {"vehicle_length", cfg.plan.env.vehicle_length},
                  {"vehicle_width", cfg.plan.env.vehicle_width},
                  {"visibility", cfg.plan.env.visibility},
                  {"seed", cfg.plan.env.seed}};
    doc["reward"] = {{"collision_penalty", cfg.plan.reward.collision_penalty},
                     {"epsilon", cfg.plan.reward.epsilon},
                     {"alpha", cfg.plan.reward.alpha},
                     {"beta", cfg.plan.reward.beta},
                     {"c", cfg.plan.reward.c},
                     {"time_headway", cfg.plan.reward.field.time_headway},
                     {"margin_x", cfg.plan.reward.field.margin_x},
                     {"margin_y", cfg.plan.reward.field.margin_y},
                     {"d_max", cfg.plan.reward.field.d_max}};
    doc["mcts"] = {{"iterations", cfg.plan.mcts.iterations},
                   {"exploration", cfg.plan.mcts.exploration},
                   {"min_visits", cfg.plan.mcts.min_visits},
                   {"max_rollout_depth", cfg.plan.mcts.max_rollout_depth}};
    doc["puct"] = {{"c_b", cfg.plan.puct.c_b},
                   {"c_pb", cfg.plan.puct.c_pb},
                   {"prediction_levels", cfg.plan.puct.prediction_levels}};
    doc["train"] = {{"batch_size", cfg.train.batch_size},
                    {"epochs", cfg.train.epochs},
                    {"learning_rate", cfg.train.learning_rate},
                    {"lr_decay", cfg.train.lr_decay},
                    {"lr_decay_every", cfg.train.lr_decay_every},
                    {"dropout", cfg.train.dropout},
                    {"validation_split", cfg.train.validation_split},
                    {"seed", cfg.train.seed}};
    json algorithms = json::array();
    for (Algorithm a : cfg.plan.algorithms) algorithms.push_back(algorithm_name(a));
    doc["experiment"] = {{"algorithms", algorithms},
                         {"flows", cfg.plan.flows},
                         {"iterations", cfg.plan.iteration_grid},
                         {"seeds", cfg.plan.seeds},
                         {"model_path", cfg.plan.model_path}};
    return doc.dump(2);
}

}  // namespace lanefree
