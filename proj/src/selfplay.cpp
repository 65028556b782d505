#include "lanefree/selfplay.hpp"

namespace lanefree {

std::vector<DatasetRow> collect_selfplay(const EnvConfig& env_cfg, const MctsConfig& mcts_cfg,
                                         const RewardParams& params, std::size_t rows_target) {
    std::vector<DatasetRow> rows;
    rows.reserve(rows_target);

    for (std::uint64_t episode = 0; rows.size() < rows_target; ++episode) {
        EnvConfig cfg = env_cfg;
        cfg.seed = env_cfg.seed + episode;
        Env env(cfg);

        Planner planner = [&](const PlanningState& s, int vehicle_id, long step) {
            MctsConfig call_cfg = mcts_cfg;
            call_cfg.seed = mix_seed(mix_seed(cfg.seed, static_cast<std::uint64_t>(vehicle_id)),
                                     static_cast<std::uint64_t>(step));
            const int action = plan(s, call_cfg, params, cfg.road, cfg.time_step);
            if (rows.size() < rows_target) {
                rows.push_back(DatasetRow{vectorize_state(s), action});
            }
            return action;
        };

        RunOptions options;
        options.isotropic = mcts_cfg.isotropic;
        const double dt = cfg.time_step;
        const long steps = static_cast<long>(cfg.sim_duration / dt);
        for (long step = 0; step < steps && rows.size() < rows_target; ++step) {
            env.spawn_due_vehicles();
            std::map<int, int> actions;
            for (const VehicleState& v : env.vehicles()) {
                const PlanningState s = env.observe(v.id, options.isotropic);
                actions[v.id] = planner(s, v.id, step);
            }
            env.apply_joint_actions(actions);
        }
    }
    return rows;
}

}  // namespace lanefree
