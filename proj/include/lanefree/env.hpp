#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "lanefree/types.hpp"

namespace lanefree {

struct EnvConfig {
    double sim_duration = 3600.0;
    double time_step = 0.25;
    RoadGeometry road;
    double demand_flow = 5400.0;  // veh/h
    double departure_speed = 25.0;
    double desired_speed_min = 25.0;
    double desired_speed_max = 35.0;
    double vehicle_length = 3.5;
    double vehicle_width = 1.6;
    double visibility = 50.0;  // d
    std::uint64_t seed = 0;
};

struct EpisodeMetrics {
    long collisions = 0;
    double speed_average = 0.0;
    double delay_average = 0.0;  // seconds
    long vehicles_entered = 0;
    long vehicles_exited = 0;
};

struct StepReport {
    int collisions = 0;
    std::vector<int> removed_ids;
    std::vector<int> exited_ids;
};

struct TrajectoryRow {
    double t = 0.0;
    int id = 0;
    double px = 0.0, py = 0.0, vx = 0.0, vy = 0.0;
};

/// travel_time minus the ideal travel time at the desired speed.
inline double compute_delay(double travel_time, double desired_speed, double road_length) {
    return travel_time - road_length / desired_speed;
}

/// Open highway with deterministic arrivals at interval 3600/flow.
/// Spawns that would overlap an existing vehicle are queued, never dropped.
class Env {
  public:
    explicit Env(const EnvConfig& config);

    const EnvConfig& config() const { return config_; }
    const std::vector<VehicleState>& vehicles() const { return vehicles_; }
    double time() const { return time_; }
    long vehicles_entered() const { return entered_; }
    long vehicles_exited() const { return exited_; }
    long collisions() const { return collisions_; }
    long removed_in_collisions() const { return removed_in_collisions_; }
    std::size_t pending_spawns() const { return pending_.size(); }

    /// Admits every due arrival whose entry rectangle is free; returns
    /// the vehicles spawned this call.
    std::vector<VehicleState> spawn_due_vehicles();

    /// Local view for one vehicle; neighbors ordered by |dx| ascending,
    /// ties by id. Front-only mode keeps only vehicles with dx >= 0.
    PlanningState observe(int vehicle_id, bool isotropic) const;

    /// Advances all vehicles simultaneously from the pre-step snapshot,
    /// then handles collisions (pair removal), exits, and lateral clamping.
    StepReport apply_joint_actions(const std::map<int, int>& actions);

    EpisodeMetrics metrics() const;

  private:
    struct PendingSpawn {
        int id;
        double py;
        double desired_speed;
    };

    EnvConfig config_;
    std::vector<VehicleState> vehicles_;
    std::map<int, double> entry_time_;
    std::deque<PendingSpawn> pending_;
    std::mt19937_64 rng_;
    double time_ = 0.0;
    double arrival_interval_;
    long arrivals_generated_ = 0;
    int next_id_ = 0;
    long entered_ = 0;
    long exited_ = 0;
    long collisions_ = 0;
    long removed_in_collisions_ = 0;
    double speed_sum_ = 0.0;
    long speed_samples_ = 0;
    double delay_sum_ = 0.0;
};

/// Per-vehicle policy: chooses an action index from a local snapshot.
using Planner = std::function<int(const PlanningState&, int vehicle_id, long step)>;

struct RunOptions {
    bool isotropic = true;
    const std::vector<int>* log_ids = nullptr;       // nullptr logs nothing
    std::vector<TrajectoryRow>* trajectory = nullptr;
};

EpisodeMetrics run_episode(Env& env, const Planner& planner, double duration,
                           const RunOptions& options = {});

void write_trajectory_log(const std::string& path, const std::vector<TrajectoryRow>& rows);

}  // namespace lanefree
