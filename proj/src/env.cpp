#include "lanefree/env.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lanefree/kinematics.hpp"

namespace lanefree {

namespace {
constexpr double kEntryMargin = 0.1;  // keeps spawns off the walls
}

Env::Env(const EnvConfig& config) : config_(config), rng_(config.seed) {
    if (config.time_step <= 0.0) throw std::invalid_argument("time_step must be positive");
    if (config.demand_flow <= 0.0) throw std::invalid_argument("demand_flow must be positive");
    if (config.desired_speed_min > config.desired_speed_max) {
        throw std::invalid_argument("desired speed range is empty");
    }
    if (config.visibility <= 0.0) throw std::invalid_argument("visibility must be positive");
    if (config.road.length <= 0.0 || config.road.width <= config.vehicle_width) {
        throw std::invalid_argument("road must be longer than zero and wider than a vehicle");
    }
    arrival_interval_ = 3600.0 / config.demand_flow;
}

std::vector<VehicleState> Env::spawn_due_vehicles() {
    // Arrivals occur at t = k * interval, k = 0, 1, ...; attributes are
    // sampled when the arrival becomes due so deferrals stay deterministic.
    const double tolerance = 1e-9 * arrival_interval_;
    while (static_cast<double>(arrivals_generated_) * arrival_interval_ <= time_ + tolerance) {
        const double lo = 0.5 * config_.vehicle_width + kEntryMargin;
        const double hi = config_.road.width - 0.5 * config_.vehicle_width - kEntryMargin;
        std::uniform_real_distribution<double> lateral(lo, hi);
        std::uniform_real_distribution<double> desired(config_.desired_speed_min,
                                                       config_.desired_speed_max);
        pending_.push_back(PendingSpawn{next_id_++, lateral(rng_), desired(rng_)});
        ++arrivals_generated_;
    }

    std::vector<VehicleState> spawned;
    std::deque<PendingSpawn> still_pending;
    for (const PendingSpawn& p : pending_) {
        VehicleState v;
        v.id = p.id;
        v.px = 0.0;
        v.py = p.py;
        v.vx = config_.departure_speed;
        v.vy = 0.0;
        v.length = config_.vehicle_length;
        v.width = config_.vehicle_width;
        v.desired_speed = p.desired_speed;
        bool blocked = false;
        for (const VehicleState& other : vehicles_) {
            if (rect_overlap(v, other)) {
                blocked = true;
                break;
            }
        }
        if (blocked) {
            still_pending.push_back(p);
        } else {
            vehicles_.push_back(v);
            entry_time_[v.id] = time_;
            ++entered_;
            spawned.push_back(v);
        }
    }
    pending_ = std::move(still_pending);
    return spawned;
}

PlanningState Env::observe(int vehicle_id, bool isotropic) const {
    const VehicleState* ego = nullptr;
    for (const VehicleState& v : vehicles_) {
        if (v.id == vehicle_id) {
            ego = &v;
            break;
        }
    }
    if (ego == nullptr) throw std::out_of_range("unknown vehicle id");

    PlanningState s;
    s.ego = *ego;
    for (const VehicleState& v : vehicles_) {
        if (v.id == vehicle_id) continue;
        const double dx = v.px - ego->px;
        if (std::abs(dx) > config_.visibility) continue;
        if (!isotropic && dx < 0.0) continue;
        s.neighbors.push_back(v);
    }
    std::sort(s.neighbors.begin(), s.neighbors.end(),
              [&](const VehicleState& a, const VehicleState& b) {
                  const double da = std::abs(a.px - ego->px);
                  const double db = std::abs(b.px - ego->px);
                  if (da != db) return da < db;
                  return a.id < b.id;
              });
    return s;
}

StepReport Env::apply_joint_actions(const std::map<int, int>& actions) {
    for (const VehicleState& v : vehicles_) {
        if (actions.find(v.id) == actions.end()) {
            throw std::invalid_argument("missing action for vehicle " + std::to_string(v.id));
        }
        speed_sum_ += v.vx;
        ++speed_samples_;
    }

    // Simultaneous advance from the pre-step snapshot, in id order so
    // the outcome is independent of how the action map was assembled.
    std::sort(vehicles_.begin(), vehicles_.end(),
              [](const VehicleState& a, const VehicleState& b) { return a.id < b.id; });
    for (VehicleState& v : vehicles_) {
        v = step_kinematics(v, action_from_index(actions.at(v.id)), config_.time_step);
    }
    time_ += config_.time_step;

    StepReport report;

    // Pairwise collision detection; both members of each pair are removed.
    std::vector<bool> colliding(vehicles_.size(), false);
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        for (std::size_t j = i + 1; j < vehicles_.size(); ++j) {
            if (rect_overlap(vehicles_[i], vehicles_[j])) {
                ++report.collisions;
                colliding[i] = colliding[j] = true;
            }
        }
    }
    collisions_ += report.collisions;

    std::vector<VehicleState> survivors;
    survivors.reserve(vehicles_.size());
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
        VehicleState& v = vehicles_[i];
        if (colliding[i]) {
            report.removed_ids.push_back(v.id);
            ++removed_in_collisions_;
            entry_time_.erase(v.id);
            continue;
        }
        if (v.px >= config_.road.length) {
            report.exited_ids.push_back(v.id);
            ++exited_;
            const double travel = time_ - entry_time_.at(v.id);
            delay_sum_ += compute_delay(travel, v.desired_speed, config_.road.length);
            entry_time_.erase(v.id);
            continue;
        }
        if (v.py - 0.5 * v.width < 0.0) {
            v.py = 0.5 * v.width;
            v.vy = 0.0;
        } else if (v.py + 0.5 * v.width > config_.road.width) {
            v.py = config_.road.width - 0.5 * v.width;
            v.vy = 0.0;
        }
        survivors.push_back(v);
    }
    vehicles_ = std::move(survivors);
    return report;
}

EpisodeMetrics Env::metrics() const {
    EpisodeMetrics m;
    m.collisions = collisions_;
    m.speed_average = speed_samples_ > 0 ? speed_sum_ / speed_samples_ : 0.0;
    m.delay_average = exited_ > 0 ? delay_sum_ / exited_ : 0.0;
    m.vehicles_entered = entered_;
    m.vehicles_exited = exited_;
    return m;
}

EpisodeMetrics run_episode(Env& env, const Planner& planner, double duration,
                           const RunOptions& options) {
    const double dt = env.config().time_step;
    const long steps = static_cast<long>(std::llround(duration / dt));
    for (long step = 0; step < steps; ++step) {
        env.spawn_due_vehicles();

        if (options.trajectory != nullptr && options.log_ids != nullptr) {
            for (const VehicleState& v : env.vehicles()) {
                if (std::find(options.log_ids->begin(), options.log_ids->end(), v.id) !=
                    options.log_ids->end()) {
                    options.trajectory->push_back(
                        TrajectoryRow{env.time(), v.id, v.px, v.py, v.vx, v.vy});
                }
            }
        }

        std::map<int, int> actions;
        for (const VehicleState& v : env.vehicles()) {
            const PlanningState s = env.observe(v.id, options.isotropic);
            actions[v.id] = planner(s, v.id, step);
        }
        env.apply_joint_actions(actions);
    }
    return env.metrics();
}

void write_trajectory_log(const std::string& path, const std::vector<TrajectoryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trajectory log for writing: " + path);
    out.precision(9);
    out << "t,id,p_x,p_y,v_x,v_y\n";
    for (const TrajectoryRow& r : rows) {
        out << r.t << ',' << r.id << ',' << r.px << ',' << r.py << ',' << r.vx << ',' << r.vy
            << '\n';
    }
}

}  // namespace lanefree
