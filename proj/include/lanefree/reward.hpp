#pragma once

#include <cmath>
#include <stdexcept>

#include "lanefree/kinematics.hpp"
#include "lanefree/types.hpp"

namespace lanefree {

struct RewardParams {
    double collision_penalty = 10.0;  // D
    double epsilon = 1.0;
    double alpha = 1.0;  // weight of the field term
    double beta = 1.0;   // weight of the collision term
    double c = 1.0;      // weight of the speed term
    FieldParams field;
};

/// -D/n_s when a collision occurred n_s steps after the root, 0 otherwise.
inline double reward_collision(int steps_after_root, double penalty, bool collided = true) {
    if (!collided) return 0.0;
    if (steps_after_root < 1) {
        throw std::invalid_argument("a collision cannot occur zero steps after the root");
    }
    return -penalty / static_cast<double>(steps_after_root);
}

/// Summed field influence over neighbors inside the d_max zone. Non-positive.
inline double reward_field(const PlanningState& s, const FieldParams& fp) {
    double total = 0.0;
    for (const VehicleState& nb : s.neighbors) {
        if (std::abs(nb.px - s.ego.px) <= fp.d_max) {
            total += field_influence(s.ego, nb, fp);
        }
    }
    return total;
}

/// Speed-tracking term in (0, 1], maximal at vx == desired speed.
inline double reward_speed(double vx, double desired, double epsilon) {
    return epsilon / (std::abs(vx - desired) + epsilon);
}

/// Weighted combination: the field term always contributes; collision
/// (including boundary exceedance, which is terminal) replaces the
/// speed term when present.
inline double reward_total(const PlanningState& s, bool collided, const RewardParams& p) {
    const double rf = reward_field(s, p.field);
    if (collided) {
        return p.alpha * rf + p.beta * reward_collision(s.depth, p.collision_penalty);
    }
    return p.alpha * rf + p.c * reward_speed(s.ego.vx, s.ego.desired_speed, p.epsilon);
}

}  // namespace lanefree
