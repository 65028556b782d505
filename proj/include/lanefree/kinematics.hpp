#pragma once

#include <algorithm>
#include <cmath>

#include "lanefree/types.hpp"

namespace lanefree {

/// Double-integrator update over one time step. Longitudinal speed is
/// clamped to >= 0 after the update; the position still uses the
/// pre-clamp closed-form equation.
inline VehicleState step_kinematics(const VehicleState& v, const Action& a, double dt) {
    VehicleState out = v;
    out.px = v.px + v.vx * dt + 0.5 * a.ax * dt * dt;
    out.py = v.py + v.vy * dt + 0.5 * a.ay * dt * dt;
    out.vx = std::max(0.0, v.vx + a.ax * dt);
    out.vy = v.vy + a.ay * dt;
    return out;
}

/// Zero acceleration on both axes: neighbors are simulated this way.
inline VehicleState step_neutral(const VehicleState& v, double dt) {
    return step_kinematics(v, Action{0.0, 0.0}, dt);
}

/// Strict overlap of the two axis-aligned vehicle rectangles. Touching
/// edges do not count as a collision.
inline bool rect_overlap(const VehicleState& a, const VehicleState& b) {
    return std::abs(a.px - b.px) < 0.5 * (a.length + b.length) &&
           std::abs(a.py - b.py) < 0.5 * (a.width + b.width);
}

/// True when part of the vehicle rectangle is outside the lateral road
/// band. Touching the edge exactly is still in bounds.
inline bool out_of_bounds(const VehicleState& v, const RoadGeometry& road) {
    return v.py - 0.5 * v.width < 0.0 || v.py + 0.5 * v.width > road.width;
}

/// Safety-ellipse influence of neighbor `nb` on `ego`: 0 outside the
/// ellipse, down to -1 at full intrusion. The longitudinal semi-axis
/// grows with the closing speed, so a faster tailing vehicle intrudes
/// from further away; this is what produces nudging pressure.
inline double field_influence(const VehicleState& ego, const VehicleState& nb,
                              const FieldParams& fp) {
    const double dx = nb.px - ego.px;
    const double dy = nb.py - ego.py;
    const double closing = dx > 0.0 ? std::max(0.0, ego.vx - nb.vx)
                                    : std::max(0.0, nb.vx - ego.vx);
    const double l_safe = 0.5 * (ego.length + nb.length) + fp.margin_x + closing * fp.time_headway;
    const double w_safe = 0.5 * (ego.width + nb.width) + fp.margin_y;
    const double e = (dx / l_safe) * (dx / l_safe) + (dy / w_safe) * (dy / w_safe);
    return e < 1.0 ? -(1.0 - e) : 0.0;
}

}  // namespace lanefree
