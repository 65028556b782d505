#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lanefree {

/// Kinematic record of a single vehicle. Positions are rectangle centers.
struct VehicleState {
    int id = 0;
    double px = 0.0;  // longitudinal position, m
    double py = 0.0;  // lateral position, m
    double vx = 0.0;  // longitudinal speed, m/s
    double vy = 0.0;  // lateral speed, m/s
    double length = 3.5;
    double width = 1.6;
    double desired_speed = 30.0;
};

/// One of the 15 discrete acceleration pairs.
struct Action {
    double ax = 0.0;
    double ay = 0.0;
};

inline constexpr std::array<double, 5> kLongitudinalAccels{-5.0, -2.0, 0.0, 2.0, 5.0};
inline constexpr std::array<double, 3> kLateralAccels{-1.0, 0.0, 1.0};
inline constexpr int kNumActions = 15;

/// Row-major (ax-major) mapping from index 0..14 to (ax, ay).
inline Action action_from_index(int index) {
    if (index < 0 || index >= kNumActions) {
        throw std::out_of_range("action index must be in 0..14");
    }
    return Action{kLongitudinalAccels[static_cast<std::size_t>(index / 3)],
                  kLateralAccels[static_cast<std::size_t>(index % 3)]};
}

inline int action_index(const Action& a) {
    for (int i = 0; i < kNumActions; ++i) {
        const Action c = action_from_index(i);
        if (c.ax == a.ax && c.ay == a.ay) return i;
    }
    throw std::invalid_argument("action is not one of the 15 discrete pairs");
}

/// Straight road segment; vehicles drive in +x, lateral band is [0, width].
struct RoadGeometry {
    double length = 500.0;
    double width = 10.2;
};

/// Parameters of the safety-ellipse influence function between two vehicles.
struct FieldParams {
    double time_headway = 1.0;  // s, scales the longitudinal ellipse with closing speed
    double margin_x = 2.0;      // m
    double margin_y = 0.4;      // m
    double d_max = 50.0;        // m, influence-zone cutoff
};

/// Local view used for planning: ego plus observed neighbors, at some
/// simulated depth below the search root.
struct PlanningState {
    VehicleState ego;
    std::vector<VehicleState> neighbors;
    int depth = 0;          // steps after the root state
    bool terminal = false;  // ego collided or left the road in simulation
};

/// SplitMix64-based combiner for deriving independent per-call RNG
/// seeds, e.g. from (episode seed, vehicle id, step index).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    auto split = [](std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t state = a;
    std::uint64_t out = split(state);
    state ^= b + 0x9e3779b97f4a7c15ULL;
    out ^= split(state);
    state ^= c + 0xbf58476d1ce4e5b9ULL;
    out ^= split(state);
    return out;
}

}  // namespace lanefree
