#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lanefree/calibration.hpp"
#include "lanefree/config.hpp"
#include "lanefree/selfplay.hpp"

namespace py = pybind11;
using namespace lanefree;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Lane-free highway traffic simulation with MCTS planning";

    py::class_<VehicleState>(m, "VehicleState")
        .def(py::init<>())
        .def_readwrite("id", &VehicleState::id)
        .def_readwrite("px", &VehicleState::px)
        .def_readwrite("py", &VehicleState::py)
        .def_readwrite("vx", &VehicleState::vx)
        .def_readwrite("vy", &VehicleState::vy)
        .def_readwrite("length", &VehicleState::length)
        .def_readwrite("width", &VehicleState::width)
        .def_readwrite("desired_speed", &VehicleState::desired_speed);

    py::class_<Action>(m, "Action")
        .def(py::init<>())
        .def_readwrite("ax", &Action::ax)
        .def_readwrite("ay", &Action::ay);

    py::class_<RoadGeometry>(m, "RoadGeometry")
        .def(py::init<>())
        .def_readwrite("length", &RoadGeometry::length)
        .def_readwrite("width", &RoadGeometry::width);

    py::class_<FieldParams>(m, "FieldParams")
        .def(py::init<>())
        .def_readwrite("time_headway", &FieldParams::time_headway)
        .def_readwrite("margin_x", &FieldParams::margin_x)
        .def_readwrite("margin_y", &FieldParams::margin_y)
        .def_readwrite("d_max", &FieldParams::d_max);

    py::class_<PlanningState>(m, "PlanningState")
        .def(py::init<>())
        .def_readwrite("ego", &PlanningState::ego)
        .def_readwrite("neighbors", &PlanningState::neighbors)
        .def_readwrite("depth", &PlanningState::depth)
        .def_readwrite("terminal", &PlanningState::terminal);

    m.def("action_from_index", &action_from_index);
    m.def("action_index", &action_index);
    m.def("step_kinematics", &step_kinematics);
    m.def("step_neutral", &step_neutral);
    m.def("rect_overlap", &rect_overlap);
    m.def("out_of_bounds", &out_of_bounds);
    m.def("field_influence", &field_influence);

    py::class_<RewardParams>(m, "RewardParams")
        .def(py::init<>())
        .def_readwrite("collision_penalty", &RewardParams::collision_penalty)
        .def_readwrite("epsilon", &RewardParams::epsilon)
        .def_readwrite("alpha", &RewardParams::alpha)
        .def_readwrite("beta", &RewardParams::beta)
        .def_readwrite("c", &RewardParams::c)
        .def_readwrite("field", &RewardParams::field);

    m.def("reward_collision", &reward_collision, py::arg("steps_after_root"), py::arg("penalty"),
          py::arg("collided") = true);
    m.def("reward_field", &reward_field);
    m.def("reward_speed", &reward_speed);
    m.def("reward_total", &reward_total);

    py::class_<MctsConfig>(m, "MctsConfig")
        .def(py::init<>())
        .def_readwrite("iterations", &MctsConfig::iterations)
        .def_readwrite("exploration", &MctsConfig::exploration)
        .def_readwrite("min_visits", &MctsConfig::min_visits)
        .def_readwrite("max_rollout_depth", &MctsConfig::max_rollout_depth)
        .def_readwrite("isotropic", &MctsConfig::isotropic)
        .def_readwrite("seed", &MctsConfig::seed);

    m.def("simulate_transition", &simulate_transition);
    m.def("plan", &plan, py::arg("state"), py::arg("config"), py::arg("reward"),
          py::arg("road") = RoadGeometry{}, py::arg("dt") = 0.25);

    py::class_<PuctConfig>(m, "PuctConfig")
        .def(py::init<>())
        .def_readwrite("c_b", &PuctConfig::c_b)
        .def_readwrite("c_pb", &PuctConfig::c_pb)
        .def_readwrite("prediction_levels", &PuctConfig::prediction_levels)
        .def_readwrite("base", &PuctConfig::base);

    m.def("prediction_tree_size", &prediction_tree_size);
    m.def("plan_guided", &plan_guided);

    py::class_<MlpModel>(m, "MlpModel")
        .def(py::init<>())
        .def_readwrite("widths", &MlpModel::widths);

    m.def("init_model", &init_model);
    m.def("forward_one", &forward_one);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);
    m.def("vectorize_state",
          [](const PlanningState& s) { return std::vector<double>(vectorize_state(s).begin(),
                                                                  vectorize_state(s).end()); });
    m.def("greedy_policy", &greedy_policy);

    py::class_<EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("sim_duration", &EnvConfig::sim_duration)
        .def_readwrite("time_step", &EnvConfig::time_step)
        .def_readwrite("road", &EnvConfig::road)
        .def_readwrite("demand_flow", &EnvConfig::demand_flow)
        .def_readwrite("departure_speed", &EnvConfig::departure_speed)
        .def_readwrite("desired_speed_min", &EnvConfig::desired_speed_min)
        .def_readwrite("desired_speed_max", &EnvConfig::desired_speed_max)
        .def_readwrite("vehicle_length", &EnvConfig::vehicle_length)
        .def_readwrite("vehicle_width", &EnvConfig::vehicle_width)
        .def_readwrite("visibility", &EnvConfig::visibility)
        .def_readwrite("seed", &EnvConfig::seed);

    py::class_<EpisodeMetrics>(m, "EpisodeMetrics")
        .def(py::init<>())
        .def_readwrite("collisions", &EpisodeMetrics::collisions)
        .def_readwrite("speed_average", &EpisodeMetrics::speed_average)
        .def_readwrite("delay_average", &EpisodeMetrics::delay_average)
        .def_readwrite("vehicles_entered", &EpisodeMetrics::vehicles_entered)
        .def_readwrite("vehicles_exited", &EpisodeMetrics::vehicles_exited);

    py::class_<Env>(m, "Env")
        .def(py::init<const EnvConfig&>())
        .def("spawn_due_vehicles", &Env::spawn_due_vehicles)
        .def("observe", &Env::observe)
        .def("apply_joint_actions", &Env::apply_joint_actions)
        .def("vehicles", &Env::vehicles)
        .def("time", &Env::time)
        .def("metrics", &Env::metrics);

    py::class_<StepReport>(m, "StepReport")
        .def_readonly("collisions", &StepReport::collisions)
        .def_readonly("removed_ids", &StepReport::removed_ids)
        .def_readonly("exited_ids", &StepReport::exited_ids);

    m.def("compute_delay", &compute_delay);

    m.def("run_episode",
          [](Env& env, const Planner& planner, double duration, bool isotropic) {
              RunOptions options;
              options.isotropic = isotropic;
              return run_episode(env, planner, duration, options);
          },
          py::arg("env"), py::arg("planner"), py::arg("duration"), py::arg("isotropic") = true);
}
