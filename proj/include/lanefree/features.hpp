#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "lanefree/mlp.hpp"
#include "lanefree/types.hpp"

namespace lanefree {

inline constexpr int kFeatureDim = 62;
inline constexpr int kNeighborSlots = 4;  // per side

/// Placeholder block for unused neighbor slots: dx = 100 m puts virtual
/// neighbors well outside the 50 m visibility range.
inline constexpr std::array<double, 7> kVirtualNeighborBlock{100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};

using FeatureVector = std::array<double, kFeatureDim>;

/// Ego block {p_y, v_x, v_y, w, l, v_d} followed by 4 front and 4 back
/// neighbor blocks {dx, dy, v_x, v_y, w, l, v_d}, nearest-first.
FeatureVector vectorize_state(const PlanningState& s);

Eigen::VectorXd to_eigen(const FeatureVector& f);

struct DatasetRow {
    FeatureVector features{};
    int label = 0;
};

/// Plain text, 63 comma-separated values per row (62 features, 1 label).
void save_dataset(const std::string& path, const std::vector<DatasetRow>& rows);
std::vector<DatasetRow> load_dataset(const std::string& path);

std::vector<TrainSample> to_train_samples(const std::vector<DatasetRow>& rows);

/// Argmax of the policy network's output; ties break to the lowest index.
int greedy_policy(const MlpModel& model, const PlanningState& s);

}  // namespace lanefree
