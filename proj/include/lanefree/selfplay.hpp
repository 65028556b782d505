#pragma once

#include <cstddef>
#include <vector>

#include "lanefree/env.hpp"
#include "lanefree/features.hpp"
#include "lanefree/mcts.hpp"
#include "lanefree/reward.hpp"

namespace lanefree {

/// Runs episodes where every vehicle plans with (nudging-aware) MCTS and
/// records one (features, chosen action) row per vehicle per step.
/// Episodes are chained with consecutive environment seeds until
/// `rows_target` rows are collected.
std::vector<DatasetRow> collect_selfplay(const EnvConfig& env_cfg, const MctsConfig& mcts_cfg,
                                         const RewardParams& params, std::size_t rows_target);

}  // namespace lanefree
