#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace lanefree {

/// Fully-connected classifier: ReLU hidden layers, softmax output.
/// All parameters are double precision.
struct MlpModel {
    std::vector<int> widths;                 // e.g. 62, 512, 256, 128, 15
    std::vector<Eigen::MatrixXd> weights;    // weights[i]: widths[i+1] x widths[i]
    std::vector<Eigen::VectorXd> biases;

    int input_dim() const { return widths.front(); }
    int output_dim() const { return widths.back(); }
    int num_layers() const { return static_cast<int>(weights.size()); }
};

inline const std::vector<int> kPolicyWidths{62, 512, 256, 128, 15};

/// Fan-in-scaled uniform initialization, seeded.
MlpModel init_model(const std::vector<int>& widths, std::uint64_t seed);

/// Deterministic inference for one input (no dropout).
Eigen::VectorXd forward_one(const MlpModel& model, const Eigen::VectorXd& input);

/// Batch inference: row i is exactly forward_one of input i.
std::vector<Eigen::VectorXd> forward(const MlpModel& model,
                                     const std::vector<Eigen::VectorXd>& inputs);

struct TrainSample {
    Eigen::VectorXd input;
    int label = 0;
};

struct TrainConfig {
    int batch_size = 64;
    int epochs = 50;
    double learning_rate = 1e-3;
    double lr_decay = 0.5;       // multiplier applied every lr_decay_every epochs
    int lr_decay_every = 15;
    double dropout = 0.3;        // after hidden layers 1 and 2, training only
    double validation_split = 0.1;
    std::uint64_t seed = 0;
    bool verbose = false;        // print per-epoch stats to stdout
};

struct EpochStats {
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double final_validation_accuracy = 0.0;
};

/// Cross-entropy training with Adam, per-epoch shuffling, inverted
/// dropout, and step learning-rate decay.
MlpModel train(const std::vector<TrainSample>& dataset, const std::vector<int>& widths,
               const TrainConfig& cfg, TrainReport* report = nullptr);

/// Maximum relative error (with a small absolute floor) between analytic
/// and central-finite-difference gradients over a sampled set of weights
/// in every layer.
double gradient_check(const MlpModel& model, const Eigen::VectorXd& input, int label);

/// Versioned text container; values round-trip exactly at 17 significant digits.
void save_model(const std::string& path, const MlpModel& model);
MlpModel load_model(const std::string& path);

}  // namespace lanefree
