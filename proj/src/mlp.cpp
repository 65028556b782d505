#include "lanefree/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lanefree {

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

int argmax(const Eigen::VectorXd& v) {
    int best = 0;
    for (int i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

Gradients zero_gradients(const MlpModel& model) {
    Gradients g;
    for (int l = 0; l < model.num_layers(); ++l) {
        g.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
        g.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
    }
    return g;
}

/// Forward + backward for a column-batch; dropout masks may be empty.
/// Returns the mean cross-entropy loss of the batch.
double batch_forward_backward(const MlpModel& model, const Eigen::MatrixXd& inputs,
                              const std::vector<int>& labels,
                              const std::vector<Eigen::MatrixXd>& dropout_masks,
                              Gradients& grads, int* correct) {
    const int layers = model.num_layers();
    const auto batch = static_cast<int>(inputs.cols());

    std::vector<Eigen::MatrixXd> activations(static_cast<std::size_t>(layers) + 1);
    activations[0] = inputs;
    for (int l = 0; l < layers; ++l) {
        Eigen::MatrixXd z =
            (model.weights[l] * activations[static_cast<std::size_t>(l)]).colwise() +
            model.biases[l];
        if (l < layers - 1) {
            z = z.cwiseMax(0.0);
            if (!dropout_masks.empty() && dropout_masks[static_cast<std::size_t>(l)].size() > 0) {
                z = z.cwiseProduct(dropout_masks[static_cast<std::size_t>(l)]);
            }
        }
        activations[static_cast<std::size_t>(l) + 1] = std::move(z);
    }

    // Softmax + cross-entropy on the output columns.
    Eigen::MatrixXd& logits = activations[static_cast<std::size_t>(layers)];
    double loss = 0.0;
    Eigen::MatrixXd delta(logits.rows(), batch);
    for (int i = 0; i < batch; ++i) {
        const Eigen::VectorXd p = softmax(logits.col(i));
        loss -= std::log(std::max(p[labels[static_cast<std::size_t>(i)]], 1e-300));
        if (correct != nullptr && argmax(p) == labels[static_cast<std::size_t>(i)]) {
            ++(*correct);
        }
        delta.col(i) = p;
        delta(labels[static_cast<std::size_t>(i)], i) -= 1.0;
    }
    delta /= static_cast<double>(batch);
    loss /= static_cast<double>(batch);

    for (int l = layers - 1; l >= 0; --l) {
        grads.weights[static_cast<std::size_t>(l)] =
            delta * activations[static_cast<std::size_t>(l)].transpose();
        grads.biases[static_cast<std::size_t>(l)] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd upstream = model.weights[l].transpose() * delta;
            if (!dropout_masks.empty() && dropout_masks[static_cast<std::size_t>(l) - 1].size() > 0) {
                upstream = upstream.cwiseProduct(dropout_masks[static_cast<std::size_t>(l) - 1]);
            }
            const Eigen::MatrixXd& act = activations[static_cast<std::size_t>(l)];
            delta = upstream.cwiseProduct(
                (act.array() > 0.0).cast<double>().matrix());
        }
    }
    return loss;
}

}  // namespace

MlpModel init_model(const std::vector<int>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw std::invalid_argument("need at least input and output widths");
    MlpModel model;
    model.widths = widths;
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l];
        const double limit = std::sqrt(6.0 / fan_in);
        std::uniform_real_distribution<double> dist(-limit, limit);
        Eigen::MatrixXd w(widths[l + 1], widths[l]);
        for (int r = 0; r < w.rows(); ++r) {
            for (int c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(widths[l + 1]));
    }
    return model;
}

Eigen::VectorXd forward_one(const MlpModel& model, const Eigen::VectorXd& input) {
    if (input.size() != model.input_dim()) {
        throw std::invalid_argument("input width does not match the model");
    }
    Eigen::VectorXd a = input;
    for (int l = 0; l < model.num_layers(); ++l) {
        a = model.weights[l] * a + model.biases[l];
        if (l < model.num_layers() - 1) a = a.cwiseMax(0.0);
    }
    return softmax(a);
}

std::vector<Eigen::VectorXd> forward(const MlpModel& model,
                                     const std::vector<Eigen::VectorXd>& inputs) {
    if (inputs.empty()) throw std::invalid_argument("batch must be nonempty");
    std::vector<Eigen::VectorXd> out;
    out.reserve(inputs.size());
    for (const Eigen::VectorXd& x : inputs) out.push_back(forward_one(model, x));
    return out;
}

MlpModel train(const std::vector<TrainSample>& dataset, const std::vector<int>& widths,
               const TrainConfig& cfg, TrainReport* report) {
    if (dataset.empty()) throw std::invalid_argument("dataset must be nonempty");

    std::mt19937_64 rng(cfg.seed);
    MlpModel model = init_model(widths, rng());

    // Seeded shuffle, then hold out the tail as validation.
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto val_count = static_cast<std::size_t>(
        cfg.validation_split * static_cast<double>(dataset.size()));
    const std::size_t train_count = dataset.size() - val_count;

    // Standardize inputs over the training split; the scaler is folded back
    // into the first layer before returning, so the model consumes raw inputs.
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(model.input_dim());
    for (std::size_t i = 0; i < train_count; ++i) mu += dataset[order[i]].input;
    mu /= static_cast<double>(train_count);
    Eigen::VectorXd sigma = Eigen::VectorXd::Zero(model.input_dim());
    for (std::size_t i = 0; i < train_count; ++i) {
        sigma += (dataset[order[i]].input - mu).cwiseAbs2();
    }
    sigma = (sigma / static_cast<double>(train_count)).cwiseSqrt();
    for (int j = 0; j < sigma.size(); ++j) {
        if (sigma[j] < 1e-8) sigma[j] = 1.0;
    }
    const auto standardize = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return (x - mu).cwiseQuotient(sigma);
    };

    Gradients m = zero_gradients(model);
    Gradients v = zero_gradients(model);
    Gradients grads = zero_gradients(model);
    long adam_step = 0;
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (report != nullptr) report->epochs.clear();

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr =
            cfg.learning_rate * std::pow(cfg.lr_decay, epoch / cfg.lr_decay_every);
        std::shuffle(order.begin(), order.begin() + static_cast<long>(train_count), rng);

        double loss_sum = 0.0;
        int correct = 0;
        long batches = 0;
        for (std::size_t start = 0; start < train_count; start += cfg.batch_size) {
            const auto batch = static_cast<int>(
                std::min<std::size_t>(cfg.batch_size, train_count - start));
            Eigen::MatrixXd inputs(model.input_dim(), batch);
            std::vector<int> labels(static_cast<std::size_t>(batch));
            for (int i = 0; i < batch; ++i) {
                const TrainSample& s = dataset[order[start + static_cast<std::size_t>(i)]];
                inputs.col(i) = standardize(s.input);
                labels[static_cast<std::size_t>(i)] = s.label;
            }

            // Inverted dropout after hidden layers 1 and 2.
            std::vector<Eigen::MatrixXd> masks(
                static_cast<std::size_t>(model.num_layers() - 1));
            if (cfg.dropout > 0.0) {
                for (int l = 0; l < std::min(2, model.num_layers() - 1); ++l) {
                    Eigen::MatrixXd mask(model.widths[static_cast<std::size_t>(l) + 1], batch);
                    for (int r = 0; r < mask.rows(); ++r) {
                        for (int c = 0; c < mask.cols(); ++c) {
                            mask(r, c) = unit(rng) < cfg.dropout ? 0.0 : 1.0 / (1.0 - cfg.dropout);
                        }
                    }
                    masks[static_cast<std::size_t>(l)] = std::move(mask);
                }
            }

            loss_sum += batch_forward_backward(model, inputs, labels, masks, grads, &correct);
            ++batches;

            ++adam_step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_step));
            for (int l = 0; l < model.num_layers(); ++l) {
                const auto li = static_cast<std::size_t>(l);
                m.weights[li] = beta1 * m.weights[li] + (1.0 - beta1) * grads.weights[li];
                v.weights[li] = beta2 * v.weights[li] +
                                (1.0 - beta2) * grads.weights[li].cwiseProduct(grads.weights[li]);
                model.weights[l] -=
                    lr * (m.weights[li] / bc1)
                             .cwiseQuotient(((v.weights[li] / bc2).cwiseSqrt().array() + adam_eps)
                                                .matrix());
                m.biases[li] = beta1 * m.biases[li] + (1.0 - beta1) * grads.biases[li];
                v.biases[li] = beta2 * v.biases[li] +
                               (1.0 - beta2) * grads.biases[li].cwiseProduct(grads.biases[li]);
                model.biases[l] -=
                    lr * (m.biases[li] / bc1)
                             .cwiseQuotient(((v.biases[li] / bc2).cwiseSqrt().array() + adam_eps)
                                                .matrix());
            }
        }

        EpochStats stats;
        stats.train_loss = batches > 0 ? loss_sum / static_cast<double>(batches) : 0.0;
        stats.train_accuracy =
            train_count > 0 ? static_cast<double>(correct) / static_cast<double>(train_count) : 0.0;
        int val_correct = 0;
        for (std::size_t i = train_count; i < dataset.size(); ++i) {
            const TrainSample& s = dataset[order[i]];
            if (argmax(forward_one(model, standardize(s.input))) == s.label) ++val_correct;
        }
        stats.validation_accuracy =
            val_count > 0 ? static_cast<double>(val_correct) / static_cast<double>(val_count) : 0.0;
        if (report != nullptr) {
            report->epochs.push_back(stats);
            report->final_validation_accuracy = stats.validation_accuracy;
        }
        if (cfg.verbose) {
            std::printf("epoch %3d  loss %.5f  train_acc %.4f  val_acc %.4f\n", epoch + 1,
                        stats.train_loss, stats.train_accuracy, stats.validation_accuracy);
            std::fflush(stdout);
        }
    }

    // Fold the scaler into layer 1: W x' + b with x' = (x - mu) / sigma is
    // equivalent to (W / sigma) x + (b - (W / sigma) mu) on raw inputs.
    model.weights[0] = model.weights[0] * sigma.cwiseInverse().asDiagonal();
    model.biases[0] -= model.weights[0] * mu;
    return model;
}

double gradient_check(const MlpModel& model, const Eigen::VectorXd& input, int label) {
    MlpModel probe = model;
    Gradients grads = zero_gradients(probe);
    Eigen::MatrixXd x(input.size(), 1);
    x.col(0) = input;
    const std::vector<int> labels{label};

    batch_forward_backward(probe, x, labels, {}, grads, nullptr);

    auto loss_at = [&]() {
        Gradients scratch = zero_gradients(probe);
        return batch_forward_backward(probe, x, labels, {}, scratch, nullptr);
    };

    const double h = 1e-5;
    double max_err = 0.0;
    std::mt19937_64 rng(12345);
    for (int l = 0; l < probe.num_layers(); ++l) {
        const auto li = static_cast<std::size_t>(l);
        const long total = probe.weights[l].size();
        std::uniform_int_distribution<long> pick(0, total - 1);
        const int samples = static_cast<int>(std::min<long>(100, total));
        for (int k = 0; k < samples; ++k) {
            const long idx = pick(rng);
            double* w = probe.weights[l].data() + idx;
            const double saved = *w;
            *w = saved + h;
            const double lp = loss_at();
            *w = saved - h;
            const double lm = loss_at();
            *w = saved;
            const double numeric = (lp - lm) / (2.0 * h);
            const double analytic = grads.weights[li].data()[idx];
            const double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
            max_err = std::max(max_err, std::abs(numeric - analytic) / denom);
        }
    }
    return max_err;
}

void save_model(const std::string& path, const MlpModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
    out << "lanefree-mlp 1\nwidths";
    for (int w : model.widths) out << ' ' << w;
    out << '\n';
    char buf[64];
    for (int l = 0; l < model.num_layers(); ++l) {
        out << "W " << l << ' ' << model.weights[l].rows() << ' ' << model.weights[l].cols()
            << '\n';
        for (long i = 0; i < model.weights[l].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", model.weights[l].data()[i]);
            out << buf << (i + 1 == model.weights[l].size() ? '\n' : ' ');
        }
        out << "b " << l << ' ' << model.biases[l].size() << '\n';
        for (long i = 0; i < model.biases[l].size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", model.biases[l].data()[i]);
            out << buf << (i + 1 == model.biases[l].size() ? '\n' : ' ');
        }
    }
    if (!out) throw std::runtime_error("failed writing model file: " + path);
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "lanefree-mlp" || version != 1) {
        throw std::runtime_error("unrecognized model format in " + path);
    }
    std::string token;
    in >> token;
    if (token != "widths") throw std::runtime_error("malformed model file: " + path);
    std::string rest;
    std::getline(in, rest);
    std::istringstream widths_line(rest);
    MlpModel model;
    int w;
    while (widths_line >> w) model.widths.push_back(w);
    if (model.widths.size() < 2) throw std::runtime_error("malformed widths in " + path);

    for (std::size_t l = 0; l + 1 < model.widths.size(); ++l) {
        int layer = 0;
        long rows = 0, cols = 0, n = 0;
        in >> token >> layer >> rows >> cols;
        if (token != "W" || rows != model.widths[l + 1] || cols != model.widths[l]) {
            throw std::runtime_error("malformed weight header in " + path);
        }
        Eigen::MatrixXd weight(rows, cols);
        for (long i = 0; i < weight.size(); ++i) in >> weight.data()[i];
        model.weights.push_back(std::move(weight));
        in >> token >> layer >> n;
        if (token != "b" || n != model.widths[l + 1]) {
            throw std::runtime_error("malformed bias header in " + path);
        }
        Eigen::VectorXd bias(n);
        for (long i = 0; i < n; ++i) in >> bias[i];
        model.biases.push_back(std::move(bias));
    }
    if (!in) throw std::runtime_error("truncated model file: " + path);
    return model;
}

}  // namespace lanefree
