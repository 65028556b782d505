#include "lanefree/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lanefree {

FeatureVector vectorize_state(const PlanningState& s) {
    FeatureVector f{};
    f[0] = s.ego.py;
    f[1] = s.ego.vx;
    f[2] = s.ego.vy;
    f[3] = s.ego.width;
    f[4] = s.ego.length;
    f[5] = s.ego.desired_speed;

    std::vector<const VehicleState*> front, back;
    for (const VehicleState& nb : s.neighbors) {
        (nb.px - s.ego.px >= 0.0 ? front : back).push_back(&nb);
    }
    auto nearer = [&](const VehicleState* a, const VehicleState* b) {
        const double da = std::abs(a->px - s.ego.px);
        const double db = std::abs(b->px - s.ego.px);
        if (da != db) return da < db;
        return a->id < b->id;
    };
    std::sort(front.begin(), front.end(), nearer);
    std::sort(back.begin(), back.end(), nearer);

    int offset = 6;
    for (const auto* side : {&front, &back}) {
        for (int slot = 0; slot < kNeighborSlots; ++slot) {
            if (slot < static_cast<int>(side->size())) {
                const VehicleState& nb = *(*side)[static_cast<std::size_t>(slot)];
                f[offset + 0] = nb.px - s.ego.px;
                f[offset + 1] = nb.py - s.ego.py;
                f[offset + 2] = nb.vx;
                f[offset + 3] = nb.vy;
                f[offset + 4] = nb.width;
                f[offset + 5] = nb.length;
                f[offset + 6] = nb.desired_speed;
            } else {
                std::copy(kVirtualNeighborBlock.begin(), kVirtualNeighborBlock.end(),
                          f.begin() + offset);
            }
            offset += 7;
        }
    }
    return f;
}

Eigen::VectorXd to_eigen(const FeatureVector& f) {
    Eigen::VectorXd x(kFeatureDim);
    for (int i = 0; i < kFeatureDim; ++i) x[i] = f[static_cast<std::size_t>(i)];
    return x;
}

void save_dataset(const std::string& path, const std::vector<DatasetRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open dataset file for writing: " + path);
    char buf[64];
    for (const DatasetRow& row : rows) {
        for (double v : row.features) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << ',';
        }
        out << row.label << '\n';
    }
    if (!out) throw std::runtime_error("failed writing dataset file: " + path);
}

std::vector<DatasetRow> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::vector<DatasetRow> rows;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.find_first_not_of("0123456789+-.eE, \r") != std::string::npos) {
            continue;  // optional header row
        }
        std::istringstream ss(line);
        DatasetRow row;
        std::string field;
        int count = 0;
        bool bad = false;
        while (std::getline(ss, field, ',')) {
            try {
                if (count < kFeatureDim) {
                    row.features[static_cast<std::size_t>(count)] = std::stod(field);
                } else if (count == kFeatureDim) {
                    row.label = std::stoi(field);
                }
            } catch (const std::exception&) {
                bad = true;
            }
            ++count;
        }
        if (bad || count != kFeatureDim + 1 || row.label < 0 || row.label >= kNumActions) {
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": expected 62 reals and a label in 0..14");
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<TrainSample> to_train_samples(const std::vector<DatasetRow>& rows) {
    std::vector<TrainSample> samples;
    samples.reserve(rows.size());
    for (const DatasetRow& row : rows) {
        samples.push_back(TrainSample{to_eigen(row.features), row.label});
    }
    return samples;
}

int greedy_policy(const MlpModel& model, const PlanningState& s) {
    const Eigen::VectorXd p = forward_one(model, to_eigen(vectorize_state(s)));
    int best = 0;
    for (int i = 1; i < p.size(); ++i) {
        if (p[i] > p[best]) best = i;
    }
    return best;
}

}  // namespace lanefree
