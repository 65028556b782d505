#pragma once

#include <array>
#include <string>
#include <vector>

#include "lanefree/features.hpp"
#include "lanefree/mlp.hpp"

namespace lanefree {

/// Reliability-diagram summary over 10 top-class-confidence bins
/// ((m-1)/10, m/10].
struct CalibrationReport {
    struct Bin {
        long count = 0;
        double accuracy = 0.0;
        double confidence = 0.0;
    };
    std::array<Bin, 10> bins{};
    double ece = 0.0;
    double top1_accuracy = 0.0;
    long total = 0;
};

CalibrationReport reliability_report(const MlpModel& model, const std::vector<DatasetRow>& rows);

/// Text table (bin, count, accuracy, confidence) plus an ECE/accuracy summary.
void write_calibration_report(const std::string& path, const CalibrationReport& report);

}  // namespace lanefree
