#include "lanefree/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lanefree {

CalibrationReport reliability_report(const MlpModel& model,
                                     const std::vector<DatasetRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("dataset must be nonempty");
    CalibrationReport report;
    std::array<double, 10> conf_sum{};
    std::array<long, 10> correct{};

    for (const DatasetRow& row : rows) {
        const Eigen::VectorXd p = forward_one(model, to_eigen(row.features));
        int predicted = 0;
        for (int i = 1; i < p.size(); ++i) {
            if (p[i] > p[predicted]) predicted = i;
        }
        const double confidence = p[predicted];
        // bin ceil(p*10), i.e. ((m-1)/10, m/10]
        int bin = static_cast<int>(std::ceil(confidence * 10.0));
        bin = std::clamp(bin, 1, 10);
        const auto b = static_cast<std::size_t>(bin - 1);
        report.bins[b].count += 1;
        conf_sum[b] += confidence;
        if (predicted == row.label) {
            correct[b] += 1;
            report.top1_accuracy += 1.0;
        }
    }

    report.total = static_cast<long>(rows.size());
    report.top1_accuracy /= static_cast<double>(report.total);
    for (std::size_t b = 0; b < 10; ++b) {
        if (report.bins[b].count > 0) {
            report.bins[b].accuracy =
                static_cast<double>(correct[b]) / static_cast<double>(report.bins[b].count);
            report.bins[b].confidence = conf_sum[b] / static_cast<double>(report.bins[b].count);
            report.ece += (static_cast<double>(report.bins[b].count) /
                           static_cast<double>(report.total)) *
                          std::abs(report.bins[b].accuracy - report.bins[b].confidence);
        }
    }
    return report;
}

void write_calibration_report(const std::string& path, const CalibrationReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open calibration report for writing: " + path);
    out.precision(6);
    out << "bin,count,accuracy,confidence\n";
    for (std::size_t b = 0; b < 10; ++b) {
        out << (b + 1) << ',' << report.bins[b].count << ',' << report.bins[b].accuracy << ','
            << report.bins[b].confidence << '\n';
    }
    out << "# ece=" << report.ece << " top1_accuracy=" << report.top1_accuracy
        << " total=" << report.total << '\n';
}

}  // namespace lanefree
