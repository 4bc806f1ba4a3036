#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "egm/signal.hpp"

namespace egm::metrics {

// 3x3 confusion matrix; rows are truth, columns are prediction, both in Label
// order (normal, abnormal, unclassified).
struct ConfusionMatrix {
    std::array<std::array<int64_t, 3>, 3> counts{};

    int64_t total() const;
    int64_t diagonal() const;
    int64_t row_sum(int r) const;
    int64_t col_sum(int c) const;
};

// Throws LengthMismatch if the sequences differ in length, EmptyInput if both
// are empty.
ConfusionMatrix confusion(const std::vector<Label>& truth, const std::vector<Label>& pred);
ConfusionMatrix confusion(const std::vector<std::pair<Label, Label>>& truth_pred);

// One-vs-all metrics. A zero denominator leaves the value 0 and clears the
// `defined` flag instead of dividing.
struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int64_t support = 0; // row sum: number of true instances of the class
    bool precision_defined = true;
    bool recall_defined = true;
    bool f1_defined = true;
};

struct MetricsReport {
    std::array<ClassMetrics, 3> per_class{};
    double accuracy = 0.0; // diagonal / total
};

// Throws EmptyMatrix when the matrix total is zero.
MetricsReport compute_metrics(const ConfusionMatrix& cm);

// Display rounding: 2 decimal places, halves away from zero (0.625 → "0.63").
std::string format_2dp(double v);

// Fixed-width text table, values at 2dp (the format the golden fixtures pin
// down). CSV and JSON carry full-precision values and round-trip losslessly;
// undefined metrics are empty CSV cells / JSON null.
std::string render_text(const ConfusionMatrix& cm, const MetricsReport& mr);
std::string render_csv(const ConfusionMatrix& cm, const MetricsReport& mr);
std::string render_json(const ConfusionMatrix& cm, const MetricsReport& mr);

struct Misclassified {
    std::string signal_id;
    Label truth = Label::Normal;
    Label predicted = Label::Normal;
};

// CSV dump of misclassified records, sorted by signal_id.
std::string misclassified_csv(std::vector<Misclassified> rows);

} // namespace egm::metrics
