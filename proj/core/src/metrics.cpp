#include "egm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace egm::metrics {

int64_t ConfusionMatrix::total() const {
    int64_t t = 0;
    for (const auto& row : counts)
        for (int64_t v : row) t += v;
    return t;
}

int64_t ConfusionMatrix::diagonal() const {
    return counts[0][0] + counts[1][1] + counts[2][2];
}

int64_t ConfusionMatrix::row_sum(int r) const {
    return counts[r][0] + counts[r][1] + counts[r][2];
}

int64_t ConfusionMatrix::col_sum(int c) const {
    return counts[0][c] + counts[1][c] + counts[2][c];
}

ConfusionMatrix confusion(const std::vector<Label>& truth, const std::vector<Label>& pred) {
    if (truth.size() != pred.size())
        throw LengthMismatch("truth and prediction sequences differ in length");
    if (truth.empty()) throw EmptyInput("no (truth, prediction) pairs to count");
    ConfusionMatrix cm;
    for (size_t i = 0; i < truth.size(); ++i)
        ++cm.counts[static_cast<int>(truth[i])][static_cast<int>(pred[i])];
    return cm;
}

ConfusionMatrix confusion(const std::vector<std::pair<Label, Label>>& truth_pred) {
    if (truth_pred.empty()) throw EmptyInput("no (truth, prediction) pairs to count");
    ConfusionMatrix cm;
    for (const auto& [truth, pred] : truth_pred)
        ++cm.counts[static_cast<int>(truth)][static_cast<int>(pred)];
    return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
    const int64_t total = cm.total();
    if (total <= 0) throw EmptyMatrix("confusion matrix has no counts");
    MetricsReport mr;
    for (int c = 0; c < 3; ++c) {
        ClassMetrics& m = mr.per_class[c];
        const double tp = static_cast<double>(cm.counts[c][c]);
        const int64_t col = cm.col_sum(c);
        const int64_t row = cm.row_sum(c);
        m.support = row;
        if (col > 0) {
            m.precision = tp / static_cast<double>(col);
        } else {
            m.precision = 0.0;
            m.precision_defined = false;
        }
        if (row > 0) {
            m.recall = tp / static_cast<double>(row);
        } else {
            m.recall = 0.0;
            m.recall_defined = false;
        }
        if (m.precision_defined && m.recall_defined && m.precision + m.recall > 0.0) {
            m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
        } else {
            m.f1 = 0.0;
            m.f1_defined = false;
        }
    }
    mr.accuracy = static_cast<double>(cm.diagonal()) / static_cast<double>(total);
    return mr;
}

std::string format_2dp(double v) {
    // llround rounds halves away from zero, which is the display convention
    // the fixtures pin down (e.g. 0.625 → 0.63).
    long long cents = std::llround(v * 100.0);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%lld.%02lld", cents < 0 ? "-" : "",
                  std::llabs(cents) / 100, std::llabs(cents) % 100);
    return buf;
}

namespace {

const char* kClassNames[3] = {"normal", "abnormal", "unclassified"};

std::string metric_cell(double v, bool defined) { return defined ? format_2dp(v) : "n/a"; }

} // namespace

std::string render_text(const ConfusionMatrix& cm, const MetricsReport& mr) {
    std::ostringstream os;
    char line[160];
    os << "Confusion matrix (rows = truth, columns = prediction)\n";
    std::snprintf(line, sizeof(line), "%-14s %12s %12s %12s\n", "", "normal", "abnormal",
                  "unclassified");
    os << line;
    for (int r = 0; r < 3; ++r) {
        std::snprintf(line, sizeof(line), "%-14s %12lld %12lld %12lld\n", kClassNames[r],
                      static_cast<long long>(cm.counts[r][0]),
                      static_cast<long long>(cm.counts[r][1]),
                      static_cast<long long>(cm.counts[r][2]));
        os << line;
    }
    os << "\nPer-class metrics\n";
    std::snprintf(line, sizeof(line), "%-14s %12s %12s %12s\n", "class", "precision", "recall",
                  "f1");
    os << line;
    for (int c = 0; c < 3; ++c) {
        const ClassMetrics& m = mr.per_class[c];
        std::snprintf(line, sizeof(line), "%-14s %12s %12s %12s\n", kClassNames[c],
                      metric_cell(m.precision, m.precision_defined).c_str(),
                      metric_cell(m.recall, m.recall_defined).c_str(),
                      metric_cell(m.f1, m.f1_defined).c_str());
        os << line;
    }
    std::snprintf(line, sizeof(line), "%-14s %12s\n", "accuracy",
                  format_2dp(mr.accuracy).c_str());
    os << line;
    return os.str();
}

namespace {

std::string full_precision(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string render_csv(const ConfusionMatrix& cm, const MetricsReport& mr) {
    std::ostringstream os;
    os << "class,support,pred_normal,pred_abnormal,pred_unclassified,precision,recall,f1\n";
    for (int c = 0; c < 3; ++c) {
        const ClassMetrics& m = mr.per_class[c];
        os << kClassNames[c] << ',' << m.support << ',' << cm.counts[c][0] << ','
           << cm.counts[c][1] << ',' << cm.counts[c][2] << ','
           << (m.precision_defined ? full_precision(m.precision) : "") << ','
           << (m.recall_defined ? full_precision(m.recall) : "") << ','
           << (m.f1_defined ? full_precision(m.f1) : "") << '\n';
    }
    os << "accuracy,,,,," << full_precision(mr.accuracy) << ",,\n";
    return os.str();
}

std::string render_json(const ConfusionMatrix& cm, const MetricsReport& mr) {
    nlohmann::json j;
    j["confusion"] = {{"order", {"normal", "abnormal", "unclassified"}},
                      {"rows_are", "truth"},
                      {"counts", cm.counts}};
    nlohmann::json per;
    for (int c = 0; c < 3; ++c) {
        const ClassMetrics& m = mr.per_class[c];
        nlohmann::json e;
        e["support"] = m.support;
        e["precision"] = m.precision_defined ? nlohmann::json(m.precision) : nullptr;
        e["recall"] = m.recall_defined ? nlohmann::json(m.recall) : nullptr;
        e["f1"] = m.f1_defined ? nlohmann::json(m.f1) : nullptr;
        per[kClassNames[c]] = e;
    }
    j["per_class"] = per;
    j["accuracy"] = mr.accuracy;
    return j.dump(2) + "\n";
}

std::string misclassified_csv(std::vector<Misclassified> rows) {
    std::sort(rows.begin(), rows.end(),
              [](const Misclassified& a, const Misclassified& b) {
                  return a.signal_id < b.signal_id;
              });
    std::ostringstream os;
    os << "signal_id,truth,predicted\n";
    for (const auto& r : rows)
        os << r.signal_id << ',' << to_string(r.truth) << ',' << to_string(r.predicted) << '\n';
    return os.str();
}

} // namespace egm::metrics
