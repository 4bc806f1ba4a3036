#include "egm/signal.hpp"

#include <algorithm>
#include <cmath>

namespace egm {

const char* to_string(Label l) {
    switch (l) {
        case Label::Normal: return "normal";
        case Label::Abnormal: return "abnormal";
        case Label::Unclassified: return "unclassified";
    }
    return "unclassified";
}

Label label_from_string(const std::string& s) {
    if (s == "normal") return Label::Normal;
    if (s == "abnormal") return Label::Abnormal;
    if (s == "unclassified") return Label::Unclassified;
    throw DataError("unknown label string: '" + s + "'");
}

const char* to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Validation: return "validation";
        case Split::Test: return "test";
    }
    return "train";
}

void EgmSignal::validate() const {
    if (samples.empty()) throw DataError("signal '" + signal_id + "' has no samples");
    for (double v : samples) {
        if (!std::isfinite(v))
            throw DataError("signal '" + signal_id + "' contains a non-finite sample");
    }
    if (!(cycle_length_ms > 0.0))
        throw DataError("signal '" + signal_id + "' has non-positive cycle_length_ms");
    if (!(sampling_rate_hz > 0.0))
        throw DataError("signal '" + signal_id + "' has non-positive sampling_rate_hz");
}

void LabeledSignal::validate() const {
    signal.validate();
    if (label && annotator_labels && !annotator_labels->empty()) {
        bool unanimous = std::all_of(annotator_labels->begin(), annotator_labels->end(),
                                     [&](Label a) { return a == annotator_labels->front(); });
        if (unanimous && annotator_labels->front() != *label)
            throw DataError("signal '" + signal.signal_id +
                            "': label disagrees with unanimous annotator labels");
    }
}

SplitRecords split_by_patient(const Dataset& ds) {
    const auto& sa = ds.split_assignment;
    for (const auto& p : sa.train) {
        if (sa.validation.count(p) || sa.test.count(p))
            throw OverlappingSplit("patient '" + p + "' assigned to more than one split");
    }
    for (const auto& p : sa.validation) {
        if (sa.test.count(p))
            throw OverlappingSplit("patient '" + p + "' assigned to more than one split");
    }

    SplitRecords out;
    for (const auto& rec : ds.records) {
        const std::string& pid = rec.signal.patient_id;
        if (sa.train.count(pid)) {
            out.train.push_back(rec);
        } else if (sa.validation.count(pid)) {
            out.validation.push_back(rec);
        } else if (sa.test.count(pid)) {
            out.test.push_back(rec);
        } else {
            throw UnassignedPatient("patient '" + pid + "' is not in the split assignment");
        }
    }
    return out;
}

std::vector<LabeledSignal> unanimous_filter(const std::vector<LabeledSignal>& records) {
    std::vector<LabeledSignal> kept;
    kept.reserve(records.size());
    for (const auto& rec : records) {
        if (!rec.annotator_labels || rec.annotator_labels->empty())
            throw MissingAnnotations("signal '" + rec.signal.signal_id +
                                     "' has no annotator labels");
        const auto& al = *rec.annotator_labels;
        bool unanimous =
            std::all_of(al.begin(), al.end(), [&](Label a) { return a == al.front(); });
        if (!unanimous) continue;
        LabeledSignal r = rec;
        r.label = al.front();
        kept.push_back(std::move(r));
    }
    return kept;
}

} // namespace egm
