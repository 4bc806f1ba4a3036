#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "egm/errors.hpp"

namespace egm {

// Canonical sampling rate. Signals at other rates are resampled on load, so one
// millisecond is one sample everywhere past the I/O boundary.
inline constexpr double kCanonicalRateHz = 1000.0;

// Fixed class order; used for confusion-matrix axes and network outputs.
enum class Label : int { Normal = 0, Abnormal = 1, Unclassified = 2 };

inline constexpr int kNumClasses = 3;

const char* to_string(Label l);
Label label_from_string(const std::string& s); // throws DataError on unknown text

struct EgmSignal {
    std::string signal_id;
    std::string patient_id;
    double sampling_rate_hz = kCanonicalRateHz;
    double cycle_length_ms = 0.0; // patient's pacing cycle length
    std::vector<double> samples;

    double cycle_length_samples() const {
        return cycle_length_ms * sampling_rate_hz / 1000.0;
    }
    // throws DataError unless samples are nonempty and finite and
    // cycle_length_ms > 0
    void validate() const;
};

struct LabeledSignal {
    EgmSignal signal;
    std::optional<Label> label;
    // One entry per annotator; absent when the record was never annotated.
    std::optional<std::vector<Label>> annotator_labels;

    // throws DataError if a present label disagrees with present unanimous
    // annotator labels
    void validate() const;
};

enum class Split : int { Train = 0, Validation = 1, Test = 2 };

const char* to_string(Split s);

// Patient-level split assignment. Kept as three explicit sets so that overlap
// and coverage are checkable properties rather than impossibilities.
struct SplitAssignment {
    std::set<std::string> train;
    std::set<std::string> validation;
    std::set<std::string> test;
};

struct Dataset {
    std::vector<LabeledSignal> records;
    SplitAssignment split_assignment;
};

struct SplitRecords {
    std::vector<LabeledSignal> train;
    std::vector<LabeledSignal> validation;
    std::vector<LabeledSignal> test;
};

// Partitions records by patient. Throws OverlappingSplit if a patient is
// assigned to more than one split, UnassignedPatient if a record's patient is
// in none.
SplitRecords split_by_patient(const Dataset& ds);

// Keeps only records whose annotators all agree, and sets `label` to the
// unanimous value. Order is preserved. Throws MissingAnnotations if any record
// lacks annotator labels.
std::vector<LabeledSignal> unanimous_filter(const std::vector<LabeledSignal>& records);

} // namespace egm
