#include "egm/dataset_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "egm/preprocess.hpp"

namespace egm {

using nlohmann::json;

namespace {

LabeledSignal record_from_json(const json& j, size_t line_no) {
    auto fail = [&](const std::string& what) -> DataError {
        return DataError("line " + std::to_string(line_no) + ": " + what);
    };
    if (!j.is_object()) throw fail("record is not a JSON object");
    for (const char* key :
         {"signal_id", "patient_id", "sampling_rate_hz", "cycle_length_ms", "samples", "label",
          "annotator_labels"}) {
        if (!j.contains(key)) throw fail(std::string("missing field '") + key + "'");
    }

    LabeledSignal rec;
    try {
        rec.signal.signal_id = j.at("signal_id").get<std::string>();
        rec.signal.patient_id = j.at("patient_id").get<std::string>();
        rec.signal.sampling_rate_hz = j.at("sampling_rate_hz").get<double>();
        rec.signal.cycle_length_ms = j.at("cycle_length_ms").get<double>();
        rec.signal.samples = j.at("samples").get<std::vector<double>>();
        if (!j.at("label").is_null())
            rec.label = label_from_string(j.at("label").get<std::string>());
        if (!j.at("annotator_labels").is_null()) {
            std::vector<Label> al;
            for (const auto& s : j.at("annotator_labels"))
                al.push_back(label_from_string(s.get<std::string>()));
            rec.annotator_labels = std::move(al);
        }
    } catch (const DataError& e) {
        throw fail(e.what()); // label_from_string: unknown label text
    } catch (const json::exception& e) {
        throw fail(e.what());
    }

    if (rec.signal.sampling_rate_hz != kCanonicalRateHz) {
        rec.signal.samples =
            resample_linear(rec.signal.samples, rec.signal.sampling_rate_hz, kCanonicalRateHz);
        rec.signal.sampling_rate_hz = kCanonicalRateHz;
    }
    try {
        rec.validate();
    } catch (const DataError& e) {
        throw fail(e.what());
    }
    return rec;
}

json record_to_json(const LabeledSignal& rec) {
    json j;
    j["signal_id"] = rec.signal.signal_id;
    j["patient_id"] = rec.signal.patient_id;
    j["sampling_rate_hz"] = rec.signal.sampling_rate_hz;
    j["cycle_length_ms"] = rec.signal.cycle_length_ms;
    j["samples"] = rec.signal.samples;
    if (rec.label)
        j["label"] = to_string(*rec.label);
    else
        j["label"] = nullptr;
    if (rec.annotator_labels) {
        json al = json::array();
        for (Label l : *rec.annotator_labels) al.push_back(to_string(l));
        j["annotator_labels"] = al;
    } else {
        j["annotator_labels"] = nullptr;
    }
    return j;
}

} // namespace

std::vector<LabeledSignal> read_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::vector<LabeledSignal> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("'" + path + "' line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
        }
        records.push_back(record_from_json(j, line_no));
    }
    return records;
}

void write_jsonl(const std::string& path, const std::vector<LabeledSignal>& records) {
    std::ofstream out(path, std::ios::binary); // binary: no newline translation
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const auto& rec : records) {
        out << record_to_json(rec).dump() << '\n';
    }
    if (!out) throw IoError("write to '" + path + "' failed");
}

} // namespace egm
