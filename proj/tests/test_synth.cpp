#include "doctest.h"

#include <egm/rng.hpp>
#include <egm/rules.hpp>
#include <egm/signal.hpp>
#include <egm/synth.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

using namespace egm;
using namespace egm::synth;

namespace {

GeneratorConfig small_config(uint64_t seed = 7) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.n_patients = 4;
    cfg.signals_per_patient = 6;
    return cfg;
}

bool same_records(const std::vector<LabeledSignal>& a, const std::vector<LabeledSignal>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].signal.signal_id != b[i].signal.signal_id) return false;
        if (a[i].signal.patient_id != b[i].signal.patient_id) return false;
        if (a[i].signal.cycle_length_ms != b[i].signal.cycle_length_ms) return false;
        if (a[i].signal.samples != b[i].signal.samples) return false;
        if (a[i].label != b[i].label) return false;
    }
    return true;
}

} // namespace

TEST_CASE("generator config validation") {
    GeneratorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    SUBCASE("patient count bounds") {
        cfg.n_patients = 2;
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
        cfg.n_patients = 100;
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    }
    SUBCASE("duration floor") {
        cfg.duration_ms = 2999.0;
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    }
    SUBCASE("noise range") {
        cfg.noise_sd = -0.01;
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
        cfg.noise_sd = 0.06;
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    }
    SUBCASE("class mix must have some weight") {
        cfg.class_mix = {0.0, 0.0, 0.0};
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
        cfg.class_mix = {1.0, -1.0, 1.0};
        CHECK_THROWS_AS(cfg.validate(), InvalidConfig);
    }
}

TEST_CASE("gen_dataset is deterministic in the seed") {
    const auto cfg = small_config(21);
    const auto a = gen_dataset(cfg);
    const auto b = gen_dataset(cfg);
    CHECK(same_records(a.records, b.records));
    CHECK(a.split_assignment.train == b.split_assignment.train);

    auto cfg2 = cfg;
    cfg2.seed = 22;
    const auto c = gen_dataset(cfg2);
    CHECK_FALSE(same_records(a.records, c.records));
}

TEST_CASE("dataset ids, split assignment, and basic shape") {
    const auto cfg = small_config();
    const auto ds = gen_dataset(cfg);
    REQUIRE(ds.records.size() == 24);

    CHECK(ds.records[0].signal.signal_id == "p00-s000");
    CHECK(ds.records[0].signal.patient_id == "p00");
    CHECK(ds.records[23].signal.signal_id == "p03-s005");

    CHECK(ds.split_assignment.train == std::set<std::string>{"p00", "p01"});
    CHECK(ds.split_assignment.validation == std::set<std::string>{"p02"});
    CHECK(ds.split_assignment.test == std::set<std::string>{"p03"});

    const int n = static_cast<int>(std::llround(cfg.duration_ms));
    for (const auto& r : ds.records) {
        CHECK(static_cast<int>(r.signal.samples.size()) == n);
        CHECK(r.signal.sampling_rate_hz == kCanonicalRateHz);
        REQUIRE(r.label.has_value());
        CHECK_NOTHROW(r.signal.validate());
    }

    SUBCASE("one cycle length per patient") {
        for (int i = 1; i < 6; ++i)
            CHECK(ds.records[static_cast<size_t>(i)].signal.cycle_length_ms ==
                  ds.records[0].signal.cycle_length_ms);
        CHECK(ds.records[6].signal.cycle_length_ms != ds.records[0].signal.cycle_length_ms);
    }
}

TEST_CASE("profile cycle lengths respect the clamp") {
    GeneratorConfig cfg;
    cfg.cycle_length_sd_ms = 5000.0; // force both tails
    const double hi = std::min(1200.0, cfg.duration_ms / 3.2);
    Rng rng(5);
    bool saw_lo = false, saw_hi = false;
    for (int i = 0; i < 200; ++i) {
        const auto p = make_profile("pX", cfg, rng);
        CHECK(p.cycle_length_ms >= 200.0);
        CHECK(p.cycle_length_ms <= hi);
        saw_lo = saw_lo || p.cycle_length_ms == 200.0;
        saw_hi = saw_hi || p.cycle_length_ms == hi;
        CHECK(p.amplitude_scale >= 0.8);
        CHECK(p.amplitude_scale <= 1.6);
        CHECK(std::fabs(p.polarity) == 1.0);
    }
    CHECK(saw_lo);
    CHECK(saw_hi);
}

TEST_CASE("noiseless morphologies reproduce their class under the default rules") {
    GeneratorConfig cfg = small_config(91);
    cfg.n_patients = 6;
    cfg.signals_per_patient = 40;
    cfg.noise_sd = 0.0;
    const auto ds = gen_dataset(cfg);
    const rules::RuleParams params;
    int counts[3] = {0, 0, 0};
    for (const auto& r : ds.records) {
        const Label got = rules::classify(r.signal, params);
        CAPTURE(r.signal.signal_id);
        CHECK(got == *r.label);
        ++counts[static_cast<int>(*r.label)];
    }
    // the draw actually exercised all three classes
    CHECK(counts[0] > 0);
    CHECK(counts[1] > 0);
    CHECK(counts[2] > 0);
}

TEST_CASE("class mix proportions converge") {
    GeneratorConfig cfg;
    cfg.seed = 17;
    cfg.n_patients = 10;
    cfg.signals_per_patient = 500;
    cfg.noise_sd = 0.0;
    const auto ds = gen_dataset(cfg);
    const double total = 326.0 + 215.0 + 279.0;
    const double want[3] = {326.0 / total, 215.0 / total, 279.0 / total};
    double got[3] = {0, 0, 0};
    for (const auto& r : ds.records) got[static_cast<int>(*r.label)] += 1.0;
    for (int c = 0; c < 3; ++c) {
        got[c] /= static_cast<double>(ds.records.size());
        CHECK(std::fabs(got[c] - want[c]) < 0.02);
    }
}

TEST_CASE("simulate_annotators") {
    LabeledSignal rec;
    rec.signal.signal_id = "s";
    rec.signal.patient_id = "p";
    rec.signal.cycle_length_ms = 500.0;
    rec.signal.samples = {0.0, 1.0, 0.0};
    rec.label = Label::Abnormal;

    SUBCASE("zero disagreement is the identity plus annotations") {
        Rng rng(3);
        const auto out = simulate_annotators(rec, 0.0, rng);
        CHECK(out.label == Label::Abnormal);
        REQUIRE(out.annotator_labels.has_value());
        CHECK(*out.annotator_labels ==
              std::vector<Label>{Label::Abnormal, Label::Abnormal, Label::Abnormal});
    }
    SUBCASE("certain disagreement never reports the truth") {
        Rng rng(4);
        for (int i = 0; i < 200; ++i) {
            const auto out = simulate_annotators(rec, 1.0, rng);
            REQUIRE(out.annotator_labels.has_value());
            for (Label l : *out.annotator_labels) CHECK(l != Label::Abnormal);
        }
    }
    SUBCASE("disagreement clears the label") {
        Rng rng(5);
        int cleared = 0, kept = 0;
        for (int i = 0; i < 2000; ++i) {
            const auto out = simulate_annotators(rec, 0.5, rng);
            REQUIRE(out.annotator_labels.has_value());
            const auto& a = *out.annotator_labels;
            const bool unanimous = a[0] == a[1] && a[1] == a[2];
            CHECK(out.label.has_value() == unanimous);
            if (unanimous) CHECK(out.label == a[0]);
            (out.label ? kept : cleared) += 1;
        }
        // P(unanimous) at p = 0.5 is 0.5^3 + 2 * 0.25^3 = 0.15625
        const double rate = static_cast<double>(kept) / 2000.0;
        CHECK(rate > 0.10);
        CHECK(rate < 0.22);
    }
    SUBCASE("needs a truth and a sane probability") {
        Rng rng(6);
        LabeledSignal unlabeled = rec;
        unlabeled.label.reset();
        CHECK_THROWS_AS(simulate_annotators(unlabeled, 0.1, rng), UnlabeledData);
        CHECK_THROWS_AS(simulate_annotators(rec, -0.1, rng), InvalidConfig);
        CHECK_THROWS_AS(simulate_annotators(rec, 1.1, rng), InvalidConfig);
    }
}
