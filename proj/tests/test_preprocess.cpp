#include "doctest.h"
#include "oracles.hpp"

#include <egm/preprocess.hpp>
#include <egm/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace egm;

namespace {
std::vector<double> random_signal(size_t n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    return x;
}
} // namespace

TEST_CASE("rectify is |x|") {
    const std::vector<double> x = {-1.5, 0.0, 2.25, -0.0, -1e-30};
    const auto r = rectify(x);
    REQUIRE(r.size() == x.size());
    for (size_t i = 0; i < x.size(); ++i) CHECK(r[i] == std::fabs(x[i]));
}

TEST_CASE("normalize scales the max-abs sample to exactly 1") {
    auto x = random_signal(333, 17);
    x[100] = -3.75; // dominant negative sample
    const auto y = normalize(x);
    double max_abs = 0.0;
    for (double v : y) max_abs = std::max(max_abs, std::fabs(v));
    CHECK(max_abs == 1.0);
    CHECK(y[100] == -1.0);
    // y = x / 3.75 elementwise
    for (size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i] / 3.75);
}

TEST_CASE("normalize is idempotent (bitwise)") {
    const auto x = random_signal(256, 5);
    const auto once = normalize(x);
    const auto twice = normalize(once);
    CHECK(once == twice);
}

TEST_CASE("normalize throws on an all-zero signal") {
    CHECK_THROWS_AS(normalize(std::vector<double>(64, 0.0)), AllZeroSignal);
}

TEST_CASE("rectify and normalize commute bitwise") {
    const auto x = random_signal(512, 23);
    CHECK(rectify(normalize(x)) == normalize(rectify(x)));
}

TEST_CASE("random_crop windows") {
    Rng rng(99);
    const auto x = random_signal(3000, 3);

    SUBCASE("crop is a contiguous slice of the requested width") {
        for (int rep = 0; rep < 50; ++rep) {
            const auto c = random_crop(x, 1500, rng);
            REQUIRE(c.size() == 1500);
            // locate the start by matching the first element run
            bool found = false;
            for (size_t start = 0; start + 1500 <= x.size(); ++start) {
                if (std::equal(c.begin(), c.end(), x.begin() + start)) {
                    found = true;
                    break;
                }
            }
            CHECK(found);
        }
    }
    SUBCASE("single valid position returns the signal itself") {
        const auto c = random_crop(x, 3000, rng);
        CHECK(c == x);
    }
    SUBCASE("too-short input throws") {
        CHECK_THROWS_AS(random_crop(x, 3001, rng), SignalTooShort);
    }
    SUBCASE("offsets cover the valid range roughly uniformly") {
        // window 10 on 26 samples -> 17 valid offsets; distinguishable because
        // the base signal is strictly increasing.
        std::vector<double> ramp(26);
        std::iota(ramp.begin(), ramp.end(), 0.0);
        std::vector<int> hits(17, 0);
        const int draws = 17000;
        for (int i = 0; i < draws; ++i) {
            const auto c = random_crop(ramp, 10, rng);
            ++hits[static_cast<int>(c[0])];
        }
        for (int off = 0; off < 17; ++off) {
            const double ratio = hits[off] / (static_cast<double>(draws) / 17.0);
            CHECK(ratio > 0.5);
            CHECK(ratio < 2.0);
        }
    }
}

TEST_CASE("center_crop picks start (n - window) / 2") {
    std::vector<double> ramp(10);
    std::iota(ramp.begin(), ramp.end(), 0.0);
    CHECK(center_crop(ramp, 4) == std::vector<double>{3, 4, 5, 6});
    CHECK(center_crop(ramp, 10) == ramp);
    CHECK(center_crop(ramp, 3) == std::vector<double>{3, 4, 5});
    CHECK_THROWS_AS(center_crop(ramp, 11), SignalTooShort);
}

TEST_CASE("power_spectrum matches the naive DFT oracle") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const auto x = random_signal(kSpectrumLength, seed);
        const auto fast = power_spectrum(x).power;
        const auto slow = oracle::naive_power_spectrum(x);
        REQUIRE(fast.size() == slow.size());
        double worst = 0.0;
        for (size_t k = 0; k < fast.size(); ++k)
            worst = std::max(worst, std::fabs(fast[k] - slow[k]));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("power_spectrum satisfies Parseval") {
    const auto x = random_signal(kSpectrumLength, 77);
    const auto p = power_spectrum(x).power;
    const double time_energy =
        std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    const double freq_energy =
        std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(x.size());
    CHECK(std::fabs(time_energy - freq_energy) <= 1e-6 * std::fabs(time_energy));
}

TEST_CASE("power_spectrum of a unit impulse is flat") {
    std::vector<double> x(kSpectrumLength, 0.0);
    x[0] = 1.0;
    const auto p = power_spectrum(x).power;
    for (double v : p) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power_spectrum of a constant concentrates in the DC bin") {
    std::vector<double> x(kSpectrumLength, 2.0);
    const auto p = power_spectrum(x).power;
    CHECK(p[0] == doctest::Approx(4.0 * kSpectrumLength * kSpectrumLength));
    for (size_t k = 1; k < p.size(); ++k) CHECK(std::fabs(p[k]) < 1e-6);
}

TEST_CASE("power_spectrum of a real signal is symmetric") {
    const auto x = random_signal(kSpectrumLength, 8);
    const auto p = power_spectrum(x).power;
    for (size_t k = 1; k < p.size(); ++k)
        CHECK(p[k] == doctest::Approx(p[p.size() - k]).epsilon(1e-9));
}

TEST_CASE("power_spectrum length contract") {
    CHECK_THROWS_AS(power_spectrum(std::vector<double>(1499)), WrongLength);
    CHECK_THROWS_AS(power_spectrum(std::vector<double>(1501)), WrongLength);
}

TEST_CASE("resample_linear") {
    SUBCASE("same rate is the identity") {
        const auto x = random_signal(100, 4);
        CHECK(resample_linear(x, 1000.0, 1000.0) == x);
    }
    SUBCASE("preserves straight lines") {
        std::vector<double> ramp(101);
        std::iota(ramp.begin(), ramp.end(), 0.0);
        const auto up = resample_linear(ramp, 500.0, 1000.0);
        // output count scales with the rate ratio: round(101 * 1000 / 500)
        REQUIRE(up.size() == 202);
        // interior points sit on the original line y = t * from/to; positions
        // past the last input sample clamp to it
        for (size_t i = 0; i + 1 < up.size(); ++i)
            CHECK(up[i] == doctest::Approx(static_cast<double>(i) * 0.5).epsilon(1e-12));
        CHECK(up.back() == ramp.back());
    }
    SUBCASE("downsampling halves the count") {
        std::vector<double> ramp(100);
        std::iota(ramp.begin(), ramp.end(), 0.0);
        const auto down = resample_linear(ramp, 1000.0, 500.0);
        REQUIRE(down.size() == 50);
        for (size_t i = 0; i < down.size(); ++i)
            CHECK(down[i] == doctest::Approx(static_cast<double>(i) * 2.0).epsilon(1e-12));
    }
}

TEST_CASE("signal-level helpers preserve metadata") {
    EgmSignal s;
    s.signal_id = "sig";
    s.patient_id = "pat";
    s.cycle_length_ms = 450.0;
    s.samples = random_signal(2000, 6);
    Rng rng(1);
    const EgmSignal cropped = random_crop(s, 1500.0, rng);
    CHECK(cropped.signal_id == "sig");
    CHECK(cropped.patient_id == "pat");
    CHECK(cropped.cycle_length_ms == 450.0);
    CHECK(cropped.samples.size() == 1500);
    const EgmSignal norm = normalize(s);
    CHECK(norm.cycle_length_ms == 450.0);
    const EgmSignal rect = rectify(s);
    CHECK(rect.samples == rectify(s.samples));
}
