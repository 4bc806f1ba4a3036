#include "egm/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace egm {

std::vector<double> rectify(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = std::fabs(x[i]);
    return out;
}

std::vector<double> normalize(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v));
    if (m == 0.0) throw AllZeroSignal();
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] / m;
    return out;
}

std::vector<double> random_crop(const std::vector<double>& x, int window, Rng& rng) {
    if (window <= 0) throw WrongLength("crop window must be positive");
    if (static_cast<int>(x.size()) < window)
        throw SignalTooShort("signal of " + std::to_string(x.size()) +
                             " samples is shorter than the " + std::to_string(window) +
                             "-sample crop window");
    size_t start = rng.below(x.size() - static_cast<size_t>(window) + 1);
    return std::vector<double>(x.begin() + start, x.begin() + start + window);
}

std::vector<double> center_crop(const std::vector<double>& x, int window) {
    if (window <= 0) throw WrongLength("crop window must be positive");
    if (static_cast<int>(x.size()) < window)
        throw SignalTooShort("signal of " + std::to_string(x.size()) +
                             " samples is shorter than the " + std::to_string(window) +
                             "-sample crop window");
    size_t start = (x.size() - static_cast<size_t>(window)) / 2;
    return std::vector<double>(x.begin() + start, x.begin() + start + window);
}

namespace {

// Recursive mixed-radix decimation-in-time FFT for arbitrary n (smallest prime
// factor first). Twiddles are computed from the exact reduced angle rather than
// by repeated multiplication, which keeps the absolute error of a 1500-point
// transform near machine precision.
void fft_rec(std::vector<std::complex<double>>& a) {
    const size_t n = a.size();
    if (n == 1) return;
    size_t p = n;
    for (size_t f = 2; f * f <= n; ++f) {
        if (n % f == 0) {
            p = f;
            break;
        }
    }
    const size_t m = n / p;

    std::vector<std::vector<std::complex<double>>> sub(p);
    for (size_t s = 0; s < p; ++s) {
        sub[s].resize(m);
        for (size_t j = 0; j < m; ++j) sub[s][j] = a[j * p + s];
        fft_rec(sub[s]);
    }

    for (size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        const std::complex<double>& base = sub[0][k % m];
        acc = base;
        for (size_t s = 1; s < p; ++s) {
            size_t idx = (s * k) % n;
            double ang = -2.0 * M_PI * static_cast<double>(idx) / static_cast<double>(n);
            acc += std::complex<double>(std::cos(ang), std::sin(ang)) * sub[s][k % m];
        }
        a[k] = acc;
    }
}

} // namespace

Spectrum power_spectrum(const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != kSpectrumLength)
        throw WrongLength("power_spectrum expects exactly " + std::to_string(kSpectrumLength) +
                          " samples, got " + std::to_string(x.size()));
    std::vector<std::complex<double>> a(x.size());
    for (size_t i = 0; i < x.size(); ++i) a[i] = std::complex<double>(x[i], 0.0);
    fft_rec(a);
    Spectrum sp;
    sp.power.resize(x.size());
    for (size_t k = 0; k < a.size(); ++k)
        sp.power[k] = a[k].real() * a[k].real() + a[k].imag() * a[k].imag();
    return sp;
}

std::vector<double> resample_linear(const std::vector<double>& x, double from_hz, double to_hz) {
    if (x.empty()) return {};
    if (!(from_hz > 0.0) || !(to_hz > 0.0))
        throw DataError("resample_linear: sampling rates must be positive");
    if (from_hz == to_hz) return x;
    const size_t n_in = x.size();
    const size_t n_out =
        std::max<size_t>(1, static_cast<size_t>(std::llround(n_in * to_hz / from_hz)));
    std::vector<double> out(n_out);
    const double step = from_hz / to_hz;
    for (size_t i = 0; i < n_out; ++i) {
        double pos = i * step;
        size_t i0 = static_cast<size_t>(pos);
        if (i0 >= n_in - 1) {
            out[i] = x[n_in - 1];
            continue;
        }
        double frac = pos - i0;
        out[i] = x[i0] * (1.0 - frac) + x[i0 + 1] * frac;
    }
    return out;
}

EgmSignal rectify(const EgmSignal& s) {
    EgmSignal out = s;
    out.samples = rectify(s.samples);
    return out;
}

EgmSignal normalize(const EgmSignal& s) {
    EgmSignal out = s;
    out.samples = normalize(s.samples);
    return out;
}

EgmSignal random_crop(const EgmSignal& s, double window_ms, Rng& rng) {
    EgmSignal out = s;
    const int window = static_cast<int>(std::llround(window_ms * s.sampling_rate_hz / 1000.0));
    out.samples = random_crop(s.samples, window, rng);
    return out;
}

} // namespace egm
