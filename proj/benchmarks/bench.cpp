// Microbenchmarks for the hot paths: the GEMM kernel, convolution forward,
// spectrum computation, and end-to-end rule classification.

#include <benchmark/benchmark.h>

#include <egm/nn/gemm.hpp>
#include <egm/nn/layers.hpp>
#include <egm/preprocess.hpp>
#include <egm/rng.hpp>
#include <egm/rules.hpp>
#include <egm/synth.hpp>

#include <vector>

namespace {

std::vector<float> random_vec(size_t n, uint64_t seed) {
    egm::Rng rng(seed);
    std::vector<float> v(n);
    for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return v;
}

void bm_gemm_acc(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_vec(static_cast<size_t>(n) * n, 1);
    const auto b = random_vec(static_cast<size_t>(n) * n, 2);
    std::vector<float> c(static_cast<size_t>(n) * n, 0.0f);
    for (auto _ : state) {
        egm::nn::gemm_acc(n, n, n, a.data(), n, b.data(), n, c.data(), n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}
BENCHMARK(bm_gemm_acc)->Arg(64)->Arg(128)->Arg(256);

void bm_conv1d_forward(benchmark::State& state) {
    egm::Rng rng(7);
    egm::nn::Conv1d<float> conv;
    conv.init(16, 64, 64, 1, rng);
    egm::nn::TensorF x({4, 375, 64});
    x.data = random_vec(x.data.size(), 3);
    for (auto _ : state) {
        auto y = conv.forward(x);
        benchmark::DoNotOptimize(y.data.data());
    }
}
BENCHMARK(bm_conv1d_forward);

void bm_power_spectrum(benchmark::State& state) {
    egm::Rng rng(11);
    std::vector<double> samples(1500);
    for (auto& s : samples) s = rng.uniform(-1.0, 1.0);
    for (auto _ : state) {
        auto spec = egm::power_spectrum(samples);
        benchmark::DoNotOptimize(spec.power.data());
    }
}
BENCHMARK(bm_power_spectrum);

void bm_rule_classify(benchmark::State& state) {
    egm::synth::GeneratorConfig gc;
    gc.n_patients = 2;
    gc.signals_per_patient = 8;
    const auto ds = egm::synth::gen_dataset(gc);
    const egm::rules::RuleParams params;
    size_t i = 0;
    for (auto _ : state) {
        const auto& rec = ds.records[i++ % ds.records.size()];
        benchmark::DoNotOptimize(egm::rules::classify(rec.signal, params));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_rule_classify);

} // namespace

BENCHMARK_MAIN();
