#include <egm/nn/train.hpp>

#include <egm/nn/adam.hpp>
#include <egm/preprocess.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace egm::nn {

namespace {

// Scale to unit max-abs; all-zero windows pass through unchanged so that a
// flat-line input degrades to an arbitrary prediction instead of an error.
void normalize_in_place(std::vector<double>& x) {
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) return;
    for (double& v : x) v /= mx;
}

struct PreparedSample {
    std::vector<float> egm;
    std::vector<float> fft;
    int label = 0;
};

PreparedSample prepare(std::vector<double> window, int label, const NetworkConfig& cfg) {
    normalize_in_place(window);
    PreparedSample p;
    p.label = label;
    p.egm.assign(window.begin(), window.end());
    if (cfg.fft_branch) {
        Spectrum s = power_spectrum(window);
        if (cfg.fft_normalize) {
            double mx = 0.0;
            for (double v : s.power) mx = std::max(mx, v);
            if (mx > 0.0)
                for (double& v : s.power) v /= mx;
        }
        p.fft.assign(s.power.begin(), s.power.end());
    }
    return p;
}

int window_samples(const EgmSignal& s, double window_ms) {
    return static_cast<int>(std::llround(window_ms * s.sampling_rate_hz / 1000.0));
}

// Fill the batch tensors from prepared samples [lo, hi).
void fill_batch(const std::vector<PreparedSample>& samples, const std::vector<size_t>& order,
                size_t lo, size_t hi, const NetworkConfig& cfg, TensorF& x, TensorF& x_fft,
                std::vector<int>& labels) {
    const int B = static_cast<int>(hi - lo);
    x = TensorF({B, cfg.input_length, 1});
    if (cfg.fft_branch) x_fft = TensorF({B, cfg.input_length, 1});
    labels.resize(static_cast<size_t>(B));
    for (int b = 0; b < B; ++b) {
        const PreparedSample& s = samples[order[lo + static_cast<size_t>(b)]];
        std::copy(s.egm.begin(), s.egm.end(), x.ptr(b, 0, 0));
        if (cfg.fft_branch) std::copy(s.fft.begin(), s.fft.end(), x_fft.ptr(b, 0, 0));
        labels[static_cast<size_t>(b)] = s.label;
    }
}

int argmax_row(const float* row, int n) {
    int best = 0;
    for (int c = 1; c < n; ++c)
        if (row[c] > row[best]) best = c;
    return best;
}

} // namespace

FitResult fit(const std::vector<LabeledSignal>& train, const std::vector<LabeledSignal>& val,
              const NetworkConfig& net_cfg, const TrainConfig& train_cfg) {
    net_cfg.validate();
    train_cfg.validate();
    if (train.empty()) throw DataError("training split is empty");
    if (val.empty()) throw DataError("validation split is empty");
    for (const auto* split : {&train, &val})
        for (const auto& rec : *split) {
            if (!rec.label) throw UnlabeledData("signal " + rec.signal.signal_id + " has no label");
            const int w = window_samples(rec.signal, train_cfg.crop_window_ms);
            if (static_cast<int>(rec.signal.samples.size()) < w)
                throw SignalTooShort("signal " + rec.signal.signal_id +
                                     " is shorter than the crop window");
            if (w != net_cfg.input_length)
                throw InvalidConfig("crop window of " + std::to_string(w) +
                                    " samples does not match network input_length " +
                                    std::to_string(net_cfg.input_length));
        }

    Rng init_rng(Rng::mix(train_cfg.seed, 0x696e6974u));
    NetworkF net(net_cfg, init_rng);
    AdamF adam;
    adam.init(net.params());
    Rng rng(Rng::mix(train_cfg.seed, 0x65706f63u));

    // Validation features are fixed: center crop + normalize once.
    std::vector<PreparedSample> val_set;
    val_set.reserve(val.size());
    for (const auto& rec : val)
        val_set.push_back(prepare(center_crop(rec.signal.samples, net_cfg.input_length),
                                  static_cast<int>(*rec.label), net_cfg));

    std::array<std::vector<size_t>, kNumClasses> buckets;
    for (size_t i = 0; i < train.size(); ++i)
        buckets[static_cast<size_t>(*train[i].label)].push_back(i);
    size_t majority = 0;
    for (const auto& b : buckets) majority = std::max(majority, b.size());

    FitResult result;
    double best_acc = -1.0;
    for (int epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
        EpochLog log;
        log.epoch = epoch;

        // Balanced epoch set: every class drawn with replacement up to the
        // majority count, each draw taking a fresh random crop.
        std::vector<PreparedSample> samples;
        for (int c = 0; c < kNumClasses; ++c) {
            const auto& bucket = buckets[static_cast<size_t>(c)];
            if (bucket.empty()) continue;
            const size_t want = train_cfg.oversample ? majority : bucket.size();
            log.class_counts[static_cast<size_t>(c)] = static_cast<int64_t>(want);
            for (size_t n = 0; n < want; ++n) {
                const size_t pick = train_cfg.oversample
                                        ? bucket[rng.below(bucket.size())]
                                        : bucket[n];
                const auto& rec = train[pick];
                const int w = window_samples(rec.signal, train_cfg.crop_window_ms);
                samples.push_back(prepare(random_crop(rec.signal.samples, w, rng),
                                          static_cast<int>(*rec.label), net_cfg));
            }
        }
        std::vector<size_t> order(samples.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        for (size_t i = order.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(rng.below(i));
            std::swap(order[i - 1], order[j]);
        }

        double loss_sum = 0.0;
        int64_t correct = 0;
        TensorF x, x_fft;
        std::vector<int> labels;
        for (size_t lo = 0; lo < order.size(); lo += static_cast<size_t>(train_cfg.batch_size)) {
            const size_t hi = std::min(order.size(), lo + static_cast<size_t>(train_cfg.batch_size));
            fill_batch(samples, order, lo, hi, net_cfg, x, x_fft, labels);
            TensorF lg = net.logits(x, net_cfg.fft_branch ? &x_fft : nullptr, Mode::Train, &rng);
            auto [loss, dlogits] = softmax_cross_entropy(lg, labels);
            if (!std::isfinite(loss))
                throw NonFiniteLoss("training loss diverged at epoch " + std::to_string(epoch));
            loss_sum += loss * static_cast<double>(hi - lo);
            for (int b = 0; b < static_cast<int>(hi - lo); ++b)
                if (argmax_row(lg.ptr(b, 0), net_cfg.n_classes) == labels[static_cast<size_t>(b)])
                    ++correct;
            net.zero_grads();
            net.backward(dlogits);
            adam.step(net.params());
        }
        log.train_loss = loss_sum / static_cast<double>(order.size());
        log.train_acc = static_cast<double>(correct) / static_cast<double>(order.size());

        int64_t val_correct = 0;
        for (size_t lo = 0; lo < val_set.size(); lo += static_cast<size_t>(train_cfg.batch_size)) {
            const size_t hi = std::min(val_set.size(), lo + static_cast<size_t>(train_cfg.batch_size));
            std::vector<size_t> ident(hi - lo);
            for (size_t i = 0; i < ident.size(); ++i) ident[i] = lo + i;
            fill_batch(val_set, ident, 0, ident.size(), net_cfg, x, x_fft, labels);
            TensorF probs = net.probabilities(x, net_cfg.fft_branch ? &x_fft : nullptr);
            for (int b = 0; b < static_cast<int>(ident.size()); ++b)
                if (argmax_row(probs.ptr(b, 0), net_cfg.n_classes) == labels[static_cast<size_t>(b)])
                    ++val_correct;
        }
        log.val_acc = static_cast<double>(val_correct) / static_cast<double>(val_set.size());

        if (log.val_acc > best_acc) {
            best_acc = log.val_acc;
            result.best = snapshot(net, best_acc, epoch);
        }
        result.log.push_back(log);
    }
    return result;
}

std::vector<std::array<float, kNumClasses>> predict_probs(const CheckpointData& ckpt,
                                                          const std::vector<EgmSignal>& signals) {
    Rng build_rng(0);
    NetworkF net(ckpt.config, build_rng);
    apply_checkpoint(ckpt, net);
    const NetworkConfig& cfg = ckpt.config;

    std::vector<std::array<float, kNumClasses>> out;
    out.reserve(signals.size());
    constexpr size_t kEvalBatch = 32;
    for (size_t lo = 0; lo < signals.size(); lo += kEvalBatch) {
        const size_t hi = std::min(signals.size(), lo + kEvalBatch);
        const int B = static_cast<int>(hi - lo);
        TensorF x({B, cfg.input_length, 1});
        TensorF x_fft;
        if (cfg.fft_branch) x_fft = TensorF({B, cfg.input_length, 1});
        for (int b = 0; b < B; ++b) {
            std::vector<double> window =
                center_crop(signals[lo + static_cast<size_t>(b)].samples, cfg.input_length);
            normalize_in_place(window);
            std::copy(window.begin(), window.end(), x.ptr(b, 0, 0));
            if (cfg.fft_branch) {
                Spectrum s = power_spectrum(window);
                if (cfg.fft_normalize) {
                    double mx = 0.0;
                    for (double v : s.power) mx = std::max(mx, v);
                    if (mx > 0.0)
                        for (double& v : s.power) v /= mx;
                }
                std::copy(s.power.begin(), s.power.end(), x_fft.ptr(b, 0, 0));
            }
        }
        TensorF probs = net.probabilities(x, cfg.fft_branch ? &x_fft : nullptr);
        for (int b = 0; b < B; ++b) {
            std::array<float, kNumClasses> row{};
            for (int c = 0; c < kNumClasses; ++c) row[static_cast<size_t>(c)] = *probs.ptr(b, c);
            out.push_back(row);
        }
    }
    return out;
}

std::vector<Label> predict(const CheckpointData& ckpt, const std::vector<EgmSignal>& signals) {
    auto probs = predict_probs(ckpt, signals);
    std::vector<Label> labels;
    labels.reserve(probs.size());
    for (const auto& row : probs) {
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (row[static_cast<size_t>(c)] > row[static_cast<size_t>(best)]) best = c;
        labels.push_back(static_cast<Label>(best));
    }
    return labels;
}

void write_epoch_log_csv(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,train_loss,train_acc,val_acc\n";
    char buf[160];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", e.epoch, e.train_loss, e.train_acc,
                      e.val_acc);
        out << buf;
    }
    if (!out) throw IoError("failed writing " + path);
}

} // namespace egm::nn
