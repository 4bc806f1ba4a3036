#pragma once

// Full classifier graph: Head -> N stages of (ResBlock x3 + ResBlockSub) per
// branch, optional second branch over the power spectrum concatenated along
// channels, then a Tail with either stacked LSTMs or global average pooling.
// Parameter naming, initialization order, and registration order are all a
// pure function of the config, so checkpoints can be validated structurally.

#include <egm/errors.hpp>
#include <egm/nn/layers.hpp>

#include <memory>
#include <string>
#include <vector>

namespace egm::nn {

struct NetworkConfig {
    int n_stages = 2;
    bool tail_lstm = true;
    bool fft_branch = false;
    double leaky_slope = 0.3;
    double spatial_dropout_rate = 0.2;
    double dropout_rate = 0.2;
    int kernel_size = 16;
    int base_filters = 64;
    int lstm_units = 128;
    int lstm_layers = 3;
    int hidden_dense = 256;
    int n_classes = 3;
    // Samples per input window. The published geometry is 1500 (1.5 s at
    // 1 kHz); smaller values build miniature graphs for gradient checking.
    int input_length = 1500;
    // Scale each power spectrum by its max before feeding the second branch.
    // Off by default: the raw scale matches the reference behaviour.
    bool fft_normalize = false;

    bool operator==(const NetworkConfig&) const = default;

    // Temporal length entering the tail: repeated floor-halving, once per stage.
    int tail_length() const {
        int len = input_length;
        for (int j = 0; j < n_stages; ++j) len /= 2;
        return len;
    }
    int tail_channels() const { return base_filters * n_stages * (fft_branch ? 2 : 1); }

    void validate() const {
        if (n_stages < 1 || n_stages > 8) throw InvalidConfig("n_stages must be in [1, 8]");
        if (!(leaky_slope >= 0.0) || leaky_slope >= 1.0)
            throw InvalidConfig("leaky_slope must be in [0, 1)");
        if (!(spatial_dropout_rate >= 0.0) || spatial_dropout_rate >= 1.0)
            throw InvalidConfig("spatial_dropout_rate must be in [0, 1)");
        if (!(dropout_rate >= 0.0) || dropout_rate >= 1.0)
            throw InvalidConfig("dropout_rate must be in [0, 1)");
        if (kernel_size < 1) throw InvalidConfig("kernel_size must be positive");
        if (base_filters < 1) throw InvalidConfig("base_filters must be positive");
        if (lstm_units < 1) throw InvalidConfig("lstm_units must be positive");
        if (lstm_layers < 1) throw InvalidConfig("lstm_layers must be positive");
        if (hidden_dense < 1) throw InvalidConfig("hidden_dense must be positive");
        if (n_classes < 2) throw InvalidConfig("n_classes must be at least 2");
        if (input_length < 2) throw InvalidConfig("input_length must be at least 2");
        if (tail_length() < 1)
            throw InvalidConfig("input_length too short for the requested stage count");
    }
};

// Concatenate two (B, L, C) activations along the channel axis.
template <class T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
    const int B = a.dim(0), L = a.dim(1), Ca = a.dim(2), Cb = b.dim(2);
    b.require_shape({B, L, Cb}, "channel concat");
    TensorT<T> out({B, L, Ca + Cb});
    for (int bi = 0; bi < B; ++bi)
        for (int t = 0; t < L; ++t) {
            std::memcpy(out.ptr(bi, t, 0), a.ptr(bi, t, 0), sizeof(T) * Ca);
            std::memcpy(out.ptr(bi, t, 0) + Ca, b.ptr(bi, t, 0), sizeof(T) * Cb);
        }
    return out;
}

template <class T>
void split_channels(const TensorT<T>& d, int c_first, TensorT<T>& da, TensorT<T>& db) {
    const int B = d.dim(0), L = d.dim(1), C = d.dim(2);
    da = TensorT<T>({B, L, c_first});
    db = TensorT<T>({B, L, C - c_first});
    for (int bi = 0; bi < B; ++bi)
        for (int t = 0; t < L; ++t) {
            std::memcpy(da.ptr(bi, t, 0), d.ptr(bi, t, 0), sizeof(T) * c_first);
            std::memcpy(db.ptr(bi, t, 0), d.ptr(bi, t, 0) + c_first,
                        sizeof(T) * (C - c_first));
        }
}

// Head: Conv -> BN -> LReLU -> Conv -> BN -> LReLU -> SpatialDropout -> Conv,
// with the second conv's (pre-norm) output added to the third conv's output.
template <class T>
struct HeadT {
    Conv1d<T> conv1, conv2, conv3;
    BatchNorm1d<T> bn1, bn2;
    LeakyReLU<T> lr1, lr2;
    SpatialDropout<T> sd;

    void init(const NetworkConfig& cfg, Rng& rng) {
        const int F = cfg.base_filters, K = cfg.kernel_size;
        conv1.init(K, 1, F, 1, rng);
        bn1.init(F);
        conv2.init(K, F, F, 1, rng);
        bn2.init(F);
        conv3.init(K, F, F, 1, rng);
        lr1.slope = lr2.slope = static_cast<T>(cfg.leaky_slope);
        sd.rate = static_cast<T>(cfg.spatial_dropout_rate);
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        TensorT<T> t = lr1.forward(bn1.forward(conv1.forward(x), mode));
        TensorT<T> h4 = conv2.forward(t);
        TensorT<T> t2 = sd.forward(lr2.forward(bn2.forward(h4, mode)), mode, rng);
        TensorT<T> out = conv3.forward(t2);
        for (size_t i = 0; i < out.numel(); ++i) out.data[i] += h4.data[i];
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        TensorT<T> dh4 = bn2.backward(lr2.backward(sd.backward(conv3.backward(dy))));
        for (size_t i = 0; i < dh4.numel(); ++i) dh4.data[i] += dy.data[i];
        return conv1.backward(bn1.backward(lr1.backward(conv2.backward(dh4))));
    }

    void register_params(ParamRegistry<T>& reg, const std::string& p) {
        conv1.register_params(reg, p + "/conv1");
        bn1.register_params(reg, p + "/bn1");
        conv2.register_params(reg, p + "/conv2");
        bn2.register_params(reg, p + "/bn2");
        conv3.register_params(reg, p + "/conv3");
    }
};

// Pre-activation residual block: BN -> LReLU -> SpatialDropout -> Conv ->
// BN -> LReLU -> SpatialDropout -> Conv plus a shortcut. The shortcut is the
// identity unless the block changes width or stride, in which case it is a
// kernel-1 convolution with the same stride.
template <class T>
struct ResBlockT {
    BatchNorm1d<T> bn1, bn2;
    LeakyReLU<T> lr1, lr2;
    SpatialDropout<T> sd1, sd2;
    Conv1d<T> conv1, conv2, proj;
    bool has_proj = false;

    void init(const NetworkConfig& cfg, int c_in, int c_out, int stride, Rng& rng) {
        const int K = cfg.kernel_size;
        bn1.init(c_in);
        conv1.init(K, c_in, c_out, stride, rng);
        bn2.init(c_out);
        conv2.init(K, c_out, c_out, 1, rng);
        has_proj = (c_in != c_out || stride != 1);
        if (has_proj) proj.init(1, c_in, c_out, stride, rng);
        lr1.slope = lr2.slope = static_cast<T>(cfg.leaky_slope);
        sd1.rate = sd2.rate = static_cast<T>(cfg.spatial_dropout_rate);
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        TensorT<T> t = conv1.forward(sd1.forward(lr1.forward(bn1.forward(x, mode)), mode, rng));
        TensorT<T> out = conv2.forward(sd2.forward(lr2.forward(bn2.forward(t, mode)), mode, rng));
        if (has_proj) {
            TensorT<T> sc = proj.forward(x);
            for (size_t i = 0; i < out.numel(); ++i) out.data[i] += sc.data[i];
        } else {
            for (size_t i = 0; i < out.numel(); ++i) out.data[i] += x.data[i];
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        TensorT<T> d = bn2.backward(lr2.backward(sd2.backward(conv2.backward(dy))));
        TensorT<T> dx = bn1.backward(lr1.backward(sd1.backward(conv1.backward(d))));
        if (has_proj) {
            TensorT<T> dsc = proj.backward(dy);
            for (size_t i = 0; i < dx.numel(); ++i) dx.data[i] += dsc.data[i];
        } else {
            for (size_t i = 0; i < dx.numel(); ++i) dx.data[i] += dy.data[i];
        }
        return dx;
    }

    void register_params(ParamRegistry<T>& reg, const std::string& p) {
        bn1.register_params(reg, p + "/bn1");
        conv1.register_params(reg, p + "/conv1");
        bn2.register_params(reg, p + "/bn2");
        conv2.register_params(reg, p + "/conv2");
        if (has_proj) proj.register_params(reg, p + "/proj");
    }
};

// Stage j: three stride-1 ResBlocks at width base_filters*j (the first lifts
// the channel count when j > 1) followed by a stride-2 ResBlockSub.
template <class T>
struct StageT {
    ResBlockT<T> block1, block2, block3, sub;

    void init(const NetworkConfig& cfg, int c_in, int width, Rng& rng) {
        block1.init(cfg, c_in, width, 1, rng);
        block2.init(cfg, width, width, 1, rng);
        block3.init(cfg, width, width, 1, rng);
        sub.init(cfg, width, width, 2, rng);
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        TensorT<T> t = block1.forward(x, mode, rng);
        t = block2.forward(t, mode, rng);
        t = block3.forward(t, mode, rng);
        return sub.forward(t, mode, rng);
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        TensorT<T> d = sub.backward(dy);
        d = block3.backward(d);
        d = block2.backward(d);
        return block1.backward(d);
    }

    void register_params(ParamRegistry<T>& reg, const std::string& p) {
        block1.register_params(reg, p + "/block1");
        block2.register_params(reg, p + "/block2");
        block3.register_params(reg, p + "/block3");
        sub.register_params(reg, p + "/sub");
    }
};

template <class T>
struct BranchT {
    HeadT<T> head;
    std::vector<StageT<T>> stages;

    void init(const NetworkConfig& cfg, Rng& rng) {
        head.init(cfg, rng);
        stages.resize(static_cast<size_t>(cfg.n_stages));
        for (int j = 1; j <= cfg.n_stages; ++j) {
            const int c_in = cfg.base_filters * (j == 1 ? 1 : j - 1);
            stages[static_cast<size_t>(j - 1)].init(cfg, c_in, cfg.base_filters * j, rng);
        }
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        TensorT<T> t = head.forward(x, mode, rng);
        for (auto& s : stages) t = s.forward(t, mode, rng);
        return t;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        TensorT<T> d = dy;
        for (auto it = stages.rbegin(); it != stages.rend(); ++it) d = it->backward(d);
        return head.backward(d);
    }

    void register_params(ParamRegistry<T>& reg, const std::string& p) {
        head.register_params(reg, p + "/head");
        for (size_t j = 0; j < stages.size(); ++j)
            stages[j].register_params(reg, p + "/stage" + std::to_string(j + 1));
    }
};

// Tail: BN -> LReLU -> [stacked LSTMs' final hidden state | global average
// pool] -> Dropout -> Dense -> LReLU -> Dropout -> Dense(n_classes).
template <class T>
struct TailT {
    BatchNorm1d<T> bn;
    LeakyReLU<T> lr1, lr2;
    bool use_lstm = true;
    std::vector<Lstm<T>> lstms;
    GlobalAvgPool<T> gap;
    Dropout<T> drop1, drop2;
    Dense<T> fc1, fc2;
    int seq_len_ = 0;

    void init(const NetworkConfig& cfg, int c_in, Rng& rng) {
        use_lstm = cfg.tail_lstm;
        bn.init(c_in);
        int feat = c_in;
        if (use_lstm) {
            lstms.resize(static_cast<size_t>(cfg.lstm_layers));
            int f = c_in;
            for (auto& l : lstms) {
                l.init(f, cfg.lstm_units, rng);
                f = cfg.lstm_units;
            }
            feat = cfg.lstm_units;
        }
        fc1.init(feat, cfg.hidden_dense, rng);
        fc2.init(cfg.hidden_dense, cfg.n_classes, rng);
        lr1.slope = lr2.slope = static_cast<T>(cfg.leaky_slope);
        drop1.rate = drop2.rate = static_cast<T>(cfg.dropout_rate);
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        TensorT<T> t = lr1.forward(bn.forward(x, mode));
        seq_len_ = t.dim(1);
        TensorT<T> feat;
        if (use_lstm) {
            for (auto& l : lstms) t = l.forward(t);
            const int B = t.dim(0), H = t.dim(2);
            feat = TensorT<T>({B, H});
            for (int b = 0; b < B; ++b)
                std::memcpy(feat.ptr(b, 0), t.ptr(b, seq_len_ - 1, 0), sizeof(T) * H);
        } else {
            feat = gap.forward(t);
        }
        TensorT<T> f = drop1.forward(feat, mode, rng);
        f = lr2.forward(fc1.forward(f));
        f = drop2.forward(f, mode, rng);
        return fc2.forward(f);
    }

    TensorT<T> backward(const TensorT<T>& dlogits) {
        TensorT<T> d = drop2.backward(fc2.backward(dlogits));
        d = drop1.backward(fc1.backward(lr2.backward(d)));
        TensorT<T> dseq;
        if (use_lstm) {
            const int B = d.dim(0), H = d.dim(1);
            TensorT<T> dh({B, seq_len_, H});
            for (int b = 0; b < B; ++b)
                std::memcpy(dh.ptr(b, seq_len_ - 1, 0), d.ptr(b, 0), sizeof(T) * H);
            for (auto it = lstms.rbegin(); it != lstms.rend(); ++it) dh = it->backward(dh);
            dseq = std::move(dh);
        } else {
            dseq = gap.backward(d);
        }
        return bn.backward(lr1.backward(dseq));
    }

    void register_params(ParamRegistry<T>& reg, const std::string& p) {
        bn.register_params(reg, p + "/bn");
        for (size_t i = 0; i < lstms.size(); ++i)
            lstms[i].register_params(reg, p + "/lstm" + std::to_string(i + 1));
        fc1.register_params(reg, p + "/fc1");
        fc2.register_params(reg, p + "/fc2");
    }
};

template <class T>
struct NetworkT {
    NetworkConfig cfg;
    BranchT<T> egm;
    std::unique_ptr<BranchT<T>> fft;
    TailT<T> tail;
    ParamRegistry<T> params_;
    std::vector<int> tail_input_shape_;

    NetworkT(const NetworkConfig& c, Rng& rng) : cfg(c) {
        cfg.validate();
        egm.init(cfg, rng);
        if (cfg.fft_branch) {
            fft = std::make_unique<BranchT<T>>();
            fft->init(cfg, rng);
        }
        tail.init(cfg, cfg.tail_channels(), rng);
        egm.register_params(params_, "egm");
        if (fft) fft->register_params(params_, "fft");
        tail.register_params(params_, "tail");
    }

    ParamRegistry<T>& params() { return params_; }
    const ParamRegistry<T>& params() const { return params_; }
    const std::vector<int>& tail_input_shape() const { return tail_input_shape_; }

    void zero_grads() {
        for (auto& p : params_)
            if (p.grad) p.grad->fill(T(0));
    }

    TensorT<T> logits(const TensorT<T>& x, const TensorT<T>* x_fft, Mode mode, Rng* rng) {
        if (x.dim_count() != 3 || x.dim(2) != 1 || x.dim(1) != cfg.input_length)
            throw WrongInputLength("network input must be (batch, " +
                                   std::to_string(cfg.input_length) + ", 1)");
        if (cfg.fft_branch && x_fft == nullptr)
            throw ShapeMismatch("fft branch enabled but no spectrum batch given");
        TensorT<T> a = egm.forward(x, mode, rng);
        TensorT<T> cat;
        if (fft) {
            x_fft->require_shape({x.dim(0), cfg.input_length, 1}, "fft branch input");
            TensorT<T> b = fft->forward(*x_fft, mode, rng);
            cat = concat_channels(a, b);
        } else {
            cat = std::move(a);
        }
        tail_input_shape_ = cat.shape;
        TensorT<T> out = tail.forward(cat, mode, rng);
#ifndef NDEBUG
        if (!out.all_finite()) throw Error("non-finite values in network output");
#endif
        return out;
    }

    // Eval-mode class probabilities (softmax of logits).
    TensorT<T> probabilities(const TensorT<T>& x, const TensorT<T>* x_fft) {
        return softmax(logits(x, x_fft, Mode::Eval, nullptr));
    }

    // Accumulates parameter gradients for the most recent forward pass.
    void backward(const TensorT<T>& dlogits) {
        TensorT<T> dcat = tail.backward(dlogits);
        if (fft) {
            const int c1 = cfg.base_filters * cfg.n_stages;
            TensorT<T> da, db;
            split_channels(dcat, c1, da, db);
            egm.backward(da);
            fft->backward(db);
        } else {
            egm.backward(dcat);
        }
    }
};

using NetworkF = NetworkT<float>;
using NetworkD = NetworkT<double>;

} // namespace egm::nn
