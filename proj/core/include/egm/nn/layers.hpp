#pragma once

// Neural-network layer primitives. Every layer owns its parameters, its
// gradient buffers, and whatever activations its backward pass needs.
// Conventions shared by all layers:
//   - activations are dense row-major (batch, time, channels) or (batch, features)
//   - forward() caches what backward() needs; backward() returns the input
//     gradient and *accumulates* into parameter gradients (callers zero them)
//   - all loops run in a fixed order so results are bitwise reproducible

#include <egm/errors.hpp>
#include <egm/nn/gemm.hpp>
#include <egm/nn/tensor.hpp>
#include <egm/rng.hpp>

#include <cmath>
#include <cstring>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace egm::nn {

enum class Mode { Train, Eval };

// One named parameter tensor exposed to the optimizer / checkpoint code.
// Non-trainable entries (batch-norm running stats) are saved and restored
// but never updated by the optimizer and have no gradient buffer.
template <class T>
struct ParamRef {
    std::string name;
    TensorT<T>* value = nullptr;
    TensorT<T>* grad = nullptr; // null for non-trainable entries
    bool trainable = true;
};

template <class T>
using ParamRegistry = std::vector<ParamRef<T>>;

template <class T>
T sigmoid(T x) {
    return T(1) / (T(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// Conv1d: temporal convolution with "same" padding, cross-correlation
// orientation. Kernel layout (K, Cin, Cout); input (B, L, Cin).
//   out[b, t, o] = bias[o] + sum_{k, c} in[b, stride*t + k - pad_left, c] * kernel[k, c, o]
// pad_left = (K - 1) / 2; stride 1 keeps the length, stride 2 halves it
// (floor). Out-of-range input samples read as zero.
// ---------------------------------------------------------------------------
template <class T>
struct Conv1d {
    int k_size = 0, c_in = 0, c_out = 0, stride = 1;
    TensorT<T> kernel, bias;
    TensorT<T> g_kernel, g_bias;

    // cached by forward for backward
    TensorT<T> padded_; // (B, Lpad, Cin), zero-padded copy of the input
    int B_ = 0, L_ = 0, Lout_ = 0, Lpad_ = 0, pad_left_ = 0;

    void init(int k, int cin, int cout, int stride_in, Rng& rng) {
        k_size = k;
        c_in = cin;
        c_out = cout;
        stride = stride_in;
        kernel = TensorT<T>({k, cin, cout});
        bias = TensorT<T>({cout});
        const double limit = std::sqrt(6.0 / (static_cast<double>(k) * cin));
        for (auto& w : kernel.data) w = static_cast<T>(rng.uniform(-limit, limit));
        g_kernel = TensorT<T>({k, cin, cout});
        g_bias = TensorT<T>({cout});
    }

    int out_length(int L) const { return stride == 1 ? L : L / stride; }

    TensorT<T> forward(const TensorT<T>& x) {
        x.require_shape({x.dim(0), x.dim(1), c_in}, "conv input");
        B_ = x.dim(0);
        L_ = x.dim(1);
        pad_left_ = (k_size - 1) / 2;
        Lout_ = out_length(L_);
        Lpad_ = (Lout_ - 1) * stride + k_size;
        padded_ = TensorT<T>({B_, Lpad_, c_in});
        const int copy_lo = pad_left_;
        const int copy_hi = std::min(Lpad_, L_ + pad_left_);
        for (int b = 0; b < B_; ++b) {
            if (copy_hi > copy_lo)
                std::memcpy(padded_.ptr(b, copy_lo, 0), x.ptr(b, 0, 0),
                            sizeof(T) * static_cast<size_t>(copy_hi - copy_lo) * c_in);
        }
        TensorT<T> out({B_, Lout_, c_out});
        for (int b = 0; b < B_; ++b)
            for (int t = 0; t < Lout_; ++t)
                std::memcpy(out.ptr(b, t, 0), bias.data.data(), sizeof(T) * c_out);
        // One GEMM per kernel tap: rows of the padded buffer at offset k,
        // spaced stride*Cin apart, times the (Cin, Cout) slice of the kernel.
        for (int b = 0; b < B_; ++b) {
            for (int k = 0; k < k_size; ++k) {
                gemm_acc(Lout_, c_out, c_in,
                         padded_.ptr(b, k, 0), stride * c_in,
                         kernel.ptr(k, 0, 0), c_out,
                         out.ptr(b, 0, 0), c_out);
            }
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        dy.require_shape({B_, Lout_, c_out}, "conv output grad");
        for (int b = 0; b < B_; ++b)
            for (int t = 0; t < Lout_; ++t) {
                const T* row = dy.ptr(b, t, 0);
                for (int o = 0; o < c_out; ++o) g_bias.data[o] += row[o];
            }
        for (int k = 0; k < k_size; ++k)
            for (int b = 0; b < B_; ++b)
                gemm_acc_tn(Lout_, c_out, c_in,
                            padded_.ptr(b, k, 0), stride * c_in,
                            dy.ptr(b, 0, 0), c_out,
                            g_kernel.ptr(k, 0, 0), c_out);
        // Input gradient wants kernel slices transposed to (Cout, Cin).
        TensorT<T> ker_t({k_size, c_out, c_in});
        for (int k = 0; k < k_size; ++k)
            for (int c = 0; c < c_in; ++c)
                for (int o = 0; o < c_out; ++o)
                    *ker_t.ptr(k, o, c) = *kernel.ptr(k, c, o);
        TensorT<T> dpad({B_, Lpad_, c_in});
        for (int k = 0; k < k_size; ++k)
            for (int b = 0; b < B_; ++b)
                gemm_acc(Lout_, c_in, c_out,
                         dy.ptr(b, 0, 0), c_out,
                         ker_t.ptr(k, 0, 0), c_in,
                         dpad.ptr(b, k, 0), stride * c_in);
        TensorT<T> dx({B_, L_, c_in});
        const int copy_hi = std::min(Lpad_, L_ + pad_left_);
        for (int b = 0; b < B_; ++b) {
            if (copy_hi > pad_left_)
                std::memcpy(dx.ptr(b, 0, 0), dpad.ptr(b, pad_left_, 0),
                            sizeof(T) * static_cast<size_t>(copy_hi - pad_left_) * c_in);
        }
        return dx;
    }

    void register_params(ParamRegistry<T>& reg, const std::string& prefix) {
        reg.push_back({prefix + "/kernel", &kernel, &g_kernel, true});
        reg.push_back({prefix + "/bias", &bias, &g_bias, true});
    }
};

// ---------------------------------------------------------------------------
// BatchNorm1d over the channel axis of (B, L, C) activations (or (B, F) rows
// with L = 1). Training uses biased batch statistics over the B*L rows and
// updates running stats with momentum 0.99; eval normalizes with the running
// stats. eps 1e-3 sits inside the square root.
// ---------------------------------------------------------------------------
template <class T>
struct BatchNorm1d {
    int C = 0;
    T momentum = static_cast<T>(0.99);
    T eps = static_cast<T>(1e-3);
    TensorT<T> gamma, beta, run_mean, run_var;
    TensorT<T> g_gamma, g_beta;

    TensorT<T> xhat_;          // cached normalized activations
    std::vector<T> rstd_;      // per-channel 1/sqrt(var + eps) used in forward
    int64_t rows_ = 0;
    Mode mode_ = Mode::Train;
    std::vector<int> in_shape_;

    void init(int channels) {
        C = channels;
        gamma = TensorT<T>({C});
        beta = TensorT<T>({C});
        run_mean = TensorT<T>({C});
        run_var = TensorT<T>({C});
        gamma.fill(T(1));
        run_var.fill(T(1));
        g_gamma = TensorT<T>({C});
        g_beta = TensorT<T>({C});
    }

    TensorT<T> forward(const TensorT<T>& x, Mode mode) {
        if (x.dim(x.dim_count() - 1) != C) throw ShapeMismatch("batch norm channel mismatch");
        in_shape_ = x.shape;
        mode_ = mode;
        rows_ = static_cast<int64_t>(x.numel()) / C;
        const int64_t M = rows_;
        std::vector<T> mean(C, T(0)), var(C, T(0));
        if (mode == Mode::Train) {
            for (int64_t r = 0; r < M; ++r) {
                const T* row = x.data.data() + r * C;
                for (int c = 0; c < C; ++c) mean[c] += row[c];
            }
            for (int c = 0; c < C; ++c) mean[c] /= static_cast<T>(M);
            for (int64_t r = 0; r < M; ++r) {
                const T* row = x.data.data() + r * C;
                for (int c = 0; c < C; ++c) {
                    const T d = row[c] - mean[c];
                    var[c] += d * d;
                }
            }
            for (int c = 0; c < C; ++c) var[c] /= static_cast<T>(M);
            for (int c = 0; c < C; ++c) {
                run_mean.data[c] = momentum * run_mean.data[c] + (T(1) - momentum) * mean[c];
                run_var.data[c] = momentum * run_var.data[c] + (T(1) - momentum) * var[c];
            }
        } else {
            mean = run_mean.data;
            var = run_var.data;
        }
        rstd_.assign(C, T(0));
        for (int c = 0; c < C; ++c) rstd_[c] = T(1) / std::sqrt(var[c] + eps);
        xhat_ = TensorT<T>(x.shape);
        TensorT<T> out(x.shape);
        for (int64_t r = 0; r < M; ++r) {
            const T* row = x.data.data() + r * C;
            T* xh = xhat_.data.data() + r * C;
            T* y = out.data.data() + r * C;
            for (int c = 0; c < C; ++c) {
                xh[c] = (row[c] - mean[c]) * rstd_[c];
                y[c] = gamma.data[c] * xh[c] + beta.data[c];
            }
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        dy.require_shape(in_shape_, "batch norm output grad");
        const int64_t M = rows_;
        std::vector<T> sum_dy(C, T(0)), sum_dy_xhat(C, T(0));
        for (int64_t r = 0; r < M; ++r) {
            const T* g = dy.data.data() + r * C;
            const T* xh = xhat_.data.data() + r * C;
            for (int c = 0; c < C; ++c) {
                sum_dy[c] += g[c];
                sum_dy_xhat[c] += g[c] * xh[c];
            }
        }
        for (int c = 0; c < C; ++c) {
            g_beta.data[c] += sum_dy[c];
            g_gamma.data[c] += sum_dy_xhat[c];
        }
        TensorT<T> dx(in_shape_);
        if (mode_ == Mode::Train) {
            const T invM = T(1) / static_cast<T>(M);
            for (int64_t r = 0; r < M; ++r) {
                const T* g = dy.data.data() + r * C;
                const T* xh = xhat_.data.data() + r * C;
                T* d = dx.data.data() + r * C;
                for (int c = 0; c < C; ++c)
                    d[c] = gamma.data[c] * rstd_[c] *
                           (g[c] - sum_dy[c] * invM - xh[c] * sum_dy_xhat[c] * invM);
            }
        } else {
            for (int64_t r = 0; r < M; ++r) {
                const T* g = dy.data.data() + r * C;
                T* d = dx.data.data() + r * C;
                for (int c = 0; c < C; ++c) d[c] = g[c] * gamma.data[c] * rstd_[c];
            }
        }
        return dx;
    }

    void register_params(ParamRegistry<T>& reg, const std::string& prefix) {
        reg.push_back({prefix + "/gamma", &gamma, &g_gamma, true});
        reg.push_back({prefix + "/beta", &beta, &g_beta, true});
        reg.push_back({prefix + "/running_mean", &run_mean, nullptr, false});
        reg.push_back({prefix + "/running_var", &run_var, nullptr, false});
    }
};

// ---------------------------------------------------------------------------
// LeakyReLU, slope applied to negative inputs. Each instance caches its own
// input signs, so reuse one object per graph location only.
// ---------------------------------------------------------------------------
template <class T>
struct LeakyReLU {
    T slope = static_cast<T>(0.3);
    std::vector<char> neg_;
    std::vector<int> in_shape_;

    TensorT<T> forward(const TensorT<T>& x) {
        in_shape_ = x.shape;
        neg_.assign(x.numel(), 0);
        TensorT<T> out(x.shape);
        for (size_t i = 0; i < x.numel(); ++i) {
            const T v = x.data[i];
            if (v < T(0)) {
                neg_[i] = 1;
                out.data[i] = slope * v;
            } else {
                out.data[i] = v;
            }
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        dy.require_shape(in_shape_, "leaky relu output grad");
        TensorT<T> dx(in_shape_);
        for (size_t i = 0; i < dy.numel(); ++i)
            dx.data[i] = neg_[i] ? slope * dy.data[i] : dy.data[i];
        return dx;
    }
};

// ---------------------------------------------------------------------------
// SpatialDropout: zeroes whole channels of (B, L, C) activations per sample,
// scaling survivors by 1/(1-rate). Identity in eval mode or at rate 0 (no
// random draws in either case, so the rng stream is unaffected).
// ---------------------------------------------------------------------------
template <class T>
struct SpatialDropout {
    T rate = static_cast<T>(0.2);
    std::vector<T> chan_scale_; // (B*C), 0 or 1/(1-rate)
    bool active_ = false;
    std::vector<int> in_shape_;

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        in_shape_ = x.shape;
        active_ = (mode == Mode::Train && rate > T(0));
        if (!active_) return x;
        if (!rng) throw InvalidConfig("train-mode spatial dropout needs an rng");
        const int B = x.dim(0), L = x.dim(1), C = x.dim(2);
        const T keep_scale = T(1) / (T(1) - rate);
        chan_scale_.assign(static_cast<size_t>(B) * C, T(0));
        for (int b = 0; b < B; ++b)
            for (int c = 0; c < C; ++c)
                chan_scale_[static_cast<size_t>(b) * C + c] =
                    (static_cast<T>(rng->uniform()) < rate) ? T(0) : keep_scale;
        TensorT<T> out(x.shape);
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < L; ++t) {
                const T* row = x.ptr(b, t, 0);
                T* y = out.ptr(b, t, 0);
                const T* sc = chan_scale_.data() + static_cast<size_t>(b) * C;
                for (int c = 0; c < C; ++c) y[c] = row[c] * sc[c];
            }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        dy.require_shape(in_shape_, "spatial dropout output grad");
        if (!active_) return dy;
        const int B = dy.dim(0), L = dy.dim(1), C = dy.dim(2);
        TensorT<T> dx(dy.shape);
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < L; ++t) {
                const T* g = dy.ptr(b, t, 0);
                T* d = dx.ptr(b, t, 0);
                const T* sc = chan_scale_.data() + static_cast<size_t>(b) * C;
                for (int c = 0; c < C; ++c) d[c] = g[c] * sc[c];
            }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Dropout: element-wise inverted dropout. Identity in eval mode / at rate 0.
// ---------------------------------------------------------------------------
template <class T>
struct Dropout {
    T rate = static_cast<T>(0.2);
    std::vector<T> scale_;
    bool active_ = false;
    std::vector<int> in_shape_;

    TensorT<T> forward(const TensorT<T>& x, Mode mode, Rng* rng) {
        in_shape_ = x.shape;
        active_ = (mode == Mode::Train && rate > T(0));
        if (!active_) return x;
        if (!rng) throw InvalidConfig("train-mode dropout needs an rng");
        const T keep_scale = T(1) / (T(1) - rate);
        scale_.assign(x.numel(), T(0));
        for (size_t i = 0; i < x.numel(); ++i)
            scale_[i] = (static_cast<T>(rng->uniform()) < rate) ? T(0) : keep_scale;
        TensorT<T> out(x.shape);
        for (size_t i = 0; i < x.numel(); ++i) out.data[i] = x.data[i] * scale_[i];
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        dy.require_shape(in_shape_, "dropout output grad");
        if (!active_) return dy;
        TensorT<T> dx(dy.shape);
        for (size_t i = 0; i < dy.numel(); ++i) dx.data[i] = dy.data[i] * scale_[i];
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Dense: out = x * W + b for x (B, Fin), W (Fin, Fout).
// ---------------------------------------------------------------------------
template <class T>
struct Dense {
    int f_in = 0, f_out = 0;
    TensorT<T> weight, bias;
    TensorT<T> g_weight, g_bias;
    TensorT<T> x_; // cached input

    void init(int fin, int fout, Rng& rng) {
        f_in = fin;
        f_out = fout;
        weight = TensorT<T>({fin, fout});
        bias = TensorT<T>({fout});
        const double limit = std::sqrt(6.0 / static_cast<double>(fin));
        for (auto& w : weight.data) w = static_cast<T>(rng.uniform(-limit, limit));
        g_weight = TensorT<T>({fin, fout});
        g_bias = TensorT<T>({fout});
    }

    TensorT<T> forward(const TensorT<T>& x) {
        x.require_shape({x.dim(0), f_in}, "dense input");
        x_ = x;
        const int B = x.dim(0);
        TensorT<T> out({B, f_out});
        for (int b = 0; b < B; ++b)
            std::memcpy(out.ptr(b, 0), bias.data.data(), sizeof(T) * f_out);
        gemm_acc(B, f_out, f_in, x.data.data(), f_in, weight.data.data(), f_out,
                 out.data.data(), f_out);
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        const int B = x_.dim(0);
        dy.require_shape({B, f_out}, "dense output grad");
        for (int b = 0; b < B; ++b) {
            const T* row = dy.ptr(b, 0);
            for (int o = 0; o < f_out; ++o) g_bias.data[o] += row[o];
        }
        gemm_acc_tn(B, f_out, f_in, x_.data.data(), f_in, dy.data.data(), f_out,
                    g_weight.data.data(), f_out);
        TensorT<T> w_t({f_out, f_in});
        for (int i = 0; i < f_in; ++i)
            for (int o = 0; o < f_out; ++o) *w_t.ptr(o, i) = *weight.ptr(i, o);
        TensorT<T> dx({B, f_in});
        gemm_acc(B, f_in, f_out, dy.data.data(), f_out, w_t.data.data(), f_in,
                 dx.data.data(), f_in);
        return dx;
    }

    void register_params(ParamRegistry<T>& reg, const std::string& prefix) {
        reg.push_back({prefix + "/weight", &weight, &g_weight, true});
        reg.push_back({prefix + "/bias", &bias, &g_bias, true});
    }
};

// ---------------------------------------------------------------------------
// LSTM layer over full sequences: x (B, T, F) -> h (B, T, H).
// Gate order inside the 4H axis is [input, forget, cell, output]:
//   z = x_t * Wx + h_{t-1} * Wh + bias            (z split into i, f, g, o)
//   i = sigmoid(z_i)  f = sigmoid(z_f)  g = tanh(z_g)  o = sigmoid(z_o)
//   c_t = f . c_{t-1} + i . g      h_t = o . tanh(c_t)
// States start at zero for every sequence; forget-gate bias starts at 1.
// ---------------------------------------------------------------------------
template <class T>
struct Lstm {
    int F = 0, H = 0;
    TensorT<T> wx, wh, bias; // (F, 4H), (H, 4H), (4H)
    TensorT<T> g_wx, g_wh, g_bias;

    // caches: post-activation gates, cell states, tanh(c), inputs, outputs
    TensorT<T> gates_;  // (T, B, 4H)
    TensorT<T> cells_;  // (T, B, H)
    TensorT<T> tanhc_;  // (T, B, H)
    TensorT<T> x_;      // (B, T, F)
    TensorT<T> hseq_;   // (B, T, H)
    int B_ = 0, T_ = 0;

    void init(int f, int h, Rng& rng) {
        F = f;
        H = h;
        wx = TensorT<T>({f, 4 * h});
        wh = TensorT<T>({h, 4 * h});
        bias = TensorT<T>({4 * h});
        const double lim_x = std::sqrt(1.0 / f);
        for (auto& w : wx.data) w = static_cast<T>(rng.uniform(-lim_x, lim_x));
        const double lim_h = std::sqrt(1.0 / h);
        for (auto& w : wh.data) w = static_cast<T>(rng.uniform(-lim_h, lim_h));
        for (int j = 0; j < h; ++j) bias.data[static_cast<size_t>(h) + j] = T(1);
        g_wx = TensorT<T>({f, 4 * h});
        g_wh = TensorT<T>({h, 4 * h});
        g_bias = TensorT<T>({4 * h});
    }

    TensorT<T> forward(const TensorT<T>& x) {
        x.require_shape({x.dim(0), x.dim(1), F}, "lstm input");
        B_ = x.dim(0);
        T_ = x.dim(1);
        x_ = x;
        const int G = 4 * H;
        // Input projections for all timesteps in one GEMM.
        TensorT<T> pre({B_, T_, G});
        for (int b = 0; b < B_; ++b)
            for (int t = 0; t < T_; ++t)
                std::memcpy(pre.ptr(b, t, 0), bias.data.data(), sizeof(T) * G);
        gemm_acc(B_ * T_, G, F, x.data.data(), F, wx.data.data(), G, pre.data.data(), G);
        gates_ = TensorT<T>({T_, B_, G});
        cells_ = TensorT<T>({T_, B_, H});
        tanhc_ = TensorT<T>({T_, B_, H});
        hseq_ = TensorT<T>({B_, T_, H});
        TensorT<T> h_prev({B_, H});
        TensorT<T> z({B_, G});
        for (int t = 0; t < T_; ++t) {
            for (int b = 0; b < B_; ++b)
                std::memcpy(z.ptr(b, 0), pre.ptr(b, t, 0), sizeof(T) * G);
            gemm_acc(B_, G, H, h_prev.data.data(), H, wh.data.data(), G, z.data.data(), G);
            for (int b = 0; b < B_; ++b) {
                const T* zb = z.ptr(b, 0);
                T* gate = gates_.ptr(t, b, 0);
                T* cell = cells_.ptr(t, b, 0);
                T* tc = tanhc_.ptr(t, b, 0);
                const T* c_prev = t > 0 ? cells_.ptr(t - 1, b, 0) : nullptr;
                T* h = hseq_.ptr(b, t, 0);
                for (int j = 0; j < H; ++j) {
                    const T gi = sigmoid(zb[j]);
                    const T gf = sigmoid(zb[H + j]);
                    const T gg = std::tanh(zb[2 * H + j]);
                    const T go = sigmoid(zb[3 * H + j]);
                    gate[j] = gi;
                    gate[H + j] = gf;
                    gate[2 * H + j] = gg;
                    gate[3 * H + j] = go;
                    const T c = gf * (c_prev ? c_prev[j] : T(0)) + gi * gg;
                    cell[j] = c;
                    tc[j] = std::tanh(c);
                    h[j] = go * tc[j];
                }
            }
            for (int b = 0; b < B_; ++b)
                std::memcpy(h_prev.ptr(b, 0), hseq_.ptr(b, t, 0), sizeof(T) * H);
        }
        return hseq_;
    }

    TensorT<T> backward(const TensorT<T>& dh_seq) {
        dh_seq.require_shape({B_, T_, H}, "lstm output grad");
        const int G = 4 * H;
        TensorT<T> dz_all({B_, T_, G});
        TensorT<T> dh({B_, H});
        TensorT<T> dc({B_, H});
        TensorT<T> dz({B_, G});
        TensorT<T> wh_t({G, H});
        for (int i = 0; i < H; ++i)
            for (int j = 0; j < G; ++j) *wh_t.ptr(j, i) = *wh.ptr(i, j);
        for (int t = T_ - 1; t >= 0; --t) {
            for (int b = 0; b < B_; ++b) {
                const T* gate = gates_.ptr(t, b, 0);
                const T* tc = tanhc_.ptr(t, b, 0);
                const T* c_prev = t > 0 ? cells_.ptr(t - 1, b, 0) : nullptr;
                const T* dht = dh_seq.ptr(b, t, 0);
                T* dhb = dh.ptr(b, 0);
                T* dcb = dc.ptr(b, 0);
                T* dzb = dz.ptr(b, 0);
                for (int j = 0; j < H; ++j) {
                    const T gi = gate[j], gf = gate[H + j], gg = gate[2 * H + j],
                            go = gate[3 * H + j];
                    const T dht_j = dhb[j] + dht[j];
                    const T dc_j = dcb[j] + dht_j * go * (T(1) - tc[j] * tc[j]);
                    const T do_j = dht_j * tc[j];
                    const T di = dc_j * gg;
                    const T dg = dc_j * gi;
                    const T df = dc_j * (c_prev ? c_prev[j] : T(0));
                    dzb[j] = di * gi * (T(1) - gi);
                    dzb[H + j] = df * gf * (T(1) - gf);
                    dzb[2 * H + j] = dg * (T(1) - gg * gg);
                    dzb[3 * H + j] = do_j * go * (T(1) - go);
                    dcb[j] = dc_j * gf; // carried to t-1
                }
            }
            for (int b = 0; b < B_; ++b) {
                std::memcpy(dz_all.ptr(b, t, 0), dz.ptr(b, 0), sizeof(T) * G);
                const T* dzb = dz.ptr(b, 0);
                for (int j = 0; j < G; ++j) g_bias.data[j] += dzb[j];
            }
            if (t > 0) {
                // dWh += h_{t-1}^T * dz; h_{t-1} rows live in hseq_.
                TensorT<T> h_prev({B_, H});
                for (int b = 0; b < B_; ++b)
                    std::memcpy(h_prev.ptr(b, 0), hseq_.ptr(b, t - 1, 0), sizeof(T) * H);
                gemm_acc_tn(B_, G, H, h_prev.data.data(), H, dz.data.data(), G,
                            g_wh.data.data(), G);
            }
            dh.fill(T(0));
            gemm_acc(B_, H, G, dz.data.data(), G, wh_t.data.data(), H, dh.data.data(), H);
        }
        gemm_acc_tn(B_ * T_, G, F, x_.data.data(), F, dz_all.data.data(), G,
                    g_wx.data.data(), G);
        TensorT<T> wx_t({G, F});
        for (int i = 0; i < F; ++i)
            for (int j = 0; j < G; ++j) *wx_t.ptr(j, i) = *wx.ptr(i, j);
        TensorT<T> dx({B_, T_, F});
        gemm_acc(B_ * T_, F, G, dz_all.data.data(), G, wx_t.data.data(), F,
                 dx.data.data(), F);
        return dx;
    }

    void register_params(ParamRegistry<T>& reg, const std::string& prefix) {
        reg.push_back({prefix + "/wx", &wx, &g_wx, true});
        reg.push_back({prefix + "/wh", &wh, &g_wh, true});
        reg.push_back({prefix + "/bias", &bias, &g_bias, true});
    }
};

// ---------------------------------------------------------------------------
// GlobalAvgPool over the time axis: (B, L, C) -> (B, C).
// ---------------------------------------------------------------------------
template <class T>
struct GlobalAvgPool {
    int B_ = 0, L_ = 0, C_ = 0;

    TensorT<T> forward(const TensorT<T>& x) {
        B_ = x.dim(0);
        L_ = x.dim(1);
        C_ = x.dim(2);
        TensorT<T> out({B_, C_});
        for (int b = 0; b < B_; ++b) {
            T* y = out.ptr(b, 0);
            for (int t = 0; t < L_; ++t) {
                const T* row = x.ptr(b, t, 0);
                for (int c = 0; c < C_; ++c) y[c] += row[c];
            }
            for (int c = 0; c < C_; ++c) y[c] /= static_cast<T>(L_);
        }
        return out;
    }

    TensorT<T> backward(const TensorT<T>& dy) {
        dy.require_shape({B_, C_}, "global pool output grad");
        TensorT<T> dx({B_, L_, C_});
        for (int b = 0; b < B_; ++b) {
            const T* g = dy.ptr(b, 0);
            for (int t = 0; t < L_; ++t) {
                T* d = dx.ptr(b, t, 0);
                for (int c = 0; c < C_; ++c) d[c] = g[c] / static_cast<T>(L_);
            }
        }
        return dx;
    }
};

// ---------------------------------------------------------------------------
// Softmax cross-entropy on logits (B, n_classes) with integer labels.
// Numerically stable via per-row max shift; loss is the batch mean; the
// returned gradient is (softmax - onehot) / B. Throws InvalidLabel for
// labels outside [0, n_classes).
// ---------------------------------------------------------------------------
template <class T>
std::pair<double, TensorT<T>> softmax_cross_entropy(const TensorT<T>& logits,
                                                    const std::vector<int>& labels) {
    const int B = logits.dim(0);
    const int C = logits.dim(1);
    if (static_cast<int>(labels.size()) != B)
        throw ShapeMismatch("label count does not match batch size");
    TensorT<T> grad({B, C});
    double loss = 0.0;
    for (int b = 0; b < B; ++b) {
        const int y = labels[static_cast<size_t>(b)];
        if (y < 0 || y >= C) throw InvalidLabel("class label out of range");
        const T* row = logits.ptr(b, 0);
        T mx = row[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (int c = 0; c < C; ++c) denom += std::exp(static_cast<double>(row[c] - mx));
        const double log_denom = std::log(denom);
        loss += log_denom - static_cast<double>(row[y] - mx);
        T* g = grad.ptr(b, 0);
        for (int c = 0; c < C; ++c) {
            const double p = std::exp(static_cast<double>(row[c] - mx)) / denom;
            g[c] = static_cast<T>((p - (c == y ? 1.0 : 0.0)) / B);
        }
    }
    return {loss / B, grad};
}

// Row-wise softmax of logits (B, C), used for reporting probabilities.
template <class T>
TensorT<T> softmax(const TensorT<T>& logits) {
    const int B = logits.dim(0);
    const int C = logits.dim(1);
    TensorT<T> out({B, C});
    for (int b = 0; b < B; ++b) {
        const T* row = logits.ptr(b, 0);
        T* y = out.ptr(b, 0);
        T mx = row[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        double denom = 0.0;
        for (int c = 0; c < C; ++c) denom += std::exp(static_cast<double>(row[c] - mx));
        for (int c = 0; c < C; ++c)
            y[c] = static_cast<T>(std::exp(static_cast<double>(row[c] - mx)) / denom);
    }
    return out;
}

} // namespace egm::nn
