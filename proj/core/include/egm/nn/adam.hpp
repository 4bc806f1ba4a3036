#pragma once

// Adam optimizer over a parameter registry. Moment buffers mirror the
// trainable tensors; bias corrections are computed in double precision.

#include <egm/errors.hpp>
#include <egm/nn/layers.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace egm::nn {

template <class T>
struct AdamT {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t t = 0;
    std::vector<std::vector<T>> m_, v_;

    void init(const ParamRegistry<T>& params) {
        t = 0;
        m_.clear();
        v_.clear();
        for (const auto& p : params) {
            if (!p.trainable) continue;
            m_.emplace_back(p.value->numel(), T(0));
            v_.emplace_back(p.value->numel(), T(0));
        }
    }

    void step(ParamRegistry<T>& params) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        size_t slot = 0;
        for (auto& p : params) {
            if (!p.trainable) continue;
            if (slot >= m_.size() || p.value->numel() != m_[slot].size())
                throw ShapeMismatch("optimizer state does not mirror parameters");
            auto& m = m_[slot];
            auto& v = v_[slot];
            T* th = p.value->ptr();
            const T* g = p.grad->ptr();
            const size_t n = p.value->numel();
            for (size_t i = 0; i < n; ++i) {
                const double gi = static_cast<double>(g[i]);
                const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * gi;
                const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * gi * gi;
                m[i] = static_cast<T>(mi);
                v[i] = static_cast<T>(vi);
                const double mhat = mi / bc1;
                const double vhat = vi / bc2;
                th[i] = static_cast<T>(static_cast<double>(th[i]) -
                                       lr * mhat / (std::sqrt(vhat) + eps));
            }
            ++slot;
        }
        if (slot != m_.size()) throw ShapeMismatch("optimizer state does not mirror parameters");
    }
};

using AdamF = AdamT<float>;

} // namespace egm::nn
