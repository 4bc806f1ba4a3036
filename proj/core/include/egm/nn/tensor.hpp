#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "egm/errors.hpp"

namespace egm::nn {

// Dense row-major tensor. Plain data holder: layers own their parameter and
// cache tensors directly and index with explicit strides.
template <class T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> data;

    TensorT() = default;
    explicit TensorT(std::vector<int> s) : shape(std::move(s)), data(numel_of(shape), T(0)) {}

    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) n *= static_cast<size_t>(d);
        return n;
    }

    size_t numel() const { return data.size(); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    int dim_count() const { return static_cast<int>(shape.size()); }

    T* ptr() { return data.data(); }
    const T* ptr() const { return data.data(); }

    // Row-major offset of a full index tuple; arity must match the rank.
    template <class... Ix>
    size_t offset(int i0, Ix... rest) const {
        const int idx[] = {i0, static_cast<int>(rest)...};
        size_t off = 0;
        for (size_t d = 0; d < 1 + sizeof...(Ix); ++d)
            off = off * static_cast<size_t>(shape[d]) + static_cast<size_t>(idx[d]);
        return off;
    }

    template <class... Ix>
    T* ptr(int i0, Ix... rest) {
        return data.data() + offset(i0, rest...);
    }
    template <class... Ix>
    const T* ptr(int i0, Ix... rest) const {
        return data.data() + offset(i0, rest...);
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const TensorT& o) const { return shape == o.shape; }

    void require_shape(const std::vector<int>& s, const char* what) const {
        if (shape != s) {
            std::string msg = std::string(what) + ": expected shape (";
            for (size_t i = 0; i < s.size(); ++i)
                msg += (i ? "," : "") + std::to_string(s[i]);
            msg += "), got (";
            for (size_t i = 0; i < shape.size(); ++i)
                msg += (i ? "," : "") + std::to_string(shape[i]);
            msg += ")";
            throw ShapeMismatch(msg);
        }
    }

    bool all_finite() const {
        for (T v : data)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }
};

using TensorF = TensorT<float>;
using TensorD = TensorT<double>;

} // namespace egm::nn
