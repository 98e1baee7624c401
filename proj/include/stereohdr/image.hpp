// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace stereohdr {

/// Row-major single-channel raster.
template <typename T>
class Image {
  public:
    Image() = default;
    Image(int width, int height, T fill = T{})
        : width_(width), height_(height), data_(size_t(width) * size_t(height), fill) {}

    int width() const { return width_; }
    int height() const { return height_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y) {
        assert(in_bounds(x, y));
        return data_[size_t(y) * width_ + x];
    }
    const T& at(int x, int y) const {
        assert(in_bounds(x, y));
        return data_[size_t(y) * width_ + x];
    }
    T& operator[](size_t i) { return data_[i]; }
    const T& operator[](size_t i) const { return data_[i]; }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

    template <typename U>
    bool same_shape(const Image<U>& o) const {
        return width_ == o.width() && height_ == o.height();
    }

    bool operator==(const Image& o) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<T> data_;
};

using ImageF = Image<double>;
using ImageU8 = Image<uint8_t>;
using Mask = Image<uint8_t>;  // nonzero = set

inline size_t count_set(const Mask& m) {
    size_t n = 0;
    for (auto v : m.data()) n += (v != 0);
    return n;
}

/// Summed-area table with one row/column of zero padding: sums(x, y) holds the
/// sum over the rectangle [0, x) x [0, y).
inline std::vector<double> integral_image(const ImageF& img) {
    const int w = img.width(), h = img.height();
    std::vector<double> s(size_t(w + 1) * (h + 1), 0.0);
    for (int y = 0; y < h; ++y) {
        double row = 0.0;
        for (int x = 0; x < w; ++x) {
            row += img.at(x, y);
            s[size_t(y + 1) * (w + 1) + (x + 1)] = s[size_t(y) * (w + 1) + (x + 1)] + row;
        }
    }
    return s;
}

inline double box_sum(const std::vector<double>& integral, int w, int x0, int y0, int x1, int y1) {
    // Inclusive pixel rectangle [x0, x1] x [y0, y1].
    const int stride = w + 1;
    return integral[size_t(y1 + 1) * stride + (x1 + 1)] - integral[size_t(y0) * stride + (x1 + 1)] -
           integral[size_t(y1 + 1) * stride + x0] + integral[size_t(y0) * stride + x0];
}

/// Separable Gaussian blur with reflected borders. sigma <= 0 is the identity.
inline ImageF gaussian_blur(const ImageF& img, double sigma) {
    if (sigma <= 0.0 || img.empty()) return img;
    const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        norm += kernel[i + radius];
    }
    for (auto& k : kernel) k /= norm;

    const int w = img.width(), h = img.height();
    auto reflect = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
        return std::clamp(i, 0, n - 1);
    };
    ImageF tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.at(reflect(x + i, w), y);
            tmp.at(x, y) = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, reflect(y + i, h));
            out.at(x, y) = acc;
        }
    return out;
}

}  // namespace stereohdr
