#ifndef SALNET_IMAGE_HPP
#define SALNET_IMAGE_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace salnet {

// Dense H x W x C grid of scalars, row-major with channels interleaved last:
// element (x, y, c) lives at ((y * width) + x) * channels + c. Frames, feature
// stacks, patches and maps all share this layout; it matches the FMAP file
// format byte for byte.
template <typename T>
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels, T fill = T{})
        : w_(width), h_(height), c_(channels),
          data_(static_cast<size_t>(width) * height * channels, fill) {
        assert(width > 0 && height > 0 && channels > 0);
    }

    int width() const { return w_; }
    int height() const { return h_; }
    int channels() const { return c_; }
    size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T& at(int x, int y, int c = 0) {
        assert(in_bounds(x, y, c));
        return data_[(static_cast<size_t>(y) * w_ + x) * c_ + c];
    }
    const T& at(int x, int y, int c = 0) const {
        assert(in_bounds(x, y, c));
        return data_[(static_cast<size_t>(y) * w_ + x) * c_ + c];
    }

    bool in_bounds(int x, int y, int c = 0) const {
        return x >= 0 && x < w_ && y >= 0 && y < h_ && c >= 0 && c < c_;
    }
    bool same_shape(const Image& o) const {
        return w_ == o.w_ && h_ == o.h_ && c_ == o.c_;
    }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& raw() { return data_; }
    const std::vector<T>& raw() const { return data_; }

    bool operator==(const Image& o) const {
        return same_shape(o) && data_ == o.data_;
    }

private:
    int w_ = 0, h_ = 0, c_ = 0;
    std::vector<T> data_;
};

// Float planes for file I/O and patch payloads (FMAP stores 32-bit floats);
// double planes for feature math and the network, where the oracle tolerances
// (1e-9) and finite-difference gradient checks need the headroom.
using PlaneStack = Image<float>;
using Tensor = Image<double>;

inline Tensor to_tensor(const PlaneStack& p) {
    Tensor t(p.width(), p.height(), p.channels());
    for (size_t i = 0; i < p.size(); ++i) t.data()[i] = p.data()[i];
    return t;
}

inline PlaneStack to_planes(const Tensor& t) {
    PlaneStack p(t.width(), t.height(), t.channels());
    for (size_t i = 0; i < t.size(); ++i) p.data()[i] = static_cast<float>(t.data()[i]);
    return p;
}

} // namespace salnet

#endif
