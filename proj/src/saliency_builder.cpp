#include "salnet/saliency_builder.hpp"

#include <algorithm>
#include <cmath>

#include "salnet/error.hpp"

namespace salnet {

void splat_gaussian(Image<double>& canvas, double cx, double cy, double f_i, double sigma) {
    if (sigma <= 0) throw InputError("splat_gaussian: sigma must be positive");
    if (cx < 0 || cx >= canvas.width() || cy < 0 || cy >= canvas.height())
        throw InputError("splat_gaussian: center outside frame");
    if (f_i == 0.0) return;
    const double peak = 10.0 * f_i / (2.0 * M_PI * sigma * sigma);
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int y = 0; y < canvas.height(); ++y) {
        double dy = y - cy;
        for (int x = 0; x < canvas.width(); ++x) {
            double dx = x - cx;
            canvas.at(x, y) += peak * std::exp(-(dx * dx + dy * dy) * inv2s2);
        }
    }
}

std::vector<int> dense_grid_positions(int extent, int t) {
    // Top-left offsets with stride t/2; the final patch is clamped flush so
    // every pixel is covered.
    std::vector<int> pos;
    int stride = std::max(1, t / 2);
    for (int p = 0; p + t <= extent; p += stride) pos.push_back(p);
    if (pos.empty() || pos.back() != extent - t) pos.push_back(extent - t);
    return pos;
}

SaliencyMap predict_dense_map(const cnn::NetworkModel& model, const PlaneStack& features,
                              int t) {
    if (t <= 0 || features.width() < t || features.height() < t)
        throw InputError("predict_dense_map: frame smaller than patch");
    if (features.channels() != model.input_shape.c || model.input_shape.h != t)
        throw InputError("predict_dense_map: features do not match model input");

    SaliencyMap map;
    map.patch_size = t;
    map.stride = std::max(1, t / 2);
    map.values = Image<double>(features.width(), features.height(), 1, 0.0);

    std::vector<int> xs = dense_grid_positions(features.width(), t);
    std::vector<int> ys = dense_grid_positions(features.height(), t);
    const double sigma = t / 2.0;

    PlaneStack patch(t, t, features.channels());
    for (int py : ys) {
        for (int px : xs) {
            for (int y = 0; y < t; ++y)
                for (int x = 0; x < t; ++x)
                    for (int c = 0; c < features.channels(); ++c)
                        patch.at(x, y, c) = features.at(px + x, py + y, c);
            double prob = model.predict_patch(patch);
            splat_gaussian(map.values, px + t / 2.0, py + t / 2.0, prob, sigma);
        }
    }

    double m = 0;
    for (size_t i = 0; i < map.values.size(); ++i) m = std::max(m, map.values.data()[i]);
    if (m > 0)
        for (size_t i = 0; i < map.values.size(); ++i) map.values.data()[i] /= m;
    return map;
}

} // namespace salnet
