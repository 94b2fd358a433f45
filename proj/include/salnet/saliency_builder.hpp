#ifndef SALNET_SALIENCY_BUILDER_HPP
#define SALNET_SALIENCY_BUILDER_HPP

#include "salnet/cnn.hpp"
#include "salnet/image.hpp"

namespace salnet {

struct SaliencyMap {
    Image<double> values; // H x W in [0,1], max 1 unless the map is all zero
    int patch_size = 0;
    int stride = 0;
};

// Adds a Gaussian with peak 10*f_i / (2*pi*sigma^2) at (cx, cy); splats
// accumulate additively over the whole canvas.
void splat_gaussian(Image<double>& canvas, double cx, double cy, double f_i, double sigma);

// Classifies t x t patches on a half-overlap grid (stride floor(t/2), last
// row/column clamped flush to the border), splats each probability with
// sigma = t/2 and normalizes the accumulated surface by its maximum.
SaliencyMap predict_dense_map(const cnn::NetworkModel& model, const PlaneStack& features,
                              int t);

// Grid of patch centers used by predict_dense_map, exposed for tests.
std::vector<int> dense_grid_positions(int extent, int t);

} // namespace salnet

#endif
