#ifndef SALNET_FIXATION_MAP_HPP
#define SALNET_FIXATION_MAP_HPP

#include <utility>
#include <vector>

#include "salnet/image.hpp"

namespace salnet {

// Gaze-density surface: a sum of unit-height Gaussians centered at recorded
// fixations, normalized by its global maximum. Serves both as the labeling
// ground truth for patch extraction and as the reference map in evaluation.
struct FixationMap {
    Image<double> values; // H x W, in [0,1], max exactly 1 when nonempty
    double sigma_px = 0.0;
    int fixation_count = 0;
    bool empty() const { return fixation_count == 0; }
    double max_value() const;
};

// Gaussians are truncated at 4*sigma; the omitted tail is below 3.4e-4 of a
// unit peak per fixation. An empty fixation list yields an all-zero map with
// fixation_count = 0 so callers can skip the frame.
FixationMap build_wooding_map(const std::vector<std::pair<double, double>>& fixations,
                              int width, int height, double sigma_px);

// Exact stored value; throws on out-of-bounds coordinates.
double map_value_at(const FixationMap& map, int x, int y);

// Default spread when a caller passes sigma_px <= 0: 2% of the frame width.
double default_sigma_px(int width);

} // namespace salnet

#endif
