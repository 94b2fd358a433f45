#ifndef SALNET_CONTRAST_FEATURES_HPP
#define SALNET_CONTRAST_FEATURES_HPP

#include <utility>

#include "salnet/image.hpp"

namespace salnet {

// Hue-Saturation-Intensity planes. Hue is a color-wheel fraction in [0,1)
// (1.0 would be a full 360 degree turn); saturation and intensity in [0,1].
// Achromatic pixels take hue 0 by convention.
struct HsiImage {
    Image<double> hue;
    Image<double> sat;
    Image<double> intensity;
    int width() const { return hue.width(); }
    int height() const { return hue.height(); }
};

// The seven per-pixel contrast descriptors, channel order V1..V7:
// color contrast, hue contrast, contrast of opponents, saturation contrast,
// intensity contrast, warm-color dominance, brightness/saturation dominance.
struct ContrastStack {
    Image<double> v; // H x W x 7
};

// Floor protecting the pixel interaction as saturation/intensity approach 0.
inline constexpr double kMinInteraction = 0.21;

HsiImage rgb_to_hsi(const PlaneStack& rgb);

// Saturation and intensity interaction factors between pixel i and its
// neighbor j: ((S_i+S_j)/2) * (k_min + (1-k_min) * S_i), likewise intensity.
std::pair<double, double> interaction_factors(const HsiImage& hsi, int xi, int yi,
                                              int xj, int yj);

// Wheel distance between two hues, the short way around; result in [0, 0.5].
double hue_difference(double h_i, double h_j);

// Neighbor sums use the pixels that exist and divide by the actual neighbor
// count (8 interior, 5 edge, 3 corner).
ContrastStack contrast_descriptors(const HsiImage& hsi);

// HSV planes for the hsv8k input configuration: hue and saturation as in HSI,
// value = max(R,G,B).
Image<double> rgb_to_hsv_channels(const PlaneStack& rgb);

} // namespace salnet

#endif
