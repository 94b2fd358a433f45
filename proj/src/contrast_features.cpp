#include "salnet/contrast_features.hpp"

#include <algorithm>
#include <cmath>

#include "salnet/error.hpp"

namespace salnet {

namespace {

// Hue from the geometric HSI formula, as a wheel fraction in [0,1).
double hue_of(double r, double g, double b) {
    double num = 0.5 * ((r - g) + (r - b));
    double den = std::sqrt((r - g) * (r - g) + (r - b) * (g - b));
    if (den < 1e-12) return 0.0;
    double theta = std::acos(std::clamp(num / den, -1.0, 1.0));
    if (b > g) theta = 2.0 * M_PI - theta;
    double h = theta / (2.0 * M_PI);
    if (h >= 1.0) h -= 1.0;
    return h;
}

} // namespace

HsiImage rgb_to_hsi(const PlaneStack& rgb) {
    if (rgb.channels() != 3) throw InputError("rgb_to_hsi expects 3 channels");
    const int w = rgb.width(), h = rgb.height();
    HsiImage out{Image<double>(w, h, 1), Image<double>(w, h, 1), Image<double>(w, h, 1)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double r = rgb.at(x, y, 0), g = rgb.at(x, y, 1), b = rgb.at(x, y, 2);
            double intensity = (r + g + b) / 3.0;
            double sat = 0.0;
            if (intensity > 1e-12)
                sat = std::clamp(1.0 - std::min({r, g, b}) / intensity, 0.0, 1.0);
            out.intensity.at(x, y) = intensity;
            out.sat.at(x, y) = sat;
            out.hue.at(x, y) = sat > 0.0 ? hue_of(r, g, b) : 0.0;
        }
    }
    return out;
}

std::pair<double, double> interaction_factors(const HsiImage& hsi, int xi, int yi,
                                              int xj, int yj) {
    double si = hsi.sat.at(xi, yi), sj = hsi.sat.at(xj, yj);
    double ii = hsi.intensity.at(xi, yi), ij = hsi.intensity.at(xj, yj);
    double f_sat = 0.5 * (si + sj) * (kMinInteraction + (1.0 - kMinInteraction) * si);
    double f_int = 0.5 * (ii + ij) * (kMinInteraction + (1.0 - kMinInteraction) * ii);
    return {f_sat, f_int};
}

double hue_difference(double h_i, double h_j) {
    double d = std::fabs(h_i - h_j);
    return d <= 0.5 ? d : 1.0 - d;
}

ContrastStack contrast_descriptors(const HsiImage& hsi) {
    const int w = hsi.width(), h = hsi.height();
    ContrastStack out{Image<double>(w, h, 7, 0.0)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double hue_i = hsi.hue.at(x, y);
            double sat_i = hsi.sat.at(x, y);
            double int_i = hsi.intensity.at(x, y);
            double x1 = 0, x2 = 0, x3 = 0, x4 = 0, x5 = 0;
            int neighbors = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    ++neighbors;
                    auto [f_sat, f_int] = interaction_factors(hsi, x, y, nx, ny);
                    double ff = f_sat * f_int;
                    double hue_j = hsi.hue.at(nx, ny);
                    double dhue = hue_difference(hue_i, hue_j);
                    x1 += ff;
                    x2 += ff * dhue;
                    // Opponents: active hue against a passive neighbor on the
                    // far side of the wheel, the gate as printed (asymmetric).
                    if (hue_i < 0.5 && hue_j >= 0.5) x3 += ff * dhue;
                    x4 += ff * std::fabs(sat_i - hsi.sat.at(nx, ny));
                    x5 += ff * std::fabs(int_i - hsi.intensity.at(nx, ny));
                }
            }
            double inv_n = 1.0 / neighbors;
            out.v.at(x, y, 0) = x1 * inv_n;
            out.v.at(x, y, 1) = x2 * inv_n;
            out.v.at(x, y, 2) = x3 * inv_n;
            out.v.at(x, y, 3) = x4 * inv_n;
            out.v.at(x, y, 4) = x5 * inv_n;
            out.v.at(x, y, 5) = (hue_i >= 0.0 && hue_i < 0.125) ? sat_i * int_i : 0.0;
            out.v.at(x, y, 6) = sat_i * int_i;
        }
    }
    return out;
}

Image<double> rgb_to_hsv_channels(const PlaneStack& rgb) {
    if (rgb.channels() != 3) throw InputError("rgb_to_hsv_channels expects 3 channels");
    HsiImage hsi = rgb_to_hsi(rgb);
    const int w = rgb.width(), h = rgb.height();
    Image<double> out(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y, 0) = hsi.hue.at(x, y);
            out.at(x, y, 1) = hsi.sat.at(x, y);
            out.at(x, y, 2) = std::max({rgb.at(x, y, 0), rgb.at(x, y, 1), rgb.at(x, y, 2)});
        }
    }
    return out;
}

} // namespace salnet
