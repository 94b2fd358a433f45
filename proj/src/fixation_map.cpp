#include "salnet/fixation_map.hpp"

#include <algorithm>
#include <cmath>

#include "salnet/error.hpp"

namespace salnet {

double FixationMap::max_value() const {
    double m = 0.0;
    for (size_t i = 0; i < values.size(); ++i) m = std::max(m, values.data()[i]);
    return m;
}

double default_sigma_px(int width) {
    return 0.02 * width;
}

FixationMap build_wooding_map(const std::vector<std::pair<double, double>>& fixations,
                              int width, int height, double sigma_px) {
    if (width <= 0 || height <= 0) throw InputError("build_wooding_map: empty frame");
    if (sigma_px <= 0.0) throw InputError("build_wooding_map: sigma_px must be positive");

    FixationMap map;
    map.values = Image<double>(width, height, 1, 0.0);
    map.sigma_px = sigma_px;
    map.fixation_count = static_cast<int>(fixations.size());
    if (fixations.empty()) return map;

    const double inv2s2 = 1.0 / (2.0 * sigma_px * sigma_px);
    const double radius = 4.0 * sigma_px;
    for (const auto& [fx, fy] : fixations) {
        int x0 = std::max(0, static_cast<int>(std::ceil(fx - radius)));
        int x1 = std::min(width - 1, static_cast<int>(std::floor(fx + radius)));
        int y0 = std::max(0, static_cast<int>(std::ceil(fy - radius)));
        int y1 = std::min(height - 1, static_cast<int>(std::floor(fy + radius)));
        for (int y = y0; y <= y1; ++y) {
            double dy = y - fy;
            for (int x = x0; x <= x1; ++x) {
                double dx = x - fx;
                double d2 = dx * dx + dy * dy;
                if (d2 > radius * radius) continue;
                map.values.at(x, y) += std::exp(-d2 * inv2s2);
            }
        }
    }

    double m = map.max_value();
    if (m > 0.0)
        for (size_t i = 0; i < map.values.size(); ++i) map.values.data()[i] /= m;
    return map;
}

double map_value_at(const FixationMap& map, int x, int y) {
    if (!map.values.in_bounds(x, y))
        throw InputError("map_value_at: coordinates out of bounds");
    return map.values.at(x, y);
}

} // namespace salnet
