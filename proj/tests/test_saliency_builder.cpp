#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salnet/error.hpp"
#include "salnet/rng.hpp"
#include "salnet/saliency_builder.hpp"

using namespace salnet;
using namespace salnet::cnn;

namespace {

// Model whose salient-class probability is a pure function of the patch's
// mean first-channel value; lets map tests control per-patch outputs without
// training. Built as ip -> softmax with hand-set weights.
NetworkModel mean_probe_model(int t, int channels, double gain) {
    NetworkModel m =
        build_network({t, t, channels}, {inner_product_spec(2), softmax_spec()}, 0, 0.0);
    // logit_1 - logit_0 = gain * mean(channel 0)
    size_t k = static_cast<size_t>(t) * t * channels;
    for (size_t i = 0; i < k; i += channels)
        m.layers[0].weights[k + i] = gain / (static_cast<double>(t) * t);
    return m;
}

} // namespace

TEST_CASE("splat: peak addend matches the stated formula") {
    Image<double> canvas(128, 128, 1, 0.0);
    splat_gaussian(canvas, 64, 64, 1.0, 50.0);
    // 10 * f / (2*pi*sigma^2) with f=1, sigma=50 -> 10 / (2*pi*2500)
    CHECK(canvas.at(64, 64) == doctest::Approx(10.0 / (2.0 * M_PI * 2500.0)).epsilon(1e-12));
    CHECK(canvas.at(64, 64) == doctest::Approx(6.3662e-4).epsilon(1e-4));
}

TEST_CASE("splat: zero probability leaves the canvas untouched") {
    Image<double> canvas(16, 16, 1, 0.125);
    splat_gaussian(canvas, 8, 8, 0.0, 4.0);
    for (size_t i = 0; i < canvas.size(); ++i) CHECK(canvas.data()[i] == 0.125);
}

TEST_CASE("splat: two identical splats double the single addend everywhere") {
    Image<double> once(32, 32, 1, 0.0), twice(32, 32, 1, 0.0);
    splat_gaussian(once, 10, 12, 0.7, 6.0);
    splat_gaussian(twice, 10, 12, 0.7, 6.0);
    splat_gaussian(twice, 10, 12, 0.7, 6.0);
    for (size_t i = 0; i < once.size(); ++i)
        CHECK(twice.data()[i] == doctest::Approx(2.0 * once.data()[i]).epsilon(1e-12));
}

TEST_CASE("splat: out-of-frame center rejected") {
    Image<double> canvas(8, 8, 1, 0.0);
    CHECK_THROWS_AS(splat_gaussian(canvas, -1, 4, 0.5, 2.0), InputError);
    CHECK_THROWS_AS(splat_gaussian(canvas, 4, 8, 0.5, 2.0), InputError);
    CHECK_THROWS_AS(splat_gaussian(canvas, 4, 4, 0.5, 0.0), InputError);
}

TEST_CASE("grid: half-patch stride with a flush final position") {
    auto pos = dense_grid_positions(64, 32);
    CHECK(pos == std::vector<int>{0, 16, 32});
    auto pos2 = dense_grid_positions(70, 32);
    CHECK(pos2 == std::vector<int>{0, 16, 32, 38});
    // every pixel covered by at least one patch
    for (int extent : {33, 40, 64, 70, 100}) {
        auto p = dense_grid_positions(extent, 32);
        std::vector<bool> covered(extent, false);
        for (int left : p)
            for (int i = left; i < left + 32; ++i) covered[i] = true;
        for (int i = 0; i < extent; ++i) CHECK(covered[i]);
    }
}

TEST_CASE("dense map: constant classifier gives a flat interior after normalization") {
    NetworkModel m = mean_probe_model(16, 1, 0.0); // always 0.5
    PlaneStack features(96, 96, 1);
    SaliencyMap map = predict_dense_map(m, features, 16);
    CHECK(map.stride == 8);
    double mx = 0;
    for (size_t i = 0; i < map.values.size(); ++i)
        mx = std::max(mx, map.values.data()[i]);
    CHECK(mx == doctest::Approx(1.0));
    // Deep interior: farther from the border than the effective splat reach.
    for (int y = 28; y < 68; ++y)
        for (int x = 28; x < 68; ++x)
            CHECK(map.values.at(x, y) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("dense map: single hot grid cell puts the argmax at its center") {
    const int t = 16;
    NetworkModel m = mean_probe_model(t, 1, 400.0);
    PlaneStack features(64, 48, 1, 0.0f);
    // light up one aligned patch so exactly one grid cell sees a bright mean
    for (int y = 16; y < 32; ++y)
        for (int x = 32; x < 48; ++x) features.at(x, y, 0) = 1.0f;
    SaliencyMap map = predict_dense_map(m, features, t);
    int ax = 0, ay = 0;
    double best = -1;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 64; ++x)
            if (map.values.at(x, y) > best) {
                best = map.values.at(x, y);
                ax = x;
                ay = y;
            }
    CHECK(std::abs(ax - 40) <= t / 2);
    CHECK(std::abs(ay - 24) <= t / 2);
    CHECK(best == doctest::Approx(1.0));
}

TEST_CASE("dense map: max-normalization cancels uniform probability rescaling") {
    // With logits scaled so probabilities double (0.1 -> 0.2 region), the
    // normalized map stays identical when splat weights double uniformly.
    Image<double> a(32, 32, 1, 0.0), b(32, 32, 1, 0.0);
    Rng rng(4);
    std::vector<std::tuple<double, double, double>> splats;
    for (int i = 0; i < 6; ++i)
        splats.emplace_back(4 + 24 * rng.uniform(), 4 + 24 * rng.uniform(), rng.uniform());
    for (auto [cx, cy, f] : splats) {
        splat_gaussian(a, cx, cy, f, 8.0);
        splat_gaussian(b, cx, cy, 2.0 * f, 8.0);
    }
    auto normalize = [](Image<double>& m) {
        double mx = 0;
        for (size_t i = 0; i < m.size(); ++i) mx = std::max(mx, m.data()[i]);
        for (size_t i = 0; i < m.size(); ++i) m.data()[i] /= mx;
    };
    normalize(a);
    normalize(b);
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(a.data()[i] == doctest::Approx(b.data()[i]).epsilon(1e-12));
}

TEST_CASE("dense map: monotonicity - raising one probability never lowers a pixel") {
    Image<double> low(24, 24, 1, 0.0), high(24, 24, 1, 0.0);
    splat_gaussian(low, 6, 6, 0.4, 4.0);
    splat_gaussian(low, 18, 18, 0.3, 4.0);
    splat_gaussian(high, 6, 6, 0.4, 4.0);
    splat_gaussian(high, 18, 18, 0.9, 4.0); // only this one raised
    for (size_t i = 0; i < low.size(); ++i) CHECK(high.data()[i] >= low.data()[i]);
}

TEST_CASE("dense map: frame smaller than the patch rejected") {
    NetworkModel m = mean_probe_model(16, 1, 1.0);
    PlaneStack tiny(8, 8, 1);
    CHECK_THROWS_AS(predict_dense_map(m, tiny, 16), InputError);
    PlaneStack wrong_channels(32, 32, 2);
    CHECK_THROWS_AS(predict_dense_map(m, wrong_channels, 16), InputError);
}

TEST_CASE("dense map: argmax tracks the strongest isolated classifier cell") {
    // Well-separated bright cells with a clear winner over a flat background;
    // the map argmax must stay within t/2 Chebyshev of the winner's center.
    // (Splats add, so crowded moderate cells can legitimately out-sum a lone
    // bright one; the contract holds for a dominant isolated maximum.)
    const int t = 16;
    NetworkModel m = mean_probe_model(t, 1, 8.0);
    Rng rng(9);
    const int sites[3][2] = {{8, 8}, {72, 24}, {24, 72}}; // pairwise >= 48 px apart
    for (int trial = 0; trial < 6; ++trial) {
        PlaneStack features(96, 96, 1, 0.0f);
        int winner = static_cast<int>(rng.index(3));
        int best_cx = 0, best_cy = 0;
        for (int s = 0; s < 3; ++s) {
            float level = s == winner ? 1.0f : 0.45f + 0.1f * static_cast<float>(rng.uniform());
            int left = sites[s][0], top = sites[s][1];
            for (int y = top; y < top + t; ++y)
                for (int x = left; x < left + t; ++x) features.at(x, y, 0) = level;
            if (s == winner) {
                best_cx = left + t / 2;
                best_cy = top + t / 2;
            }
        }
        SaliencyMap map = predict_dense_map(m, features, t);
        int ax = 0, ay = 0;
        double best = -1;
        for (int y = 0; y < 96; ++y)
            for (int x = 0; x < 96; ++x)
                if (map.values.at(x, y) > best) {
                    best = map.values.at(x, y);
                    ax = x;
                    ay = y;
                }
        CHECK(std::abs(ax - best_cx) <= t / 2);
        CHECK(std::abs(ay - best_cy) <= t / 2);
    }
}
