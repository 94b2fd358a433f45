#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "salnet/contrast_features.hpp"
#include "salnet/rng.hpp"
#include "test_util.hpp"

using namespace salnet;

namespace {

// Brute-force oracle: each descriptor computed by its printed equation in a
// separate pass, no shared sub-expressions with the implementation.
struct OracleOut {
    std::vector<Image<double>> v; // v[0..6]
};

double o_fsat(const HsiImage& im, int xi, int yi, int xj, int yj) {
    const double kmin = 0.21;
    return (im.sat.at(xi, yi) + im.sat.at(xj, yj)) / 2.0 *
           (kmin + (1.0 - kmin) * im.sat.at(xi, yi));
}
double o_fint(const HsiImage& im, int xi, int yi, int xj, int yj) {
    const double kmin = 0.21;
    return (im.intensity.at(xi, yi) + im.intensity.at(xj, yj)) / 2.0 *
           (kmin + (1.0 - kmin) * im.intensity.at(xi, yi));
}
double o_dhue(const HsiImage& im, int xi, int yi, int xj, int yj) {
    double dmu = std::fabs(im.hue.at(xi, yi) - im.hue.at(xj, yj));
    return dmu <= 0.5 ? dmu : 1.0 - dmu;
}

OracleOut contrast_oracle(const HsiImage& im) {
    const int w = im.width(), h = im.height();
    OracleOut out;
    for (int k = 0; k < 7; ++k) out.v.emplace_back(w, h, 1, 0.0);
    const int off[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                           {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int n = 0;
            double x1 = 0, x2 = 0, x3 = 0, x4 = 0, x5 = 0;
            for (const auto& d : off) {
                int nx = x + d[0], ny = y + d[1];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                ++n;
                x1 += o_fsat(im, x, y, nx, ny) * o_fint(im, x, y, nx, ny);
                x2 += o_fsat(im, x, y, nx, ny) * o_fint(im, x, y, nx, ny) *
                      o_dhue(im, x, y, nx, ny);
                if (im.hue.at(x, y) < 0.5 && im.hue.at(nx, ny) >= 0.5)
                    x3 += o_fsat(im, x, y, nx, ny) * o_fint(im, x, y, nx, ny) *
                          o_dhue(im, x, y, nx, ny);
                x4 += o_fsat(im, x, y, nx, ny) * o_fint(im, x, y, nx, ny) *
                      std::fabs(im.sat.at(x, y) - im.sat.at(nx, ny));
                x5 += o_fsat(im, x, y, nx, ny) * o_fint(im, x, y, nx, ny) *
                      std::fabs(im.intensity.at(x, y) - im.intensity.at(nx, ny));
            }
            out.v[0].at(x, y) = x1 / n;
            out.v[1].at(x, y) = x2 / n;
            out.v[2].at(x, y) = x3 / n;
            out.v[3].at(x, y) = x4 / n;
            out.v[4].at(x, y) = x5 / n;
            out.v[5].at(x, y) = (im.hue.at(x, y) >= 0.0 && im.hue.at(x, y) < 0.125)
                                    ? im.sat.at(x, y) * im.intensity.at(x, y)
                                    : 0.0;
            out.v[6].at(x, y) = im.sat.at(x, y) * im.intensity.at(x, y);
        }
    }
    return out;
}

PlaneStack random_rgb(int w, int h, uint64_t seed) {
    Rng rng(seed);
    PlaneStack f(w, h, 3);
    for (size_t i = 0; i < f.size(); ++i) f.data()[i] = static_cast<float>(rng.uniform());
    return f;
}

} // namespace

TEST_CASE("hsi conversion: pure red") {
    PlaneStack f(1, 1, 3);
    f.at(0, 0, 0) = 1.0f;
    HsiImage hsi = rgb_to_hsi(f);
    CHECK(hsi.hue.at(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(hsi.sat.at(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hsi.intensity.at(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("hsi conversion: achromatic gray") {
    for (float g : {0.0f, 0.25f, 0.5f, 1.0f}) {
        PlaneStack f(1, 1, 3);
        f.at(0, 0, 0) = f.at(0, 0, 1) = f.at(0, 0, 2) = g;
        HsiImage hsi = rgb_to_hsi(f);
        CHECK(hsi.sat.at(0, 0) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(hsi.intensity.at(0, 0) == doctest::Approx(g).epsilon(1e-7));
        CHECK(hsi.hue.at(0, 0) == 0.0);
    }
}

TEST_CASE("hsi conversion: pure green hue is one third of the wheel") {
    PlaneStack f(1, 1, 3);
    f.at(0, 0, 1) = 1.0f;
    HsiImage hsi = rgb_to_hsi(f);
    CHECK(hsi.hue.at(0, 0) == doctest::Approx(1.0 / 3).epsilon(1e-9));
    // and blue lands at two thirds
    PlaneStack b(1, 1, 3);
    b.at(0, 0, 2) = 1.0f;
    CHECK(rgb_to_hsi(b).hue.at(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-9));
}

TEST_CASE("interaction factors: zero, saturated, mixed") {
    // f_sat = ((S_i+S_j)/2) * (0.21 + 0.79*S_i)
    PlaneStack f(2, 1, 3);
    HsiImage hsi = rgb_to_hsi(f); // all black: S=0, I=0
    auto [fs0, fi0] = interaction_factors(hsi, 0, 0, 1, 0);
    CHECK(fs0 == doctest::Approx(0.0));
    CHECK(fi0 == doctest::Approx(0.0));

    HsiImage m{Image<double>(2, 1, 1, 0.0), Image<double>(2, 1, 1, 1.0),
               Image<double>(2, 1, 1, 1.0)};
    auto [fs1, fi1] = interaction_factors(m, 0, 0, 1, 0);
    CHECK(fs1 == doctest::Approx(1.0).epsilon(1e-12)); // 1 * (0.21 + 0.79)
    CHECK(fi1 == doctest::Approx(1.0).epsilon(1e-12));

    m.sat.at(1, 0) = 0.0;
    auto [fs2, fi2] = interaction_factors(m, 0, 0, 1, 0);
    CHECK(fs2 == doctest::Approx(0.5).epsilon(1e-12)); // 0.5 * 1.0
}

TEST_CASE("hue difference: identity, wraparound, and the 180-degree maximum") {
    CHECK(hue_difference(0.37, 0.37) == doctest::Approx(0.0));
    CHECK(hue_difference(0.9, 0.2) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(hue_difference(0.2, 0.9) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(hue_difference(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(hue_difference(0.25, 0.75) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("descriptors: uniform gray frame is all zero on V1..V7") {
    ContrastStack cs = contrast_descriptors(rgb_to_hsi(test::gray_frame(8, 8, 0.5f)));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int c = 0; c < 7; ++c)
                if (c == 6 || c == 5)
                    CHECK(cs.v.at(x, y, c) == doctest::Approx(0.0)); // S = 0 kills S*I too
                else
                    CHECK(cs.v.at(x, y, c) == doctest::Approx(0.0));
}

TEST_CASE("descriptors: uniform saturated red frame") {
    PlaneStack f(6, 6, 3);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) f.at(x, y, 0) = 1.0f;
    ContrastStack cs = contrast_descriptors(rgb_to_hsi(f));
    // S=1, I=1/3, Hue=0 everywhere: every neighbor term is
    // f_sat*f_int = 1 * ((1/3) * (0.21 + 0.79/3)), differences vanish.
    const double v1 = (1.0 / 3.0) * (0.21 + 0.79 / 3.0);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) {
            CHECK(cs.v.at(x, y, 0) == doctest::Approx(v1).epsilon(1e-9));
            for (int c = 1; c <= 4; ++c)
                CHECK(cs.v.at(x, y, c) == doctest::Approx(0.0).epsilon(1e-12));
            CHECK(cs.v.at(x, y, 5) == doctest::Approx(1.0 / 3).epsilon(1e-9));
            CHECK(cs.v.at(x, y, 6) == doctest::Approx(1.0 / 3).epsilon(1e-9));
        }
}

TEST_CASE("descriptors: 3x3 red-on-gray center matches the oracle") {
    PlaneStack f = test::gray_frame(3, 3, 0.5f);
    f.at(1, 1, 0) = 1.0f;
    f.at(1, 1, 1) = 0.0f;
    f.at(1, 1, 2) = 0.0f;
    HsiImage hsi = rgb_to_hsi(f);
    ContrastStack cs = contrast_descriptors(hsi);
    OracleOut oracle = contrast_oracle(hsi);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x)
            for (int c = 0; c < 7; ++c)
                CHECK(cs.v.at(x, y, c) ==
                      doctest::Approx(oracle.v[c].at(x, y)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("descriptors: oracle equivalence on random 16x16 images") {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        PlaneStack f = random_rgb(16, 16, 1000 + seed);
        HsiImage hsi = rgb_to_hsi(f);
        ContrastStack cs = contrast_descriptors(hsi);
        OracleOut oracle = contrast_oracle(hsi);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x)
                for (int c = 0; c < 7; ++c)
                    CHECK(cs.v.at(x, y, c) ==
                          doctest::Approx(oracle.v[c].at(x, y)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("descriptor properties: X3 <= X2, V6 gating, translation invariance") {
    PlaneStack f = random_rgb(20, 20, 77);
    HsiImage hsi = rgb_to_hsi(f);
    ContrastStack cs = contrast_descriptors(hsi);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x) {
            CHECK(cs.v.at(x, y, 2) <= cs.v.at(x, y, 1) + 1e-12);
            // V6 is either zero or exactly V7
            bool gate_ok = cs.v.at(x, y, 5) == 0.0 || cs.v.at(x, y, 5) == cs.v.at(x, y, 6);
            CHECK(gate_ok);
            for (int c = 0; c < 7; ++c) {
                CHECK(cs.v.at(x, y, c) >= 0.0);
                CHECK(cs.v.at(x, y, c) <= 1.0);
            }
        }

    // Interior pixels of a translated copy carry translated descriptors.
    PlaneStack shifted = test::shift_wrap(f, 3, 2);
    ContrastStack cs2 = contrast_descriptors(rgb_to_hsi(shifted));
    for (int y = 4; y < 16; ++y)
        for (int x = 4; x < 16; ++x)
            for (int c = 0; c < 7; ++c)
                CHECK(cs2.v.at(x + 3, y + 2, c) ==
                      doctest::Approx(cs.v.at(x, y, c)).epsilon(1e-9).scale(1.0));
}

TEST_CASE("hsv channels: hue/sat shared with hsi, value = max(R,G,B)") {
    PlaneStack f = random_rgb(5, 4, 21);
    HsiImage hsi = rgb_to_hsi(f);
    Image<double> hsv = rgb_to_hsv_channels(f);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) {
            CHECK(hsv.at(x, y, 0) == doctest::Approx(hsi.hue.at(x, y)));
            CHECK(hsv.at(x, y, 1) == doctest::Approx(hsi.sat.at(x, y)));
            float mx = std::max({f.at(x, y, 0), f.at(x, y, 1), f.at(x, y, 2)});
            CHECK(hsv.at(x, y, 2) == doctest::Approx(mx));
        }
}
