#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "salnet/error.hpp"
#include "salnet/motion_features.hpp"
#include "salnet/rng.hpp"
#include "test_util.hpp"

using namespace salnet;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

FlowField constant_flow(int w, int h, double u, double v) {
    FlowField f{Image<double>(w, h, 1, u), Image<double>(w, h, 1, v)};
    return f;
}

FlowField flow_from_affine(const AffineMotion& a, int w, int h) {
    FlowField f{Image<double>(w, h, 1), Image<double>(w, h, 1)};
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto [u, v] = a.apply(x, y);
            f.u.at(x, y) = u;
            f.v.at(x, y) = v;
        }
    return f;
}

} // namespace

TEST_CASE("optical flow: static frame pair gives near-zero flow") {
    PlaneStack frame = test::make_periodic_texture(64, 64, 3);
    FlowField flow = estimate_optical_flow(frame, frame);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            CHECK(std::fabs(flow.u.at(x, y)) <= 0.1);
            CHECK(std::fabs(flow.v.at(x, y)) <= 0.1);
        }
}

TEST_CASE("optical flow: 2px horizontal shift recovered in the median") {
    PlaneStack prev = test::make_periodic_texture(64, 64, 11);
    PlaneStack cur = test::shift_wrap(prev, 2, 0);
    FlowField flow = estimate_optical_flow(prev, cur);
    std::vector<double> us, vs;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            us.push_back(flow.u.at(x, y));
            vs.push_back(flow.v.at(x, y));
        }
    CHECK(median(us) >= 1.5);
    CHECK(median(us) <= 2.5);
    CHECK(median(vs) >= -0.5);
    CHECK(median(vs) <= 0.5);
}

TEST_CASE("optical flow: 1px vertical shift") {
    PlaneStack prev = test::make_periodic_texture(64, 64, 23);
    PlaneStack cur = test::shift_wrap(prev, 0, 1);
    FlowField flow = estimate_optical_flow(prev, cur);
    std::vector<double> vs;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) vs.push_back(flow.v.at(x, y));
    CHECK(median(vs) >= 0.5);
    CHECK(median(vs) <= 1.5);
}

TEST_CASE("optical flow: dimension mismatch rejected") {
    PlaneStack a = test::gray_frame(16, 16, 0.5f);
    PlaneStack b = test::gray_frame(16, 17, 0.5f);
    CHECK_THROWS_AS(estimate_optical_flow(a, b), InputError);
}

TEST_CASE("affine fit: constant field recovered exactly") {
    FlowField flow = constant_flow(32, 24, 2.0, 0.0);
    AffineMotion a = estimate_global_affine(flow);
    CHECK(a.u0 == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(a.v0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(a.ux == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(a.uy == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(a.vx == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(a.vy == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("affine fit: pure rotation field gives uy = -vx, ux = vy = 0") {
    // u = -omega*(y - cy), v = omega*(x - cx)
    const double omega = 0.05;
    AffineMotion rot{0.05 * 16, 0.0, -omega, -0.05 * 16, omega, 0.0};
    FlowField flow = flow_from_affine(rot, 32, 32);
    AffineMotion a = estimate_global_affine(flow);
    CHECK(a.uy == doctest::Approx(-a.vx).epsilon(1e-4).scale(1.0));
    CHECK(a.uy == doctest::Approx(-omega).epsilon(1e-4).scale(1.0));
    CHECK(a.ux == doctest::Approx(0.0).scale(1.0).epsilon(1e-4));
    CHECK(a.vy == doctest::Approx(0.0).scale(1.0).epsilon(1e-4));
}

TEST_CASE("affine fit: 10% corrupted pixels barely move the estimate") {
    Rng rng(5);
    FlowField flow = constant_flow(40, 40, 2.0, -1.0);
    size_t n = flow.u.size();
    for (size_t k = 0; k < n / 10; ++k) {
        size_t i = rng.index(n);
        flow.u.data()[i] = 20.0 * (rng.uniform() - 0.5);
        flow.v.data()[i] = 20.0 * (rng.uniform() - 0.5);
    }
    AffineMotion a = estimate_global_affine(flow);
    CHECK(a.u0 == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(a.v0 == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(std::fabs(a.ux) < 1e-3);
    CHECK(std::fabs(a.uy) < 1e-3);
    CHECK(std::fabs(a.vx) < 1e-3);
    CHECK(std::fabs(a.vy) < 1e-3);
}

TEST_CASE("residual motion: flow generated exactly from the model is all zero") {
    AffineMotion model{0.5, 0.01, -0.02, -0.25, 0.015, 0.005};
    FlowField flow = flow_from_affine(model, 24, 24);
    ResidualMotionMap r = residual_motion(flow, model);
    for (size_t i = 0; i < r.magnitude.size(); ++i)
        CHECK(r.magnitude.data()[i] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("residual motion: cancellation property over random affine fields") {
    Rng rng(71);
    for (int trial = 0; trial < 50; ++trial) {
        AffineMotion model{4.0 * (rng.uniform() - 0.5), 0.1 * (rng.uniform() - 0.5),
                           0.1 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5),
                           0.1 * (rng.uniform() - 0.5), 0.1 * (rng.uniform() - 0.5)};
        FlowField flow = flow_from_affine(model, 20, 16);
        AffineMotion fitted = estimate_global_affine(flow);
        // raw (pre-normalization) residual magnitude must vanish
        CHECK(residual_motion(flow, fitted).peak < 1e-6);
    }
}

TEST_CASE("residual motion: per-pixel magnitude matches a direct loop") {
    Rng rng(13);
    FlowField flow{Image<double>(12, 9, 1), Image<double>(12, 9, 1)};
    for (size_t i = 0; i < flow.u.size(); ++i) {
        flow.u.data()[i] = rng.normal();
        flow.v.data()[i] = rng.normal();
    }
    AffineMotion model{0.3, 0.02, -0.01, -0.2, 0.0, 0.03};
    ResidualMotionMap r = residual_motion(flow, model);

    // oracle: |M_theta - M_c| per pixel, then divide by the max
    Image<double> expect(12, 9, 1);
    double mx = 0;
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 12; ++x) {
            double mu = model.u0 + model.ux * x + model.uy * y;
            double mv = model.v0 + model.vx * x + model.vy * y;
            double du = mu - flow.u.at(x, y), dv = mv - flow.v.at(x, y);
            expect.at(x, y) = std::sqrt(du * du + dv * dv);
            mx = std::max(mx, expect.at(x, y));
        }
    for (int y = 0; y < 9; ++y)
        for (int x = 0; x < 12; ++x)
            CHECK(r.magnitude.at(x, y) ==
                  doctest::Approx(expect.at(x, y) / mx).epsilon(1e-12));
}

TEST_CASE("residual motion: zero max normalizes to a zero map without error") {
    FlowField flow = constant_flow(8, 8, 1.0, 1.0);
    AffineMotion model{1.0, 0, 0, 1.0, 0, 0};
    ResidualMotionMap r = residual_motion(flow, model);
    for (size_t i = 0; i < r.magnitude.size(); ++i) CHECK(r.magnitude.data()[i] == 0.0);
}

TEST_CASE("residual motion: normalization max is 0 or 1") {
    Rng rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        FlowField flow{Image<double>(16, 16, 1), Image<double>(16, 16, 1)};
        for (size_t i = 0; i < flow.u.size(); ++i) {
            flow.u.data()[i] = rng.normal();
            flow.v.data()[i] = rng.normal();
        }
        AffineMotion fitted = estimate_global_affine(flow);
        ResidualMotionMap r = residual_motion(flow, fitted);
        double mx = 0;
        for (size_t i = 0; i < r.magnitude.size(); ++i)
            mx = std::max(mx, r.magnitude.data()[i]);
        bool ok = mx == 0.0 || std::fabs(mx - 1.0) < 1e-12;
        CHECK(ok);
    }
}

TEST_CASE("moving block over static textured background") {
    // An 8x8 block with distinct texture shifts 3px right between frames and
    // lands on a matcher-grid-aligned cell; background is static. Flow is
    // anchored on the current frame, so "inside" is the arrival footprint.
    const int w = 64, h = 64;
    PlaneStack prev = test::make_periodic_texture(w, h, 41);
    PlaneStack cur = prev;
    const int bx = 24, by = 24, bs = 8, shift = 3; // arrival position (bx, by)
    auto block_pixel = [](int x, int y) {
        return 0.15f + 0.8f * static_cast<float>(((x + y) % 2 + ((x * 3 + y) % 3)) / 4.0);
    };
    for (int y = 0; y < bs; ++y)
        for (int x = 0; x < bs; ++x)
            for (int c = 0; c < 3; ++c) {
                prev.at(bx - shift + x, by + y, c) = block_pixel(x, y);
                cur.at(bx + x, by + y, c) = block_pixel(x, y);
            }

    Image<double> res = residual_motion_channel(prev, cur);
    double inside = 0;
    int n_in = 0;
    for (int y = by; y < by + bs; ++y)
        for (int x = bx; x < bx + bs; ++x) {
            inside += res.at(x, y);
            ++n_in;
        }
    inside /= n_in;
    double outside = 0;
    int n_out = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x >= bx - bs - shift && x < bx + 2 * bs && y >= by - bs && y < by + 2 * bs)
                continue; // margin around the moving region
            outside += res.at(x, y);
            ++n_out;
        }
    outside /= n_out;
    CHECK(inside >= 0.9);
    CHECK(outside <= 0.1);
}
