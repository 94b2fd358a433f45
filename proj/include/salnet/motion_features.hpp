#ifndef SALNET_MOTION_FEATURES_HPP
#define SALNET_MOTION_FEATURES_HPP

#include <utility>

#include "salnet/image.hpp"

namespace salnet {

// Dense optical flow in pixels/frame: content arriving at (x,y) in the
// current frame came from (x-u, y-v) in the previous one.
struct FlowField {
    Image<double> u;
    Image<double> v;
    int width() const { return u.width(); }
    int height() const { return u.height(); }
};

// First-order complete affine motion model:
//   u(x,y) = u0 + ux*x + uy*y,  v(x,y) = v0 + vx*x + vy*y.
struct AffineMotion {
    double u0 = 0, ux = 0, uy = 0;
    double v0 = 0, vx = 0, vy = 0;
    std::pair<double, double> apply(double x, double y) const {
        return {u0 + ux * x + uy * y, v0 + vx * x + vy * y};
    }
};

// |global model - observed flow| per pixel, normalized to [0,1] by the frame
// maximum (all zero when the residual vanishes everywhere). `peak` keeps the
// raw pre-normalization maximum in pixels/frame.
struct ResidualMotionMap {
    Image<double> magnitude;
    double peak = 0.0;
};

struct FlowParams {
    int block = 8;
    int search = 4; // search radius per pyramid level, pixels
    int levels = 3;
    // Per-pixel cost added per pixel of displacement; biases near-ties toward
    // the smaller motion so uncovered regions do not pick far pseudo-matches.
    double penalty = 0.02;
};

// Pyramidal block matching over the luminance plane with parabolic sub-pixel
// refinement; block vectors are assigned to the pixels of their block.
FlowField estimate_optical_flow(const PlaneStack& prev, const PlaneStack& cur,
                                const FlowParams& params = {});

// Iteratively reweighted least squares with Tukey biweight, c = 4.685 * MAD
// of the residual magnitudes, at most 10 iterations, stop at parameter delta
// below 1e-8. Throws on a degenerate support.
AffineMotion estimate_global_affine(const FlowField& flow);

ResidualMotionMap residual_motion(const FlowField& flow, const AffineMotion& affine);

// Flow -> affine fit -> normalized residual magnitude, in one step.
Image<double> residual_motion_channel(const PlaneStack& prev, const PlaneStack& cur,
                                      const FlowParams& params = {});

} // namespace salnet

#endif
