#include "salnet/motion_features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "salnet/error.hpp"

namespace salnet {

namespace {

Image<double> luminance(const PlaneStack& frame) {
    Image<double> out(frame.width(), frame.height(), 1);
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x) {
            double sum = 0;
            for (int c = 0; c < frame.channels(); ++c) sum += frame.at(x, y, c);
            out.at(x, y) = sum / frame.channels();
        }
    return out;
}

Image<double> downsample2(const Image<double>& img) {
    int w = img.width() / 2, h = img.height() / 2;
    Image<double> out(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = 0.25 * (img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y) +
                                   img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1));
    return out;
}

// SAD between the block at (bx,by,bw,bh) in cur and the same-size block at
// (bx-dx, by-dy) in prev; infinity when the displaced block leaves the frame.
double block_sad(const Image<double>& prev, const Image<double>& cur, int bx, int by, int bw,
                 int bh, int dx, int dy) {
    int px = bx - dx, py = by - dy;
    if (px < 0 || py < 0 || px + bw > prev.width() || py + bh > prev.height())
        return std::numeric_limits<double>::infinity();
    double sad = 0;
    for (int y = 0; y < bh; ++y)
        for (int x = 0; x < bw; ++x)
            sad += std::fabs(cur.at(bx + x, by + y) - prev.at(px + x, py + y));
    return sad;
}

// One-dimensional parabolic interpolation of the SAD minimum; offset in
// [-0.5, 0.5].
double parabolic_offset(double em, double e0, double ep) {
    double den = em - 2.0 * e0 + ep;
    if (den <= 1e-12) return 0.0;
    return std::clamp(0.5 * (em - ep) / den, -0.5, 0.5);
}

struct BlockGrid {
    int nx = 0, ny = 0;
    std::vector<double> u, v;
    double& uat(int bx, int by) { return u[by * nx + bx]; }
    double& vat(int bx, int by) { return v[by * nx + bx]; }
    double uat(int bx, int by) const { return u[by * nx + bx]; }
    double vat(int bx, int by) const { return v[by * nx + bx]; }
};

BlockGrid match_level(const Image<double>& prev, const Image<double>& cur,
                      const BlockGrid* init, int block, int search, double penalty) {
    const int w = cur.width(), h = cur.height();
    BlockGrid grid;
    grid.nx = (w + block - 1) / block;
    grid.ny = (h + block - 1) / block;
    grid.u.assign(grid.nx * grid.ny, 0.0);
    grid.v.assign(grid.nx * grid.ny, 0.0);

    for (int by = 0; by < grid.ny; ++by) {
        for (int bx = 0; bx < grid.nx; ++bx) {
            int x0 = bx * block, y0 = by * block;
            int bw = std::min(block, w - x0), bh = std::min(block, h - y0);
            int ix = 0, iy = 0;
            if (init) {
                int cbx = std::min(bx / 2, init->nx - 1);
                int cby = std::min(by / 2, init->ny - 1);
                ix = static_cast<int>(std::lround(2.0 * init->uat(cbx, cby)));
                iy = static_cast<int>(std::lround(2.0 * init->vat(cbx, cby)));
            }
            const double area = static_cast<double>(bw) * bh;
            auto cost_of = [&](double sad, int dx, int dy) {
                return sad + penalty * area * (std::abs(dx) + std::abs(dy));
            };
            int best_dx = 0, best_dy = 0;
            double best_sad = block_sad(prev, cur, x0, y0, bw, bh, 0, 0);
            double best = cost_of(best_sad, 0, 0);
            // Search around the propagated init and around the zero vector;
            // the zero window keeps a bad coarse init from stranding the
            // cell away from the static solution.
            auto scan = [&](int cx, int cy) {
                for (int dy = cy - search; dy <= cy + search; ++dy)
                    for (int dx = cx - search; dx <= cx + search; ++dx) {
                        double sad = block_sad(prev, cur, x0, y0, bw, bh, dx, dy);
                        double cost = cost_of(sad, dx, dy);
                        if (cost < best) {
                            best = cost;
                            best_sad = sad;
                            best_dx = dx;
                            best_dy = dy;
                        }
                    }
            };
            scan(ix, iy);
            if (std::abs(ix) > search || std::abs(iy) > search) scan(0, 0);
            // Refinement interpolates the raw SAD surface at the winner.
            double sub_x = 0, sub_y = 0;
            if (std::isfinite(best_sad)) {
                double exm = block_sad(prev, cur, x0, y0, bw, bh, best_dx - 1, best_dy);
                double exp_ = block_sad(prev, cur, x0, y0, bw, bh, best_dx + 1, best_dy);
                if (std::isfinite(exm) && std::isfinite(exp_))
                    sub_x = parabolic_offset(exm, best_sad, exp_);
                double eym = block_sad(prev, cur, x0, y0, bw, bh, best_dx, best_dy - 1);
                double eyp = block_sad(prev, cur, x0, y0, bw, bh, best_dx, best_dy + 1);
                if (std::isfinite(eym) && std::isfinite(eyp))
                    sub_y = parabolic_offset(eym, best_sad, eyp);
            }
            grid.uat(bx, by) = best_dx + sub_x;
            grid.vat(bx, by) = best_dy + sub_y;
        }
    }
    return grid;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

// 3x3 linear solve, Gaussian elimination with partial pivoting.
bool solve3(double a[3][3], double b[3], double out[3]) {
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(a[idx[r]][col]) > std::fabs(a[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        double d = a[idx[col]][col];
        if (std::fabs(d) < 1e-12) return false;
        for (int r = col + 1; r < 3; ++r) {
            double f = a[idx[r]][col] / d;
            for (int c = col; c < 3; ++c) a[idx[r]][c] -= f * a[idx[col]][c];
            b[idx[r]] -= f * b[idx[col]];
        }
    }
    for (int row = 2; row >= 0; --row) {
        double s = b[idx[row]];
        for (int c = row + 1; c < 3; ++c) s -= a[idx[row]][c] * out[c];
        out[row] = s / a[idx[row]][row];
    }
    return true;
}

} // namespace

FlowField estimate_optical_flow(const PlaneStack& prev, const PlaneStack& cur,
                                const FlowParams& params) {
    if (prev.width() != cur.width() || prev.height() != cur.height())
        throw InputError("estimate_optical_flow: dimension mismatch");

    std::vector<Image<double>> pyr_prev{luminance(prev)};
    std::vector<Image<double>> pyr_cur{luminance(cur)};
    for (int l = 1; l < params.levels; ++l) {
        const auto& p = pyr_prev.back();
        if (std::min(p.width(), p.height()) / 2 < params.block) break;
        pyr_prev.push_back(downsample2(pyr_prev.back()));
        pyr_cur.push_back(downsample2(pyr_cur.back()));
    }

    BlockGrid grid;
    for (int l = static_cast<int>(pyr_prev.size()) - 1; l >= 0; --l) {
        const BlockGrid* init = (l == static_cast<int>(pyr_prev.size()) - 1) ? nullptr : &grid;
        grid = match_level(pyr_prev[l], pyr_cur[l], init, params.block, params.search,
                           params.penalty);
    }

    const int w = cur.width(), h = cur.height();
    FlowField flow{Image<double>(w, h, 1), Image<double>(w, h, 1)};
    for (int y = 0; y < h; ++y) {
        int by = std::min(y / params.block, grid.ny - 1);
        for (int x = 0; x < w; ++x) {
            int bx = std::min(x / params.block, grid.nx - 1);
            flow.u.at(x, y) = grid.uat(bx, by);
            flow.v.at(x, y) = grid.vat(bx, by);
        }
    }
    return flow;
}

AffineMotion estimate_global_affine(const FlowField& flow) {
    const int w = flow.width(), h = flow.height();
    const size_t n = static_cast<size_t>(w) * h;
    if (n < 3) throw InputError("estimate_global_affine: too few pixels");

    std::vector<double> weight(n, 1.0);
    AffineMotion fit;
    double prev_params[6] = {0, 0, 0, 0, 0, 0};

    for (int iter = 0; iter < 10; ++iter) {
        double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        double bu[3] = {0, 0, 0}, bv[3] = {0, 0, 0};
        double wsum = 0;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double wt = weight[static_cast<size_t>(y) * w + x];
                if (wt <= 0) continue;
                wsum += wt;
                double phi[3] = {1.0, static_cast<double>(x), static_cast<double>(y)};
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) a[r][c] += wt * phi[r] * phi[c];
                    bu[r] += wt * phi[r] * flow.u.at(x, y);
                    bv[r] += wt * phi[r] * flow.v.at(x, y);
                }
            }
        }
        if (wsum < 3.0) break; // support collapsed; keep the previous fit
        double cu[3], cv[3];
        double a2[3][3];
        std::copy(&a[0][0], &a[0][0] + 9, &a2[0][0]);
        if (!solve3(a, bu, cu) || !solve3(a2, bv, cv)) {
            if (iter == 0) throw InputError("estimate_global_affine: degenerate system");
            break;
        }
        fit = AffineMotion{cu[0], cu[1], cu[2], cv[0], cv[1], cv[2]};

        double params[6] = {fit.u0, fit.ux, fit.uy, fit.v0, fit.vx, fit.vy};
        double delta = 0;
        for (int i = 0; i < 6; ++i) delta = std::max(delta, std::fabs(params[i] - prev_params[i]));
        std::copy(params, params + 6, prev_params);
        if (iter > 0 && delta < 1e-8) break;

        std::vector<double> resid(n);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                auto [mu, mv] = fit.apply(x, y);
                resid[static_cast<size_t>(y) * w + x] =
                    std::hypot(mu - flow.u.at(x, y), mv - flow.v.at(x, y));
            }
        // Tukey biweight with scale from the median absolute residual. A
        // vanishing scale means the bulk of the field already fits exactly.
        double c = 4.685 * median_of(resid);
        if (c < 1e-12) break;
        for (size_t i = 0; i < n; ++i) {
            double r = resid[i] / c;
            weight[i] = r < 1.0 ? (1.0 - r * r) * (1.0 - r * r) : 0.0;
        }
    }
    return fit;
}

ResidualMotionMap residual_motion(const FlowField& flow, const AffineMotion& affine) {
    const int w = flow.width(), h = flow.height();
    ResidualMotionMap out{Image<double>(w, h, 1)};
    double max_mag = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            auto [mu, mv] = affine.apply(x, y);
            double mag = std::hypot(mu - flow.u.at(x, y), mv - flow.v.at(x, y));
            out.magnitude.at(x, y) = mag;
            max_mag = std::max(max_mag, mag);
        }
    out.peak = max_mag;
    if (max_mag > 0)
        for (size_t i = 0; i < out.magnitude.size(); ++i) out.magnitude.data()[i] /= max_mag;
    return out;
}

Image<double> residual_motion_channel(const PlaneStack& prev, const PlaneStack& cur,
                                      const FlowParams& params) {
    FlowField flow = estimate_optical_flow(prev, cur, params);
    AffineMotion affine = estimate_global_affine(flow);
    return residual_motion(flow, affine).magnitude;
}

} // namespace salnet
