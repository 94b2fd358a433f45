#include "salnet/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "salnet/error.hpp"

namespace salnet::cnn {

namespace {

int pool_extent(int in, int k, int stride) {
    // Ceil-mode pooling with windows clamped at the border, so the tail of
    // the plane is never dropped and a window larger than the plane reduces
    // it to a single value.
    if (in <= k) return 1;
    return (in - k + stride - 1) / stride + 1;
}

Shape3 resolve_shape(const LayerSpec& s, Shape3 in) {
    switch (s.kind) {
    case LayerKind::conv:
        if (s.kh > in.h || s.kw > in.w) throw InputError("conv kernel larger than input");
        if (s.stride < 1 || s.out_channels < 1) throw InputError("bad conv spec");
        return {(in.h - s.kh) / s.stride + 1, (in.w - s.kw) / s.stride + 1, s.out_channels};
    case LayerKind::maxpool:
        if (s.stride < 1 || s.kh < 1) throw InputError("bad pool spec");
        if (s.stride > s.kh) throw InputError("pool stride larger than window");
        return {pool_extent(in.h, s.kh, s.stride), pool_extent(in.w, s.kw, s.stride), in.c};
    case LayerKind::relu:
        return in;
    case LayerKind::lrn:
        if (s.lrn_n < 1 || s.lrn_n % 2 == 0) throw InputError("lrn window must be odd");
        if (s.lrn_alpha < 0 || s.lrn_beta <= 0) throw InputError("bad lrn params");
        return in;
    case LayerKind::inner_product:
        if (s.out_channels < 1) throw InputError("bad inner product spec");
        return {1, 1, s.out_channels};
    case LayerKind::softmax:
        return in;
    }
    throw InputError("unknown layer kind");
}

size_t weight_count(const Layer& l) {
    switch (l.spec.kind) {
    case LayerKind::conv:
        return static_cast<size_t>(l.spec.out_channels) * l.spec.kh * l.spec.kw * l.in_shape.c;
    case LayerKind::inner_product:
        return static_cast<size_t>(l.spec.out_channels) * l.in_shape.count();
    default:
        return 0;
    }
}

size_t bias_count(const Layer& l) {
    return (l.spec.kind == LayerKind::conv || l.spec.kind == LayerKind::inner_product)
               ? static_cast<size_t>(l.spec.out_channels)
               : 0;
}

// im2col: one row per output position, columns ordered (ky, kx, in_c) to
// match the weight layout, so each output channel is a contiguous dot
// product.
void im2col(const Tensor& in, int kh, int kw, int stride, int oh, int ow,
            std::vector<double>& col) {
    const int ic = in.channels(), iw = in.width();
    const size_t k = static_cast<size_t>(kh) * kw * ic;
    col.resize(static_cast<size_t>(oh) * ow * k);
    const double* src = in.data();
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            double* row = &col[(static_cast<size_t>(oy) * ow + ox) * k];
            for (int ky = 0; ky < kh; ++ky) {
                const double* line = src + ((static_cast<size_t>(oy * stride + ky) * iw) +
                                            ox * stride) * ic;
                std::copy(line, line + static_cast<size_t>(kw) * ic,
                          row + static_cast<size_t>(ky) * kw * ic);
            }
        }
    }
}

Tensor conv_forward(const Layer& l, const Tensor& in, LayerCtx* ctx) {
    const int oh = l.out_shape.h, ow = l.out_shape.w, oc = l.out_shape.c;
    const size_t k = static_cast<size_t>(l.spec.kh) * l.spec.kw * l.in_shape.c;
    std::vector<double> local_col;
    std::vector<double>& col = ctx ? ctx->col : local_col;
    im2col(in, l.spec.kh, l.spec.kw, l.spec.stride, oh, ow, col);

    Tensor out(ow, oh, oc);
    double* dst = out.data();
    const size_t rows = static_cast<size_t>(oh) * ow;
    for (size_t r = 0; r < rows; ++r) {
        const double* row = &col[r * k];
        for (int c = 0; c < oc; ++c) {
            const double* wp = &l.weights[static_cast<size_t>(c) * k];
            double acc = l.bias[c];
            for (size_t i = 0; i < k; ++i) acc += row[i] * wp[i];
            dst[r * oc + c] = acc;
        }
    }
    return out;
}

Tensor conv_backward(const Layer& l, const LayerCtx& ctx, const Tensor& grad_out,
                     std::vector<double>* gw, std::vector<double>* gb) {
    const int oc = l.out_shape.c;
    const size_t k = static_cast<size_t>(l.spec.kh) * l.spec.kw * l.in_shape.c;
    const size_t rows = static_cast<size_t>(l.out_shape.h) * l.out_shape.w;
    const double* go = grad_out.data();

    if (gw && gb) {
        for (size_t r = 0; r < rows; ++r) {
            const double* row = &ctx.col[r * k];
            for (int c = 0; c < oc; ++c) {
                double g = go[r * oc + c];
                if (g == 0.0) continue;
                double* wgrad = &(*gw)[static_cast<size_t>(c) * k];
                for (size_t i = 0; i < k; ++i) wgrad[i] += g * row[i];
                (*gb)[c] += g;
            }
        }
    }

    // dcol = grad_out * W, then scatter back to input positions.
    Tensor grad_in(l.in_shape.w, l.in_shape.h, l.in_shape.c, 0.0);
    const int ic = l.in_shape.c, iw = l.in_shape.w;
    std::vector<double> drow(k);
    for (size_t r = 0; r < rows; ++r) {
        std::fill(drow.begin(), drow.end(), 0.0);
        for (int c = 0; c < oc; ++c) {
            double g = go[r * oc + c];
            if (g == 0.0) continue;
            const double* wp = &l.weights[static_cast<size_t>(c) * k];
            for (size_t i = 0; i < k; ++i) drow[i] += g * wp[i];
        }
        int oy = static_cast<int>(r) / l.out_shape.w;
        int ox = static_cast<int>(r) % l.out_shape.w;
        double* dst = grad_in.data();
        for (int ky = 0; ky < l.spec.kh; ++ky) {
            double* line = dst + ((static_cast<size_t>(oy * l.spec.stride + ky) * iw) +
                                  ox * l.spec.stride) * ic;
            const double* srow = &drow[static_cast<size_t>(ky) * l.spec.kw * ic];
            for (size_t i = 0; i < static_cast<size_t>(l.spec.kw) * ic; ++i) line[i] += srow[i];
        }
    }
    return grad_in;
}

Tensor pool_forward(const Layer& l, const Tensor& in, LayerCtx* ctx) {
    const int oh = l.out_shape.h, ow = l.out_shape.w, c = l.in_shape.c;
    Tensor out(ow, oh, c);
    if (ctx) ctx->argmax.assign(out.size(), 0);
    for (int oy = 0; oy < oh; ++oy) {
        int y0 = oy * l.spec.stride;
        int y1 = std::min(y0 + l.spec.kh, l.in_shape.h);
        for (int ox = 0; ox < ow; ++ox) {
            int x0 = ox * l.spec.stride;
            int x1 = std::min(x0 + l.spec.kw, l.in_shape.w);
            for (int ch = 0; ch < c; ++ch) {
                double best = in.at(x0, y0, ch);
                int best_idx = (y0 * l.in_shape.w + x0) * c + ch;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) {
                        double v = in.at(x, y, ch);
                        if (v > best) {
                            best = v;
                            best_idx = (y * l.in_shape.w + x) * c + ch;
                        }
                    }
                out.at(ox, oy, ch) = best;
                if (ctx) ctx->argmax[(static_cast<size_t>(oy) * ow + ox) * c + ch] = best_idx;
            }
        }
    }
    return out;
}

Tensor pool_backward(const Layer& l, const LayerCtx& ctx, const Tensor& grad_out) {
    Tensor grad_in(l.in_shape.w, l.in_shape.h, l.in_shape.c, 0.0);
    for (size_t i = 0; i < grad_out.size(); ++i)
        grad_in.data()[ctx.argmax[i]] += grad_out.data()[i];
    return grad_in;
}

Tensor relu_forward(const Tensor& in) {
    Tensor out = in;
    for (size_t i = 0; i < out.size(); ++i) out.data()[i] = std::max(0.0, out.data()[i]);
    return out;
}

Tensor relu_backward(const LayerCtx& ctx, const Tensor& grad_out) {
    Tensor grad_in = grad_out;
    for (size_t i = 0; i < grad_in.size(); ++i)
        if (ctx.input.data()[i] <= 0.0) grad_in.data()[i] = 0.0;
    return grad_in;
}

// Windowed sum of squares per channel via a summed-area table; the naive
// per-window loop lives in the tests as the oracle.
void lrn_window_sums(const Tensor& in, int n, int ch, std::vector<double>& sums,
                     std::vector<double>& sat) {
    const int w = in.width(), h = in.height(), c = in.channels();
    sat.assign(static_cast<size_t>(w + 1) * (h + 1), 0.0);
    auto s = [&](int x, int y) -> double& { return sat[static_cast<size_t>(y) * (w + 1) + x]; };
    for (int y = 1; y <= h; ++y)
        for (int x = 1; x <= w; ++x) {
            double v = in.at(x - 1, y - 1, ch);
            s(x, y) = v * v + s(x - 1, y) + s(x, y - 1) - s(x - 1, y - 1);
        }
    const int half = n / 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int x0 = std::max(0, x - half), x1 = std::min(w - 1, x - half + n - 1);
            int y0 = std::max(0, y - half), y1 = std::min(h - 1, y - half + n - 1);
            sums[(static_cast<size_t>(y) * w + x) * c + ch] =
                s(x1 + 1, y1 + 1) - s(x0, y1 + 1) - s(x1 + 1, y0) + s(x0, y0);
        }
}

Tensor lrn_forward(const Layer& l, const Tensor& in, LayerCtx* ctx) {
    const int n = l.spec.lrn_n;
    const double scale = l.spec.lrn_alpha / (static_cast<double>(n) * n);
    Tensor out(in.width(), in.height(), in.channels());
    std::vector<double> sums(in.size()), sat;
    for (int ch = 0; ch < in.channels(); ++ch) lrn_window_sums(in, n, ch, sums, sat);
    std::vector<double> denom(in.size());
    for (size_t i = 0; i < in.size(); ++i) {
        denom[i] = 1.0 + scale * sums[i];
        out.data()[i] = in.data()[i] * std::pow(denom[i], -l.spec.lrn_beta);
    }
    if (ctx) ctx->denom = std::move(denom);
    return out;
}

Tensor lrn_backward(const Layer& l, const LayerCtx& ctx, const Tensor& grad_out) {
    const Tensor& in = ctx.input;
    const int n = l.spec.lrn_n, half = n / 2;
    const int w = in.width(), h = in.height(), c = in.channels();
    const double beta = l.spec.lrn_beta;
    const double scale = l.spec.lrn_alpha / (static_cast<double>(n) * n);

    // t = g * u * D^(-beta-1); the cross term at (x,y) is the window sum of t
    // around (x,y), which is symmetric for odd n.
    std::vector<double> t(in.size());
    for (size_t i = 0; i < in.size(); ++i)
        t[i] = grad_out.data()[i] * in.data()[i] * std::pow(ctx.denom[i], -beta - 1.0);

    Tensor grad_in(w, h, c);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                double cross = 0;
                int x0 = std::max(0, x - half), x1 = std::min(w - 1, x + half);
                int y0 = std::max(0, y - half), y1 = std::min(h - 1, y + half);
                for (int yy = y0; yy <= y1; ++yy)
                    for (int xx = x0; xx <= x1; ++xx)
                        cross += t[(static_cast<size_t>(yy) * w + xx) * c + ch];
                size_t i = (static_cast<size_t>(y) * w + x) * c + ch;
                grad_in.data()[i] = grad_out.data()[i] * std::pow(ctx.denom[i], -beta) -
                                    2.0 * scale * beta * in.data()[i] * cross;
            }
        }
    }
    return grad_in;
}

Tensor ip_forward(const Layer& l, const Tensor& in) {
    const size_t k = in.size();
    Tensor out(1, 1, l.out_shape.c);
    for (int o = 0; o < l.out_shape.c; ++o) {
        const double* wp = &l.weights[static_cast<size_t>(o) * k];
        double acc = l.bias[o];
        for (size_t i = 0; i < k; ++i) acc += wp[i] * in.data()[i];
        out.data()[o] = acc;
    }
    return out;
}

Tensor ip_backward(const Layer& l, const LayerCtx& ctx, const Tensor& grad_out,
                   std::vector<double>* gw, std::vector<double>* gb) {
    const size_t k = ctx.input.size();
    Tensor grad_in(l.in_shape.w, l.in_shape.h, l.in_shape.c, 0.0);
    for (int o = 0; o < l.out_shape.c; ++o) {
        double g = grad_out.data()[o];
        const double* wp = &l.weights[static_cast<size_t>(o) * k];
        if (gw && gb) {
            double* wgrad = &(*gw)[static_cast<size_t>(o) * k];
            for (size_t i = 0; i < k; ++i) wgrad[i] += g * ctx.input.data()[i];
            (*gb)[o] += g;
        }
        for (size_t i = 0; i < k; ++i) grad_in.data()[i] += g * wp[i];
    }
    return grad_in;
}

Tensor softmax_forward(const Tensor& in) {
    Tensor out = in;
    double m = out.data()[0];
    for (size_t i = 1; i < out.size(); ++i) m = std::max(m, out.data()[i]);
    double sum = 0;
    for (size_t i = 0; i < out.size(); ++i) {
        out.data()[i] = std::exp(out.data()[i] - m);
        sum += out.data()[i];
    }
    for (size_t i = 0; i < out.size(); ++i) out.data()[i] /= sum;
    return out;
}

Tensor softmax_backward(const LayerCtx& ctx, const Tensor& grad_out) {
    const Tensor& p = ctx.output;
    double dot = 0;
    for (size_t i = 0; i < p.size(); ++i) dot += grad_out.data()[i] * p.data()[i];
    Tensor grad_in = p;
    for (size_t i = 0; i < p.size(); ++i)
        grad_in.data()[i] = p.data()[i] * (grad_out.data()[i] - dot);
    return grad_in;
}

} // namespace

LayerSpec conv_spec(int k, int out_channels, int stride) {
    LayerSpec s{LayerKind::conv};
    s.kh = s.kw = k;
    s.out_channels = out_channels;
    s.stride = stride;
    return s;
}
LayerSpec pool_spec(int k, int stride) {
    LayerSpec s{LayerKind::maxpool};
    s.kh = s.kw = k;
    s.stride = stride;
    return s;
}
LayerSpec relu_spec() { return LayerSpec{LayerKind::relu}; }
LayerSpec lrn_spec(int n, double alpha, double beta) {
    LayerSpec s{LayerKind::lrn};
    s.lrn_n = n;
    s.lrn_alpha = alpha;
    s.lrn_beta = beta;
    return s;
}
LayerSpec inner_product_spec(int out) {
    LayerSpec s{LayerKind::inner_product};
    s.out_channels = out;
    return s;
}
LayerSpec softmax_spec() { return LayerSpec{LayerKind::softmax}; }

NetworkModel build_network(Shape3 input, const std::vector<LayerSpec>& specs, uint64_t seed,
                           double init_std) {
    if (input.count() <= 0) throw InputError("build_network: empty input shape");
    if (specs.empty()) throw InputError("build_network: no layers");
    NetworkModel model;
    model.input_shape = input;
    Rng rng(seed);
    Shape3 shape = input;
    for (const auto& spec : specs) {
        Layer l;
        l.spec = spec;
        l.in_shape = shape;
        l.out_shape = resolve_shape(spec, shape);
        l.weights.resize(weight_count(l));
        l.bias.assign(bias_count(l), 0.0);
        for (auto& w : l.weights) w = init_std * rng.normal();
        shape = l.out_shape;
        model.layers.push_back(std::move(l));
    }
    return model;
}

NetworkModel make_default_network(int t, int channels, uint64_t seed) {
    std::vector<LayerSpec> specs;
    if (t >= 64) {
        specs = {conv_spec(11, 32, 2), pool_spec(3, 2), relu_spec(), lrn_spec(),
                 conv_spec(5, 64),     relu_spec(),     conv_spec(5, 64), relu_spec(),
                 pool_spec(3, 2),      lrn_spec(),      conv_spec(3, 96), relu_spec(),
                 conv_spec(3, 96),     relu_spec(),     pool_spec(3, 2),
                 inner_product_spec(2), softmax_spec()};
    } else if (t >= 32) {
        specs = {conv_spec(5, 12, 1), pool_spec(3, 2), relu_spec(), lrn_spec(),
                 conv_spec(3, 24),    relu_spec(),     conv_spec(3, 24), relu_spec(),
                 pool_spec(3, 2),     lrn_spec(),      conv_spec(3, 32), relu_spec(),
                 conv_spec(3, 32),    relu_spec(),     pool_spec(3, 2),
                 inner_product_spec(2), softmax_spec()};
    } else {
        throw InputError("make_default_network: patch size below 32 needs an explicit arch");
    }
    return build_network({t, t, channels}, specs, seed);
}

std::vector<LayerSpec> parse_arch(const std::string& text) {
    std::vector<LayerSpec> specs;
    std::istringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        // trim
        size_t b = token.find_first_not_of(" \t");
        size_t e = token.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        token = token.substr(b, e - b + 1);

        std::vector<std::string> parts;
        std::istringstream ts(token);
        std::string part;
        while (std::getline(ts, part, ':')) parts.push_back(part);
        const std::string& kind = parts[0];
        auto geti = [&](const std::string& s) {
            try {
                return std::stoi(s);
            } catch (const std::exception&) {
                throw InputError("bad arch token: " + token);
            }
        };
        auto getd = [&](const std::string& s) {
            try {
                return std::stod(s);
            } catch (const std::exception&) {
                throw InputError("bad arch token: " + token);
            }
        };
        auto stride_of = [&](const std::string& s) {
            if (s.size() < 2 || (s[0] != 's' && s[0] != 'S'))
                throw InputError("bad stride in arch token: " + token);
            return geti(s.substr(1));
        };

        if (kind == "conv") {
            if (parts.size() < 2) throw InputError("bad arch token: " + token);
            // KxKxN
            std::vector<int> dims;
            std::istringstream ds(parts[1]);
            std::string d;
            while (std::getline(ds, d, 'x')) dims.push_back(geti(d));
            if (dims.size() != 3 || dims[0] != dims[1])
                throw InputError("conv wants KxKxN: " + token);
            int stride = parts.size() > 2 ? stride_of(parts[2]) : 1;
            specs.push_back(conv_spec(dims[0], dims[2], stride));
        } else if (kind == "pool") {
            if (parts.size() < 2) throw InputError("bad arch token: " + token);
            int k = geti(parts[1]);
            int stride = parts.size() > 2 ? stride_of(parts[2]) : k;
            specs.push_back(pool_spec(k, stride));
        } else if (kind == "relu") {
            specs.push_back(relu_spec());
        } else if (kind == "lrn") {
            if (parts.size() == 1)
                specs.push_back(lrn_spec());
            else if (parts.size() == 4)
                specs.push_back(lrn_spec(geti(parts[1]), getd(parts[2]), getd(parts[3])));
            else
                throw InputError("lrn wants lrn or lrn:N:alpha:beta: " + token);
        } else if (kind == "ip") {
            if (parts.size() != 2) throw InputError("bad arch token: " + token);
            specs.push_back(inner_product_spec(geti(parts[1])));
        } else if (kind == "softmax") {
            specs.push_back(softmax_spec());
        } else {
            throw InputError("unknown layer kind in arch: " + token);
        }
    }
    if (specs.empty()) throw InputError("empty arch string");
    return specs;
}

std::string arch_to_string(const std::vector<LayerSpec>& specs) {
    std::ostringstream os;
    for (size_t i = 0; i < specs.size(); ++i) {
        if (i) os << ", ";
        const auto& s = specs[i];
        switch (s.kind) {
        case LayerKind::conv:
            os << "conv:" << s.kh << 'x' << s.kw << 'x' << s.out_channels << ":s" << s.stride;
            break;
        case LayerKind::maxpool:
            os << "pool:" << s.kh << ":s" << s.stride;
            break;
        case LayerKind::relu:
            os << "relu";
            break;
        case LayerKind::lrn:
            os << "lrn:" << s.lrn_n << ':' << s.lrn_alpha << ':' << s.lrn_beta;
            break;
        case LayerKind::inner_product:
            os << "ip:" << s.out_channels;
            break;
        case LayerKind::softmax:
            os << "softmax";
            break;
        }
    }
    return os.str();
}

void validate_pattern(const NetworkModel& model) {
    using K = LayerKind;
    static const K expected[] = {K::conv, K::maxpool, K::relu,    K::lrn,
                                 K::conv, K::relu,    K::conv,    K::relu, K::maxpool,
                                 K::lrn,  K::conv,    K::relu,    K::conv, K::relu,
                                 K::maxpool, K::inner_product, K::softmax};
    const size_t n = sizeof(expected) / sizeof(expected[0]);
    if (model.layers.size() != n)
        throw InputError("architecture pattern violation: wrong layer count");
    for (size_t i = 0; i < n; ++i)
        if (model.layers[i].spec.kind != expected[i])
            throw InputError("architecture pattern violation at layer " + std::to_string(i));
}

Tensor layer_forward(const Layer& layer, const Tensor& in, LayerCtx* ctx) {
    if (Shape3{in.height(), in.width(), in.channels()} != layer.in_shape)
        throw InputError("layer_forward: input shape mismatch");
    if (ctx) ctx->input = in;
    Tensor out;
    switch (layer.spec.kind) {
    case LayerKind::conv: out = conv_forward(layer, in, ctx); break;
    case LayerKind::maxpool: out = pool_forward(layer, in, ctx); break;
    case LayerKind::relu: out = relu_forward(in); break;
    case LayerKind::lrn: out = lrn_forward(layer, in, ctx); break;
    case LayerKind::inner_product: out = ip_forward(layer, in); break;
    case LayerKind::softmax: out = softmax_forward(in); break;
    }
    if (ctx) ctx->output = out;
    return out;
}

Tensor layer_backward(const Layer& layer, const LayerCtx& ctx, const Tensor& grad_out,
                      std::vector<double>* gw, std::vector<double>* gb) {
    switch (layer.spec.kind) {
    case LayerKind::conv: return conv_backward(layer, ctx, grad_out, gw, gb);
    case LayerKind::maxpool: return pool_backward(layer, ctx, grad_out);
    case LayerKind::relu: return relu_backward(ctx, grad_out);
    case LayerKind::lrn: return lrn_backward(layer, ctx, grad_out);
    case LayerKind::inner_product: return ip_backward(layer, ctx, grad_out, gw, gb);
    case LayerKind::softmax: return softmax_backward(ctx, grad_out);
    }
    throw InputError("unknown layer kind");
}

Tensor NetworkModel::forward(const Tensor& in, std::vector<LayerCtx>* ctx) const {
    if (Shape3{in.height(), in.width(), in.channels()} != input_shape)
        throw InputError("forward: input does not match network input shape");
    if (!input_mean.empty() && input_mean.size() != static_cast<size_t>(input_shape.c))
        throw InputError("forward: input_mean does not match channel count");
    if (ctx) ctx->resize(layers.size());
    Tensor cur = in;
    if (!input_mean.empty()) {
        const int c = input_shape.c;
        for (size_t i = 0; i < cur.size(); ++i) cur.data()[i] -= input_mean[i % c];
    }
    for (size_t i = 0; i < layers.size(); ++i)
        cur = layer_forward(layers[i], cur, ctx ? &(*ctx)[i] : nullptr);
    return cur;
}

double NetworkModel::predict_patch(const PlaneStack& patch) const {
    Tensor out = forward(to_tensor(patch));
    if (out.size() != 2) throw InputError("predict_patch: network does not end in 2 logits");
    return out.data()[1];
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw InputError("softmax: empty input");
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double sum = 0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

long compute_iterations(long total_images, long batch_size, long epochs) {
    if (total_images < 1 || batch_size < 1 || epochs < 1)
        throw InputError("compute_iterations: all arguments must be >= 1");
    return epochs * ((total_images + batch_size - 1) / batch_size);
}

Gradients zero_gradients(const NetworkModel& model) {
    Gradients g;
    g.weights.resize(model.layers.size());
    g.bias.resize(model.layers.size());
    for (size_t i = 0; i < model.layers.size(); ++i) {
        g.weights[i].assign(model.layers[i].weights.size(), 0.0);
        g.bias[i].assign(model.layers[i].bias.size(), 0.0);
    }
    return g;
}

double loss_and_gradients(const NetworkModel& model, const std::vector<Tensor>& batch,
                          const std::vector<int>& labels, Gradients* grads) {
    if (batch.empty() || batch.size() != labels.size())
        throw InputError("loss_and_gradients: bad batch");
    if (model.layers.empty() || model.layers.back().spec.kind != LayerKind::softmax)
        throw InputError("loss_and_gradients: network must end with softmax");
    const size_t last = model.layers.size() - 1;
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    double loss = 0;
    std::vector<LayerCtx> ctx;
    for (size_t s = 0; s < batch.size(); ++s) {
        int label = labels[s];
        Tensor probs = model.forward(batch[s], grads ? &ctx : nullptr);
        if (label < 0 || static_cast<size_t>(label) >= probs.size())
            throw InputError("loss_and_gradients: label out of range");
        loss -= std::log(std::max(probs.data()[label], 1e-300)) * inv_b;
        if (!grads) continue;

        // Cross-entropy through softmax: gradient at the logits is
        // (p - onehot) / B, so backprop starts below the softmax layer.
        const Shape3 lsh = model.layers[last].in_shape;
        Tensor grad(lsh.w, lsh.h, lsh.c);
        for (size_t i = 0; i < probs.size(); ++i)
            grad.data()[i] =
                (probs.data()[i] - (static_cast<size_t>(label) == i ? 1.0 : 0.0)) * inv_b;
        for (size_t li = last; li-- > 0;)
            grad = layer_backward(model.layers[li], ctx[li], grad, &grads->weights[li],
                                  &grads->bias[li]);
    }
    return loss;
}

} // namespace salnet::cnn
