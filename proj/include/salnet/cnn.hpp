#ifndef SALNET_CNN_HPP
#define SALNET_CNN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "salnet/image.hpp"
#include "salnet/rng.hpp"

namespace salnet::cnn {

enum class LayerKind { conv, maxpool, relu, lrn, inner_product, softmax };

struct LayerSpec {
    LayerKind kind;
    int kh = 0, kw = 0;   // conv kernel / pool window
    int stride = 1;
    int out_channels = 0; // conv filters / inner-product outputs
    int lrn_n = 5;        // spatial window side, odd
    double lrn_alpha = 1e-4;
    double lrn_beta = 0.75;
};

struct Shape3 {
    int h = 0, w = 0, c = 0;
    int count() const { return h * w * c; }
    bool operator==(const Shape3&) const = default;
};

// One network layer with resolved shapes and owned parameters. Convolution
// weights are laid out (out_c, kh, kw, in_c); inner-product weights
// (out, in) over the flattened input.
struct Layer {
    LayerSpec spec;
    Shape3 in_shape, out_shape;
    std::vector<double> weights;
    std::vector<double> bias;
};

// Scratch a forward pass leaves behind for the matching backward pass.
struct LayerCtx {
    Tensor input;
    Tensor output;
    std::vector<int> argmax;    // maxpool winners
    std::vector<double> col;    // conv im2col buffer
    std::vector<double> denom;  // lrn normalizers (pre-power sums)
};

struct NetworkModel {
    Shape3 input_shape;
    std::vector<Layer> layers;
    std::string channel_config; // recorded so predict knows its inputs
    // Per-channel training-set mean subtracted from the input before the
    // first layer; empty means no centering. Stored in checkpoints.
    std::vector<double> input_mean;
    int patch_size() const { return input_shape.h; }

    Tensor forward(const Tensor& in, std::vector<LayerCtx>* ctx = nullptr) const;
    // Softmax probability of the salient class for a t x t x C feature patch.
    double predict_patch(const PlaneStack& patch) const;
};

// Layer constructors; shapes resolve at build time.
LayerSpec conv_spec(int k, int out_channels, int stride = 1);
LayerSpec pool_spec(int k, int stride);
LayerSpec relu_spec();
LayerSpec lrn_spec(int n = 5, double alpha = 1e-4, double beta = 0.75);
LayerSpec inner_product_spec(int out);
LayerSpec softmax_spec();

// Chains the specs from the input shape, validates every shape, sizes the
// parameter vectors and applies seeded Gaussian initialization (std 0.01,
// zero biases).
NetworkModel build_network(Shape3 input, const std::vector<LayerSpec>& specs, uint64_t seed,
                           double init_std = 0.01);

// Default architecture: conv-pool-relu, then twice conv-relu-conv-relu-pool,
// an LRN after the first two patterns, closed by inner product and softmax.
// Kernel sizes follow the CaffeNet proportions for t >= 64 and a reduced set
// for 32 <= t < 64.
NetworkModel make_default_network(int t, int channels, uint64_t seed);

// Parses "conv:5x5x16:s2, pool:3:s2, relu, lrn, ..., ip:2, softmax".
std::vector<LayerSpec> parse_arch(const std::string& text);
std::string arch_to_string(const std::vector<LayerSpec>& specs);

// Asserts the layer ordering described above; throws on violation.
void validate_pattern(const NetworkModel& model);

// Individual layer passes. backward() consumes the ctx its forward filled,
// accumulates parameter gradients when buffers are supplied, and returns the
// gradient with respect to the layer input.
Tensor layer_forward(const Layer& layer, const Tensor& in, LayerCtx* ctx = nullptr);
Tensor layer_backward(const Layer& layer, const LayerCtx& ctx, const Tensor& grad_out,
                      std::vector<double>* grad_weights = nullptr,
                      std::vector<double>* grad_bias = nullptr);

// Numerically stable softmax of a flat logit vector; strictly positive, sums
// to 1.
std::vector<double> softmax(const std::vector<double>& logits);

// epochs * ceil(total_images / batch_size).
long compute_iterations(long total_images, long batch_size, long epochs);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};
Gradients zero_gradients(const NetworkModel& model);

// Mean cross-entropy of the softmax output over a batch; fills parameter
// gradients via backpropagation when grads != nullptr.
double loss_and_gradients(const NetworkModel& model, const std::vector<Tensor>& batch,
                          const std::vector<int>& labels, Gradients* grads);

} // namespace salnet::cnn

#endif
