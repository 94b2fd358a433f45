#include "salnet/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "salnet/error.hpp"
#include "salnet/rng.hpp"

namespace salnet::cnn {

namespace {

struct Batch {
    std::vector<Tensor> data;
    std::vector<int> labels;
};

Batch gather(const std::vector<Tensor>& pool, const std::vector<int>& labels,
             const std::vector<uint32_t>& order, uint64_t begin, uint64_t end) {
    Batch b;
    for (uint64_t i = begin; i < end; ++i) {
        b.data.push_back(pool[order[i]]);
        b.labels.push_back(labels[order[i]]);
    }
    return b;
}

double scheduled_lr(const SolverConfig& cfg, long iteration) {
    if (cfg.max_iterations < 3) return cfg.learning_rate;
    int step = static_cast<int>(std::min<long>(2, 3 * iteration / cfg.max_iterations));
    return cfg.learning_rate * std::pow(cfg.lr_step_factor, step);
}

void sgd_step(NetworkModel& model, const Gradients& grads, SolverState& state, double lr,
              double momentum) {
    for (size_t li = 0; li < model.layers.size(); ++li) {
        auto& vw = state.velocity_w[li];
        auto& w = model.layers[li].weights;
        const auto& gw = grads.weights[li];
        for (size_t i = 0; i < w.size(); ++i) {
            vw[i] = momentum * vw[i] - lr * gw[i];
            w[i] += vw[i];
        }
        auto& vb = state.velocity_b[li];
        auto& b = model.layers[li].bias;
        const auto& gb = grads.bias[li];
        for (size_t i = 0; i < b.size(); ++i) {
            vb[i] = momentum * vb[i] - lr * gb[i];
            b[i] += vb[i];
        }
    }
}

} // namespace

double accuracy(const NetworkModel& model, const std::vector<PatchRecord>& patches) {
    if (patches.empty()) throw InputError("accuracy: empty patch set");
    long correct = 0;
    for (const auto& p : patches) {
        Tensor probs = model.forward(to_tensor(p.data));
        size_t best = 0;
        for (size_t i = 1; i < probs.size(); ++i)
            if (probs.data()[i] > probs.data()[best]) best = i;
        if (static_cast<int>(best) == p.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(patches.size());
}

std::vector<double> channel_means(const std::vector<PatchRecord>& patches) {
    if (patches.empty()) throw InputError("channel_means: empty patch set");
    const int c = patches.front().data.channels();
    std::vector<double> mean(c, 0.0);
    size_t per_channel = 0;
    for (const auto& p : patches) {
        for (size_t i = 0; i < p.data.size(); ++i) mean[i % c] += p.data.data()[i];
        per_channel += p.data.size() / c;
    }
    for (auto& m : mean) m /= static_cast<double>(per_channel);
    return mean;
}

std::pair<std::vector<PatchRecord>, std::vector<PatchRecord>>
split_train_val(const std::vector<PatchRecord>& records, double val_fraction, uint64_t seed) {
    std::vector<size_t> idx(records.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed ^ 0x511e7ull);
    rng.shuffle(idx);
    size_t n_val = static_cast<size_t>(std::ceil(val_fraction * records.size()));
    n_val = std::min(n_val, records.size());
    std::pair<std::vector<PatchRecord>, std::vector<PatchRecord>> out;
    for (size_t i = 0; i < idx.size(); ++i)
        (i < n_val ? out.second : out.first).push_back(records[idx[i]]);
    return out;
}

TrainReport train(NetworkModel& model, const std::vector<PatchRecord>& train_set,
                  const std::vector<PatchRecord>& val_set, const SolverConfig& config,
                  SolverState* state) {
    if (train_set.empty()) throw InputError("train: empty training set");
    if (val_set.empty()) throw InputError("train: empty validation set");
    if (config.batch_size < 1 || config.max_iterations < 1 || config.learning_rate < 0)
        throw InputError("train: bad solver config");
    for (const auto& p : train_set)
        if (p.label != 0 && p.label != 1) throw InputError("train: labels must be 0 or 1");

    auto t_start = std::chrono::steady_clock::now();

    std::vector<Tensor> data;
    std::vector<int> labels;
    data.reserve(train_set.size());
    for (const auto& p : train_set) {
        data.push_back(to_tensor(p.data));
        labels.push_back(p.label);
    }
    const uint64_t n = data.size();

    SolverState local;
    SolverState& st = state ? *state : local;
    Rng rng(config.seed);
    if (!st.initialized) {
        st.initialized = true;
        st.iteration = 0;
        st.epoch = 0;
        st.cursor = 0;
        st.order.resize(n);
        for (uint64_t i = 0; i < n; ++i) st.order[i] = static_cast<uint32_t>(i);
        rng.shuffle(st.order);
        st.velocity_w.resize(model.layers.size());
        st.velocity_b.resize(model.layers.size());
        for (size_t li = 0; li < model.layers.size(); ++li) {
            st.velocity_w[li].assign(model.layers[li].weights.size(), 0.0);
            st.velocity_b[li].assign(model.layers[li].bias.size(), 0.0);
        }
    } else {
        if (st.order.size() != n || st.velocity_w.size() != model.layers.size())
            throw InputError("train: solver state does not match model/dataset");
        rng.set_state(st.rng_state);
    }

    TrainReport report;
    const long start_iteration = st.iteration;
    auto validate = [&]() {
        double acc = accuracy(model, val_set);
        report.points.push_back({st.iteration, acc});
        if (acc > report.best_accuracy) {
            report.best_accuracy = acc;
            report.best_iteration = st.iteration;
        }
    };
    auto step_batch = [&](uint64_t begin, uint64_t end) {
        Batch b = gather(data, labels, st.order, begin, end);
        Gradients grads = zero_gradients(model);
        double loss = loss_and_gradients(model, b.data, b.labels, &grads);
        if (!std::isfinite(loss))
            throw DivergenceError("training diverged: non-finite loss at iteration " +
                                  std::to_string(st.iteration));
        sgd_step(model, grads, st, scheduled_lr(config, st.iteration), config.momentum);
        ++st.iteration;
    };

    if (st.iteration == 0) validate();

    if (config.strategy == Strategy::fixed_chunk) {
        while (st.iteration < config.max_iterations) {
            if (st.cursor >= n) {
                rng.shuffle(st.order);
                st.cursor = 0;
            }
            uint64_t end = std::min<uint64_t>(st.cursor + config.batch_size, n);
            step_batch(st.cursor, end);
            st.cursor = end;
            if (st.iteration % config.validation_interval == 0) validate();
        }
        if (report.points.empty() || report.points.back().iteration != st.iteration) validate();
    } else {
        while (st.epoch < config.epochs && st.iteration < config.max_iterations) {
            if (st.cursor == 0) rng.shuffle(st.order);
            while (st.cursor < n && st.iteration < config.max_iterations) {
                uint64_t end = std::min<uint64_t>(st.cursor + config.batch_size, n);
                step_batch(st.cursor, end);
                st.cursor = end;
            }
            if (st.cursor >= n) {
                st.cursor = 0;
                ++st.epoch;
            }
            validate(); // all training data passed before each validation
        }
    }

    st.rng_state = rng.state();
    report.iterations_run = st.iteration - start_iteration;
    report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

void write_train_report(const TrainReport& report, const std::filesystem::path& file) {
    std::ofstream os(file);
    if (!os) throw InputError("cannot write " + file.string());
    os << "iteration,accuracy\n";
    char buf[64];
    for (const auto& p : report.points) {
        std::snprintf(buf, sizeof buf, "%ld,%.6f\n", p.iteration, p.accuracy);
        os << buf;
    }
    if (!os) throw InputError("write failed: " + file.string());
}

} // namespace salnet::cnn
