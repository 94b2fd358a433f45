#ifndef SALNET_SOLVER_HPP
#define SALNET_SOLVER_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "salnet/cnn.hpp"
#include "salnet/patch_sampler.hpp"

namespace salnet::cnn {

// Data-selection strategies:
//  - fixed_chunk: run mini-batch iterations up to max_iterations, validating
//    every validation_interval iterations.
//  - per_epoch_full_pass: pass the whole training set between validations,
//    bounded by both epochs and max_iterations.
enum class Strategy { per_epoch_full_pass, fixed_chunk };

struct SolverConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 16;
    int epochs = 20;
    long max_iterations = 100000; // hard cap on gradient steps
    long validation_interval = 100;
    Strategy strategy = Strategy::per_epoch_full_pass;
    uint64_t seed = 1;
    // Learning rate decays by this factor at each third of max_iterations.
    double lr_step_factor = 0.1;
};

struct AccuracyPoint {
    long iteration = 0;
    double accuracy = 0;
};

struct TrainReport {
    std::vector<AccuracyPoint> points;
    double best_accuracy = 0;
    long best_iteration = 0;
    long iterations_run = 0;
    double wall_time_sec = 0; // informational only; never serialized
};

// Everything needed to continue a run exactly where it stopped.
struct SolverState {
    bool initialized = false;
    long iteration = 0;
    int epoch = 0;
    uint64_t cursor = 0;
    std::vector<uint32_t> order;
    std::vector<std::vector<double>> velocity_w;
    std::vector<std::vector<double>> velocity_b;
    std::string rng_state;
};

// SGD with momentum. Deterministic for a fixed seed; throws DivergenceError
// on a non-finite loss. When `state` is supplied and initialized, training
// resumes and continues the original schedule.
TrainReport train(NetworkModel& model, const std::vector<PatchRecord>& train_set,
                  const std::vector<PatchRecord>& val_set, const SolverConfig& config,
                  SolverState* state = nullptr);

// Fraction of patches whose argmax class matches the label.
double accuracy(const NetworkModel& model, const std::vector<PatchRecord>& patches);

// Per-channel mean over a patch set, for input centering.
std::vector<double> channel_means(const std::vector<PatchRecord>& patches);

// Deterministic seeded split; the first ceil(fraction * n) shuffled records
// become the held-out set.
std::pair<std::vector<PatchRecord>, std::vector<PatchRecord>>
split_train_val(const std::vector<PatchRecord>& records, double val_fraction, uint64_t seed);

// CSV with header iteration,accuracy.
void write_train_report(const TrainReport& report, const std::filesystem::path& file);

} // namespace salnet::cnn

#endif
