#ifndef SALNET_MODEL_IO_HPP
#define SALNET_MODEL_IO_HPP

#include <filesystem>
#include <optional>

#include "salnet/cnn.hpp"
#include "salnet/solver.hpp"

namespace salnet::cnn {

// Versioned binary checkpoint: "SNET" magic, format version, input shape and
// channel-config tag, per-layer specs and parameter blocks with explicit
// sizes, an optional solver-state block for exact resume, and a trailing
// 64-bit FNV-1a checksum over everything before it. Little-endian throughout.
void save_model(const NetworkModel& model, const std::filesystem::path& file,
                const SolverState* state = nullptr);

struct LoadedModel {
    NetworkModel model;
    std::optional<SolverState> state;
};

LoadedModel load_model(const std::filesystem::path& file);

} // namespace salnet::cnn

#endif
