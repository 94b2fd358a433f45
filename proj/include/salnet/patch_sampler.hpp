#ifndef SALNET_PATCH_SAMPLER_HPP
#define SALNET_PATCH_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "salnet/dataset_io.hpp"
#include "salnet/fixation_map.hpp"
#include "salnet/image.hpp"

namespace salnet {

// Geometric relaxation tau[j+1] = tau[j] * (1 - epsilon), sweeping from the
// map's global maximum down to the non-salient boundary tau[J].
struct ThresholdSchedule {
    std::vector<double> tau;
    double epsilon = 0.0;
    int depth() const { return static_cast<int>(tau.size()) - 1; }
};

struct PatchRecord {
    PlaneStack data; // t x t x C feature patch
    int cx = 0, cy = 0;
    int label = 0; // 1 = salient
    std::string video_id;
    int frame_index = 0;
    int tau_level = -1; // relaxation level that admitted the patch; -1 for non-salient
};

ThresholdSchedule build_threshold_schedule(const FixationMap& map, double epsilon, int J);

// Centers are local maxima of W, swept over relaxation levels; a candidate is
// skipped when its patch intersects an already accepted one and the overlap
// exceeds half the patch side along either axis. At most max_per_frame
// patches are returned.
std::vector<PatchRecord> extract_salient_patches(const PlaneStack& stack,
                                                 const FixationMap& map,
                                                 const ThresholdSchedule& schedule,
                                                 int t, int max_per_frame);

struct NonSalientResult {
    std::vector<PatchRecord> patches;
    bool exhausted = false; // fewer admissible centers than requested
};

// Distinct centers drawn uniformly (seeded) among in-bounds positions with
// W(center) < tau[J].
NonSalientResult extract_nonsalient_patches(const PlaneStack& stack,
                                            const FixationMap& map,
                                            const ThresholdSchedule& schedule,
                                            int t, int count, uint64_t rng_seed);

struct SamplerConfig {
    int t = 32;
    double epsilon = 0.04;
    int relax_depth = 5; // J
    int max_salient_per_frame = 5;
    int nonsalient_per_frame = 0; // 0: match the frame's salient count
    double sigma_px = 0.0;        // 0: 2% of frame width
    bool balance = true;
    uint64_t seed = 0;
};

// Feature stacks per manifest entry; lets the sampler run off pre-extracted
// FMAP files or an in-process extractor.
struct FeatureSource {
    std::function<int(const ManifestEntry&)> frame_count;
    std::function<PlaneStack(const ManifestEntry&, int)> stack;
};

// Trims the larger class to the smaller one by seeded subsampling; relative
// order of the survivors is preserved.
std::vector<PatchRecord> balance_classes(std::vector<PatchRecord> records, uint64_t seed);

// Per-frame extraction over the whole manifest, deterministic merge by
// (video_id, frame, center), optional class balancing by seeded subsampling
// of the larger class, then a seeded global shuffle.
std::vector<PatchRecord> assemble_patch_dataset(const DatasetManifest& manifest,
                                                const SamplerConfig& config,
                                                const FeatureSource& features);

// index.tsv plus one FMAP blob per patch under blobs/.
void write_patch_dataset(const std::vector<PatchRecord>& records,
                         const std::filesystem::path& dir);
std::vector<PatchRecord> read_patch_dataset(const std::filesystem::path& dir);

} // namespace salnet

#endif
