#ifndef SALNET_EVAL_METRICS_HPP
#define SALNET_EVAL_METRICS_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "salnet/image.hpp"

namespace salnet {

// Fixation-based AUC ("AUC-fix"): positives are map values at fixated
// pixels, negatives at all others; rank statistic with ties counted half.
// 1 = perfect separation, 0.5 = chance.
double auc_fixations(const Image<double>& map, const std::vector<std::pair<int, int>>& fixations);

// Mean standardized map value at the fixations; throws when the map has no
// variance.
double nss(const Image<double>& map, const std::vector<std::pair<int, int>>& fixations);

// Pearson correlation over pixels; throws when either map has no variance.
double pcc(const Image<double>& a, const Image<double>& b);

struct EvalResult {
    std::string video_id;
    std::string model;
    std::string metric;
    std::vector<double> per_frame;
    int skipped_frames = 0; // frames without fixations
    double mean() const;
    double stddev() const;
};

struct PairwiseDelta {
    std::string model_a, model_b;
    double mean_delta = 0; // mean per-frame (a - b)
};

struct ModelComparison {
    std::vector<EvalResult> per_model;
    std::vector<PairwiseDelta> deltas;
};

// Per-frame AUC for several models over one video's frames; maps_per_model
// must be frame-aligned. Frames without fixations are skipped everywhere and
// counted.
ModelComparison compare_models(
    const std::map<std::string, std::vector<Image<double>>>& maps_per_model,
    const std::vector<std::vector<std::pair<int, int>>>& fixations_per_frame,
    const std::string& video_id);

} // namespace salnet

#endif
