#include "salnet/eval_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "salnet/error.hpp"

namespace salnet {

double auc_fixations(const Image<double>& map,
                     const std::vector<std::pair<int, int>>& fixations) {
    if (fixations.empty()) throw InputError("auc_fixations: no fixations");
    const int w = map.width(), h = map.height();
    std::vector<char> is_pos(static_cast<size_t>(w) * h, 0);
    for (const auto& [x, y] : fixations) {
        if (!map.in_bounds(x, y)) throw InputError("auc_fixations: fixation out of bounds");
        is_pos[static_cast<size_t>(y) * w + x] = 1; // duplicate fixations mark one pixel
    }

    struct Sample {
        double value;
        char pos;
    };
    std::vector<Sample> samples(static_cast<size_t>(w) * h);
    size_t n_pos = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        samples[i] = {map.data()[i], is_pos[i]};
        n_pos += is_pos[i];
    }
    size_t n_neg = samples.size() - n_pos;
    if (n_neg == 0) throw InputError("auc_fixations: every pixel fixated");

    // Mann-Whitney rank sum with average ranks on ties; identical to a
    // threshold sweep over the unique map values with half-credit for ties.
    std::sort(samples.begin(), samples.end(),
              [](const Sample& a, const Sample& b) { return a.value < b.value; });
    double rank_sum_pos = 0;
    size_t i = 0;
    while (i < samples.size()) {
        size_t j = i;
        size_t tie_pos = 0;
        while (j < samples.size() && samples[j].value == samples[i].value) {
            tie_pos += samples[j].pos;
            ++j;
        }
        double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j)); // 1-based
        rank_sum_pos += avg_rank * static_cast<double>(tie_pos);
        i = j;
    }
    double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double nss(const Image<double>& map, const std::vector<std::pair<int, int>>& fixations) {
    if (fixations.empty()) throw InputError("nss: no fixations");
    double mean = 0;
    for (size_t i = 0; i < map.size(); ++i) mean += map.data()[i];
    mean /= static_cast<double>(map.size());
    double var = 0;
    for (size_t i = 0; i < map.size(); ++i) {
        double d = map.data()[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(map.size());
    if (var < 1e-24) throw InputError("nss: map has no variance");
    double sd = std::sqrt(var);

    double sum = 0;
    for (const auto& [x, y] : fixations) {
        if (!map.in_bounds(x, y)) throw InputError("nss: fixation out of bounds");
        sum += (map.at(x, y) - mean) / sd;
    }
    return sum / static_cast<double>(fixations.size());
}

double pcc(const Image<double>& a, const Image<double>& b) {
    if (!a.same_shape(b)) throw InputError("pcc: shape mismatch");
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        ma += a.data()[i];
        mb += b.data()[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double da = a.data()[i] - ma, db = b.data()[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa < 1e-24 || sbb < 1e-24) throw InputError("pcc: map has no variance");
    return sab / std::sqrt(saa * sbb);
}

double EvalResult::mean() const {
    if (per_frame.empty()) return 0;
    double s = 0;
    for (double v : per_frame) s += v;
    return s / static_cast<double>(per_frame.size());
}

double EvalResult::stddev() const {
    if (per_frame.size() < 2) return 0;
    double m = mean(), s = 0;
    for (double v : per_frame) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(per_frame.size()));
}

ModelComparison compare_models(
    const std::map<std::string, std::vector<Image<double>>>& maps_per_model,
    const std::vector<std::vector<std::pair<int, int>>>& fixations_per_frame,
    const std::string& video_id) {
    if (maps_per_model.empty()) throw InputError("compare_models: no models");
    const size_t n_frames = fixations_per_frame.size();
    for (const auto& [name, maps] : maps_per_model)
        if (maps.size() != n_frames)
            throw InputError("compare_models: model '" + name + "' misaligned with fixations");

    ModelComparison cmp;
    std::map<std::string, std::vector<double>> per_frame_auc;
    int skipped = 0;
    for (size_t f = 0; f < n_frames; ++f) {
        if (fixations_per_frame[f].empty()) {
            ++skipped;
            continue;
        }
        for (const auto& [name, maps] : maps_per_model)
            per_frame_auc[name].push_back(auc_fixations(maps[f], fixations_per_frame[f]));
    }

    for (const auto& [name, values] : per_frame_auc) {
        EvalResult r;
        r.video_id = video_id;
        r.model = name;
        r.metric = "auc";
        r.per_frame = values;
        r.skipped_frames = skipped;
        cmp.per_model.push_back(std::move(r));
    }
    for (size_t a = 0; a < cmp.per_model.size(); ++a) {
        for (size_t b = a + 1; b < cmp.per_model.size(); ++b) {
            PairwiseDelta d;
            d.model_a = cmp.per_model[a].model;
            d.model_b = cmp.per_model[b].model;
            double sum = 0;
            for (size_t f = 0; f < cmp.per_model[a].per_frame.size(); ++f)
                sum += cmp.per_model[a].per_frame[f] - cmp.per_model[b].per_frame[f];
            d.mean_delta = cmp.per_model[a].per_frame.empty()
                               ? 0
                               : sum / static_cast<double>(cmp.per_model[a].per_frame.size());
            cmp.deltas.push_back(d);
        }
    }
    return cmp;
}

} // namespace salnet
