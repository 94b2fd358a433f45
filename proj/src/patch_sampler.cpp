#include "salnet/patch_sampler.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "salnet/error.hpp"
#include "salnet/rng.hpp"

namespace fs = std::filesystem;

namespace salnet {

namespace {

PlaneStack cut_patch(const PlaneStack& stack, int cx, int cy, int t) {
    int left = cx - t / 2;
    int top = cy - t / 2;
    PlaneStack out(t, t, stack.channels());
    for (int y = 0; y < t; ++y)
        for (int x = 0; x < t; ++x)
            for (int c = 0; c < stack.channels(); ++c)
                out.at(x, y, c) = stack.at(left + x, top + y, c);
    return out;
}

bool center_in_bounds(int cx, int cy, int t, int w, int h) {
    int left = cx - t / 2;
    int top = cy - t / 2;
    return left >= 0 && top >= 0 && left + t <= w && top + t <= h;
}

// True when the t x t patches at c1 and c2 intersect and their overlap spans
// more than t/2 along either axis.
bool overlaps_too_much(int x1, int y1, int x2, int y2, int t) {
    double ox = t - std::abs(x1 - x2);
    double oy = t - std::abs(y1 - y2);
    if (ox <= 0 || oy <= 0) return false;
    return ox > t / 2.0 || oy > t / 2.0;
}

void check_patch_args(const PlaneStack& stack, const FixationMap& map, int t) {
    if (map.values.width() != stack.width() || map.values.height() != stack.height())
        throw InputError("stack and fixation map dimensions differ");
    if (t <= 0 || t > std::min(stack.width(), stack.height()))
        throw InputError("patch size larger than frame");
}

} // namespace

ThresholdSchedule build_threshold_schedule(const FixationMap& map, double epsilon, int J) {
    if (epsilon <= 0.0 || epsilon >= 1.0)
        throw InputError("build_threshold_schedule: epsilon must lie in (0,1)");
    if (J < 0) throw InputError("build_threshold_schedule: negative relaxation depth");
    double tau0 = map.max_value();
    if (map.empty() && tau0 <= 0.0)
        throw InputError("build_threshold_schedule: empty fixation map");

    ThresholdSchedule s;
    s.epsilon = epsilon;
    s.tau.resize(J + 1);
    s.tau[0] = tau0;
    for (int j = 0; j < J; ++j) s.tau[j + 1] = s.tau[j] - epsilon * s.tau[j];
    return s;
}

std::vector<PatchRecord> extract_salient_patches(const PlaneStack& stack,
                                                 const FixationMap& map,
                                                 const ThresholdSchedule& schedule,
                                                 int t, int max_per_frame) {
    check_patch_args(stack, map, t);
    const int w = stack.width(), h = stack.height();
    const double tau_last = schedule.tau.back();

    // Local maxima of W over the 8-neighborhood (plateaus admitted), with the
    // patch fully inside the frame and the center at least weakly salient.
    struct Candidate {
        double value;
        int x, y;
    };
    std::vector<Candidate> candidates;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double v = map.values.at(x, y);
            if (v < tau_last || v <= 0.0) continue;
            if (!center_in_bounds(x, y, t, w, h)) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    int nx = x + dx, ny = y + dy;
                    if (!map.values.in_bounds(nx, ny)) continue;
                    if (map.values.at(nx, ny) > v) {
                        is_max = false;
                        break;
                    }
                }
            if (is_max) candidates.push_back({v, x, y});
        }
    }
    // Highest value first; lexicographically smaller center wins ties.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.x != b.x) return a.x < b.x;
        return a.y < b.y;
    });

    std::vector<PatchRecord> out;
    for (const auto& c : candidates) {
        if (static_cast<int>(out.size()) >= max_per_frame) break;
        bool blocked = false;
        for (const auto& p : out)
            if (overlaps_too_much(c.x, c.y, p.cx, p.cy, t)) {
                blocked = true;
                break;
            }
        if (blocked) continue;
        int level = 0;
        while (schedule.tau[level] > c.value) ++level; // exists: c.value >= tau back
        PatchRecord r;
        r.data = cut_patch(stack, c.x, c.y, t);
        r.cx = c.x;
        r.cy = c.y;
        r.label = 1;
        r.tau_level = level;
        out.push_back(std::move(r));
    }
    return out;
}

NonSalientResult extract_nonsalient_patches(const PlaneStack& stack,
                                            const FixationMap& map,
                                            const ThresholdSchedule& schedule,
                                            int t, int count, uint64_t rng_seed) {
    check_patch_args(stack, map, t);
    if (count < 0) throw InputError("extract_nonsalient_patches: negative count");
    const int w = stack.width(), h = stack.height();
    const double tau_last = schedule.tau.back();

    std::vector<std::pair<int, int>> admissible;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (center_in_bounds(x, y, t, w, h) && map.values.at(x, y) < tau_last)
                admissible.emplace_back(x, y);

    NonSalientResult res;
    res.exhausted = static_cast<int>(admissible.size()) < count;
    int take = std::min<int>(count, static_cast<int>(admissible.size()));

    Rng rng(rng_seed);
    // Partial Fisher-Yates: the first `take` slots are a uniform sample
    // without replacement.
    for (int i = 0; i < take; ++i) {
        size_t j = i + rng.index(admissible.size() - i);
        std::swap(admissible[i], admissible[j]);
    }
    for (int i = 0; i < take; ++i) {
        PatchRecord r;
        r.cx = admissible[i].first;
        r.cy = admissible[i].second;
        r.data = cut_patch(stack, r.cx, r.cy, t);
        r.label = 0;
        r.tau_level = -1;
        res.patches.push_back(std::move(r));
    }
    return res;
}

std::vector<PatchRecord> assemble_patch_dataset(const DatasetManifest& manifest,
                                                const SamplerConfig& config,
                                                const FeatureSource& features) {
    std::vector<PatchRecord> salient, nonsalient;

    for (const auto& entry : manifest.entries) {
        int n_frames = features.frame_count(entry);
        FixationLog log = load_fixations(entry.fixation_file, entry.width, entry.height);
        double sigma = config.sigma_px > 0 ? config.sigma_px : default_sigma_px(entry.width);

        for (int f = 0; f < n_frames; ++f) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& [x, y] : log.points_for(entry.video_id, f))
                pts.emplace_back(x, y);
            FixationMap map = build_wooding_map(pts, entry.width, entry.height, sigma);
            if (map.empty()) continue; // nothing to label this frame against

            ThresholdSchedule schedule =
                build_threshold_schedule(map, config.epsilon, config.relax_depth);
            PlaneStack stack = features.stack(entry, f);

            auto pos = extract_salient_patches(stack, map, schedule, config.t,
                                               config.max_salient_per_frame);
            int want_neg = config.nonsalient_per_frame > 0 ? config.nonsalient_per_frame
                                                           : static_cast<int>(pos.size());
            // Per-frame seed: derived from the global seed and the frame's
            // position so extraction order never matters.
            uint64_t frame_seed = config.seed ^ (std::hash<std::string>{}(entry.video_id) +
                                                 0x9e3779b97f4a7c15ull * (f + 1));
            auto neg = extract_nonsalient_patches(stack, map, schedule, config.t, want_neg,
                                                  frame_seed);
            for (auto& r : pos) {
                r.video_id = entry.video_id;
                r.frame_index = f;
                salient.push_back(std::move(r));
            }
            for (auto& r : neg.patches) {
                r.video_id = entry.video_id;
                r.frame_index = f;
                nonsalient.push_back(std::move(r));
            }
        }
    }

    auto order = [](const PatchRecord& a, const PatchRecord& b) {
        if (a.video_id != b.video_id) return a.video_id < b.video_id;
        if (a.frame_index != b.frame_index) return a.frame_index < b.frame_index;
        if (a.cx != b.cx) return a.cx < b.cx;
        return a.cy < b.cy;
    };
    std::sort(salient.begin(), salient.end(), order);
    std::sort(nonsalient.begin(), nonsalient.end(), order);

    std::vector<PatchRecord> all;
    all.reserve(salient.size() + nonsalient.size());
    for (auto& r : salient) all.push_back(std::move(r));
    for (auto& r : nonsalient) all.push_back(std::move(r));

    if (config.balance) all = balance_classes(std::move(all), config.seed ^ 0xba1a5ceull);

    Rng rng(config.seed ^ 0x5c0ffeeULL);
    rng.shuffle(all);
    return all;
}

std::vector<PatchRecord> balance_classes(std::vector<PatchRecord> records, uint64_t seed) {
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < records.size(); ++i)
        (records[i].label == 1 ? pos : neg).push_back(i);
    size_t target = std::min(pos.size(), neg.size());
    auto& larger = pos.size() > neg.size() ? pos : neg;
    if (larger.size() > target) {
        Rng rng(seed);
        for (size_t i = 0; i < target; ++i) {
            size_t j = i + rng.index(larger.size() - i);
            std::swap(larger[i], larger[j]);
        }
        larger.resize(target);
    }
    std::vector<size_t> keep = pos;
    keep.insert(keep.end(), neg.begin(), neg.end());
    std::sort(keep.begin(), keep.end());
    std::vector<PatchRecord> out;
    out.reserve(keep.size());
    for (size_t i : keep) out.push_back(std::move(records[i]));
    return out;
}

void write_patch_dataset(const std::vector<PatchRecord>& records, const fs::path& dir) {
    fs::create_directories(dir / "blobs");
    std::ofstream os(dir / "index.tsv");
    if (!os) throw InputError("cannot write patch index in " + dir.string());
    os << "# salnet patch dataset v1\n";
    if (!records.empty())
        os << "# t=" << records.front().data.width()
           << " channels=" << records.front().data.channels() << "\n";
    char name[32];
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        std::snprintf(name, sizeof name, "%06zu.fmap", i);
        write_plane_stack(r.data, dir / "blobs" / name);
        os << i << '\t' << r.video_id << '\t' << r.frame_index << '\t' << r.cx << '\t' << r.cy
           << '\t' << r.label << '\t' << r.tau_level << '\t' << "blobs/" << name << '\n';
    }
    if (!os) throw InputError("write failed in " + dir.string());
}

std::vector<PatchRecord> read_patch_dataset(const fs::path& dir) {
    std::ifstream is(dir / "index.tsv");
    if (!is) throw InputError("cannot open patch index in " + dir.string());
    std::vector<PatchRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string idx, file;
        PatchRecord r;
        ss >> idx >> r.video_id >> r.frame_index >> r.cx >> r.cy >> r.label >> r.tau_level >>
            file;
        if (!ss) throw FormatError("malformed patch index line in " + dir.string());
        r.data = read_plane_stack(dir / file);
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace salnet
