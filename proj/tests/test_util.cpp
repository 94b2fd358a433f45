#include "test_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "salnet/rng.hpp"

namespace fs = std::filesystem;

namespace salnet::test {

fs::path temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("salnet_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

PlaneStack gray_frame(int w, int h, float value) {
    PlaneStack f(w, h, 3);
    for (size_t i = 0; i < f.size(); ++i) f.data()[i] = value;
    return f;
}

PlaneStack make_periodic_texture(int w, int h, uint64_t seed) {
    Rng rng(seed);
    struct Wave {
        double kx, ky, phase, amp;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < 6; ++i) {
        double kx = static_cast<double>(1 + rng.index(4));
        double ky = static_cast<double>(1 + rng.index(4));
        waves.push_back({kx, ky, 2.0 * M_PI * rng.uniform(), 0.04 + 0.04 * rng.uniform()});
    }
    // High-frequency detail so displaced pseudo-matches stay expensive for
    // block matchers.
    for (int i = 0; i < 3; ++i) {
        double kx = static_cast<double>(7 + rng.index(7));
        double ky = static_cast<double>(7 + rng.index(7));
        waves.push_back({kx, ky, 2.0 * M_PI * rng.uniform(), 0.02 + 0.02 * rng.uniform()});
    }
    PlaneStack f(w, h, 3);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < 3; ++c) {
                double v = 0.4;
                for (size_t i = 0; i < waves.size(); ++i) {
                    const Wave& wv = waves[i];
                    v += wv.amp * std::sin(2.0 * M_PI * (wv.kx * x / w + wv.ky * y / h) +
                                           wv.phase + 0.7 * c);
                }
                f.at(x, y, c) = static_cast<float>(std::clamp(v, 0.05, 0.95));
            }
        }
    }
    return f;
}

PlaneStack shift_wrap(const PlaneStack& src, int dx, int dy) {
    PlaneStack out(src.width(), src.height(), src.channels());
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x) {
            int sx = ((x - dx) % src.width() + src.width()) % src.width();
            int sy = ((y - dy) % src.height() + src.height()) % src.height();
            for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = src.at(sx, sy, c);
        }
    return out;
}

void add_gaussian_bump(PlaneStack& frame, double cx, double cy, double sigma, double amp) {
    for (int y = 0; y < frame.height(); ++y)
        for (int x = 0; x < frame.width(); ++x) {
            double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            float add = static_cast<float>(amp * std::exp(-d2 / (2.0 * sigma * sigma)));
            for (int c = 0; c < frame.channels(); ++c)
                frame.at(x, y, c) = std::min(1.0f, frame.at(x, y, c) + add);
        }
}

BlobDataset make_moving_blob_dataset(const fs::path& root, int n_videos, int frames_per_video,
                                     uint64_t seed) {
    fs::create_directories(root);
    BlobDataset ds;
    ds.root = root;
    ds.manifest = root / "manifest.tsv";
    std::ofstream manifest(ds.manifest);

    const int w = 64, h = 64;
    const double blob_sigma = 3.5, blob_amp = 0.55;
    // Linear paths staying within the admissible patch-center region for
    // t = 32 patches over 16 frames; the frame-7 position of the first path
    // sits near the (32, 32) grid center so dense prediction has a
    // well-aligned target.
    const double starts[][4] = {
        {18.0, 44.0, 1.8, -1.7},
        {44.0, 20.0, -1.8, 1.7},
        {20.0, 20.0, 1.7, 1.7},
        {44.0, 44.0, -1.7, -1.7},
    };

    for (int v = 0; v < n_videos; ++v) {
        BlobVideo video;
        video.video_id = "blob" + std::to_string(v);
        video.width = w;
        video.height = h;
        // Static decoys parked at least 8px off this video's trajectory.
        video.distractors = {{20.0, 20.0}, {44.0, 44.0}, {32.0, 18.0}};
        const double* path = starts[v % 4];
        if (v % 4 == 2) video.distractors = {{44.0, 20.0}, {20.0, 46.0}, {32.0, 46.0}};
        if (v % 4 == 3) video.distractors = {{20.0, 44.0}, {44.0, 18.0}, {46.0, 32.0}};

        PlaneStack background = make_periodic_texture(w, h, seed + 101 * v);
        for (const auto& [dx, dy] : video.distractors)
            add_gaussian_bump(background, dx, dy, blob_sigma, blob_amp);

        fs::path frame_dir = root / ("frames_" + video.video_id);
        fs::create_directories(frame_dir);
        fs::path fix_path = root / ("fix_" + video.video_id + ".csv");
        std::ofstream fix(fix_path);
        fix << "video_id,frame,x,y,subject\n";

        for (int f = 0; f < frames_per_video; ++f) {
            double cx = path[0] + path[2] * f;
            double cy = path[1] + path[3] * f;
            video.blob_centers.emplace_back(cx, cy);
            PlaneStack frame = background;
            add_gaussian_bump(frame, cx, cy, blob_sigma, blob_amp);
            char name[32];
            std::snprintf(name, sizeof name, "frame_%03d.ppm", f);
            save_ppm(frame, frame_dir / name);

            const int jitter[4][2] = {{0, 0}, {1, 0}, {0, 1}, {-1, -1}};
            for (int s = 0; s < 4; ++s) {
                int fx = std::clamp(static_cast<int>(std::lround(cx)) + jitter[s][0], 0, w - 1);
                int fy = std::clamp(static_cast<int>(std::lround(cy)) + jitter[s][1], 0, h - 1);
                fix << video.video_id << ',' << f << ',' << fx << ',' << fy << ",s" << s << "\n";
            }
        }
        manifest << video.video_id << '\t' << ("frames_" + video.video_id) << '\t'
                 << ("fix_" + video.video_id + ".csv") << '\t' << w << '\t' << h << '\n';
        ds.videos.push_back(std::move(video));
    }
    return ds;
}

} // namespace salnet::test
