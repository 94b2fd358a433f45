#include <algorithm>
#include <cstdio>
#include <fstream>

#include "salnet/error.hpp"
#include "salnet/eval_metrics.hpp"
#include "salnet/fixation_map.hpp"
#include "salnet/model_io.hpp"
#include "salnet/parallel.hpp"
#include "salnet/pipeline.hpp"
#include "salnet/saliency_builder.hpp"

namespace fs = std::filesystem;

namespace salnet::pipeline {

namespace {

bool frame_file_exists(const fs::path& dir, const std::string& video_id, int frame) {
    fs::path fmap = dir / feature_file_name(video_id, frame);
    if (fs::exists(fmap)) return true;
    return fs::exists(fmap.replace_extension(".pgm"));
}

fs::path frame_map_path(const fs::path& dir, const std::string& video_id, int frame) {
    fs::path fmap = dir / feature_file_name(video_id, frame);
    if (fs::exists(fmap)) return fmap;
    fs::path pgm = fmap;
    pgm.replace_extension(".pgm");
    if (fs::exists(pgm)) return pgm;
    throw InputError("missing map file " + fmap.string());
}

// Contiguous frame indices 0..n-1 for <video>_*.fmap / .pgm files in dir.
int count_frame_files(const fs::path& dir, const std::string& video_id) {
    int n = 0;
    while (frame_file_exists(dir, video_id, n)) ++n;
    return n;
}

void write_csv_line(std::ofstream& os, const std::string& video, const std::string& model,
                    const std::string& metric, double mean, double stddev, size_t frames) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.5f,%.5f,%zu\n", video.c_str(), model.c_str(),
                  metric.c_str(), mean, stddev, frames);
    os << buf;
}

} // namespace

std::string feature_file_name(const std::string& video_id, int frame_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%06d.fmap", frame_index);
    return video_id + buf;
}

void cmd_extract(const ExtractOptions& opt) {
    DatasetManifest manifest = load_manifest(opt.manifest);
    ChannelConfig channels = channel_config_from_name(opt.channels);
    fs::create_directories(opt.out_dir);

    for (const auto& entry : manifest.entries) {
        FrameSequence seq = load_frame_sequence(entry.frame_dir, entry.video_id);
        if (seq.width != entry.width || seq.height != entry.height)
            throw InputError("manifest dimensions disagree with frames for " + entry.video_id);
        parallel_for(seq.frames.size(), opt.workers, [&](size_t f) {
            PlaneStack features =
                compose_features(channels, seq, static_cast<int>(f), opt.flow);
            write_plane_stack(features,
                              opt.out_dir / feature_file_name(entry.video_id,
                                                              static_cast<int>(f)));
        });
    }
}

void cmd_sample(const SampleOptions& opt) {
    DatasetManifest manifest = load_manifest(opt.manifest);
    FeatureSource source;
    source.frame_count = [&](const ManifestEntry& e) {
        int n = count_frame_files(opt.features_dir, e.video_id);
        if (n == 0)
            throw InputError("no feature stacks for video '" + e.video_id + "' in " +
                             opt.features_dir.string());
        return n;
    };
    source.stack = [&](const ManifestEntry& e, int frame) {
        PlaneStack s =
            read_plane_stack(opt.features_dir / feature_file_name(e.video_id, frame));
        if (s.width() != e.width || s.height() != e.height)
            throw InputError("feature stack dimensions disagree with manifest for " +
                             e.video_id);
        return s;
    };
    auto records = assemble_patch_dataset(manifest, opt.sampler, source);
    fs::create_directories(opt.out_dir);
    write_patch_dataset(records, opt.out_dir);
}

cnn::TrainReport cmd_train(const TrainOptions& opt) {
    auto records = read_patch_dataset(opt.dataset_dir);
    if (records.empty()) throw InputError("empty patch dataset in " + opt.dataset_dir.string());
    const int t = records.front().data.width();
    const int c = records.front().data.channels();

    auto [train_set, val_set] = cnn::split_train_val(records, opt.val_fraction, opt.solver.seed);

    cnn::NetworkModel model;
    cnn::SolverState state;
    if (opt.resume) {
        auto loaded = cnn::load_model(*opt.resume);
        model = std::move(loaded.model);
        if (loaded.state) state = std::move(*loaded.state);
        if (model.input_shape.h != t || model.input_shape.c != c)
            throw InputError("resume checkpoint does not match dataset patches");
    } else if (!opt.arch.empty()) {
        model = cnn::build_network({t, t, c}, cnn::parse_arch(opt.arch), opt.solver.seed);
        model.channel_config = opt.channels;
        model.input_mean = cnn::channel_means(train_set);
    } else {
        model = cnn::make_default_network(t, c, opt.solver.seed);
        model.channel_config = opt.channels;
        model.input_mean = cnn::channel_means(train_set);
    }

    cnn::TrainReport report = cnn::train(model, train_set, val_set, opt.solver, &state);

    cnn::save_model(model, opt.out_model, &state);
    fs::path report_path = opt.report_csv.empty()
                               ? fs::path(opt.out_model.string() + ".report.csv")
                               : opt.report_csv;
    cnn::write_train_report(report, report_path);
    return report;
}

void cmd_predict(const PredictOptions& opt) {
    auto loaded = cnn::load_model(opt.model_file);
    const cnn::NetworkModel& model = loaded.model;
    ChannelConfig channels = channel_config_from_name(
        model.channel_config.empty() ? "3k" : model.channel_config);
    if (channels.channel_count != model.input_shape.c)
        throw InputError("checkpoint channel config does not match its input shape");
    const int t = model.patch_size();

    DatasetManifest manifest = load_manifest(opt.manifest);
    fs::create_directories(opt.out_dir);
    for (const auto& entry : manifest.entries) {
        FrameSequence seq = load_frame_sequence(entry.frame_dir, entry.video_id);
        parallel_for(seq.frames.size(), opt.workers, [&](size_t f) {
            PlaneStack features =
                compose_features(channels, seq, static_cast<int>(f), opt.flow);
            SaliencyMap map = predict_dense_map(model, features, t);
            fs::path out = opt.out_dir / feature_file_name(entry.video_id, static_cast<int>(f));
            write_plane_stack(to_planes(map.values), out);
            if (opt.export_pgm) {
                fs::path pgm = out;
                pgm.replace_extension(".pgm");
                write_pgm(map.values, pgm);
            }
        });
    }
}

void cmd_evaluate(const EvaluateOptions& opt) {
    if (opt.model_dirs.empty()) throw InputError("evaluate: no model map directories");
    DatasetManifest manifest = load_manifest(opt.manifest);

    struct Row {
        std::string video, model, metric;
        double mean, stddev;
        size_t frames;
    };
    std::vector<Row> rows;
    std::vector<PairwiseDelta> all_deltas;
    // (model, metric) -> per-frame values across all videos, for ALL rows.
    std::map<std::pair<std::string, std::string>, std::vector<double>> pooled;
    std::map<std::string, std::vector<double>> pooled_auc;

    for (const auto& entry : manifest.entries) {
        FixationLog log = load_fixations(entry.fixation_file, entry.width, entry.height);

        int n_frames = -1;
        for (const auto& [name, dir] : opt.model_dirs) {
            int n = count_frame_files(dir, entry.video_id);
            if (n == 0)
                throw InputError("no maps for video '" + entry.video_id + "' under " +
                                 dir.string());
            if (n_frames == -1)
                n_frames = n;
            else if (n != n_frames)
                throw InputError("misaligned map counts for video '" + entry.video_id + "'");
        }

        std::vector<std::vector<std::pair<int, int>>> fixations(n_frames);
        for (int f = 0; f < n_frames; ++f) fixations[f] = log.points_for(entry.video_id, f);

        std::map<std::string, std::vector<Image<double>>> maps;
        for (const auto& [name, dir] : opt.model_dirs) {
            auto& v = maps[name];
            v.resize(n_frames);
            const fs::path& d = dir;
            parallel_for(static_cast<size_t>(n_frames), opt.workers, [&](size_t f) {
                v[f] = load_map_file(
                    frame_map_path(d, entry.video_id, static_cast<int>(f)));
            });
        }

        for (const auto& metric : opt.metrics) {
            if (metric == "auc") {
                ModelComparison cmp = compare_models(maps, fixations, entry.video_id);
                for (const auto& r : cmp.per_model) {
                    rows.push_back({r.video_id, r.model, "auc", r.mean(), r.stddev(),
                                    r.per_frame.size()});
                    auto& pool = pooled_auc[r.model];
                    pool.insert(pool.end(), r.per_frame.begin(), r.per_frame.end());
                }
                continue;
            }
            double sigma = opt.sigma_px > 0 ? opt.sigma_px : default_sigma_px(entry.width);
            for (const auto& [name, model_maps] : maps) {
                std::vector<double> values;
                for (int f = 0; f < n_frames; ++f) {
                    if (fixations[f].empty()) continue;
                    if (metric == "nss") {
                        values.push_back(nss(model_maps[f], fixations[f]));
                    } else if (metric == "pcc") {
                        std::vector<std::pair<double, double>> pts(fixations[f].begin(),
                                                                   fixations[f].end());
                        FixationMap wooding =
                            build_wooding_map(pts, entry.width, entry.height, sigma);
                        values.push_back(pcc(model_maps[f], wooding.values));
                    } else {
                        throw InputError("unknown metric '" + metric + "'");
                    }
                }
                EvalResult r;
                r.per_frame = values;
                rows.push_back({entry.video_id, name, metric, r.mean(), r.stddev(),
                                values.size()});
                auto& pool = pooled[{name, metric}];
                pool.insert(pool.end(), values.begin(), values.end());
            }
        }
    }

    // Aggregate rows over every evaluated frame, plus pairwise AUC deltas.
    for (const auto& [model, values] : pooled_auc) {
        EvalResult r;
        r.per_frame = values;
        rows.push_back({"ALL", model, "auc", r.mean(), r.stddev(), values.size()});
    }
    for (const auto& [key, values] : pooled) {
        EvalResult r;
        r.per_frame = values;
        rows.push_back({"ALL", key.first, key.second, r.mean(), r.stddev(), values.size()});
    }
    {
        std::vector<std::string> names;
        for (const auto& [name, dir] : opt.model_dirs) names.push_back(name);
        for (size_t a = 0; a < names.size(); ++a)
            for (size_t b = a + 1; b < names.size(); ++b) {
                const auto& va = pooled_auc[names[a]];
                const auto& vb = pooled_auc[names[b]];
                if (va.size() != vb.size() || va.empty()) continue;
                double sum = 0;
                for (size_t i = 0; i < va.size(); ++i) sum += va[i] - vb[i];
                all_deltas.push_back({names[a], names[b], sum / static_cast<double>(va.size())});
            }
    }

    fs::path csv_path = fs::path(opt.out_prefix.string() + ".csv");
    std::ofstream csv(csv_path);
    if (!csv) throw InputError("cannot write " + csv_path.string());
    csv << "video_id,model,metric,mean,std,frames\n";
    for (const auto& r : rows) write_csv_line(csv, r.video, r.model, r.metric, r.mean, r.stddev, r.frames);

    std::ofstream pw(opt.out_prefix.string() + "_pairwise.csv");
    pw << "model_a,model_b,metric,mean_delta\n";
    char buf[256];
    for (const auto& d : all_deltas) {
        std::snprintf(buf, sizeof buf, "%s,%s,auc,%.5f\n", d.model_a.c_str(), d.model_b.c_str(),
                      d.mean_delta);
        pw << buf;
    }

    std::ofstream txt(opt.out_prefix.string() + ".txt");
    txt << "saliency evaluation (AUC-fix: fixated pixels vs all others)\n\n";
    std::snprintf(buf, sizeof buf, "%-12s %-12s %-6s %-9s %-9s %s\n", "video", "model", "metric",
                  "mean", "std", "frames");
    txt << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-12s %-12s %-6s %-9.5f %-9.5f %zu\n", r.video.c_str(),
                      r.model.c_str(), r.metric.c_str(), r.mean, r.stddev, r.frames);
        txt << buf;
    }
    if (!all_deltas.empty()) {
        txt << "\npairwise mean improvement (auc, over all frames)\n";
        for (const auto& d : all_deltas) {
            std::snprintf(buf, sizeof buf, "  %s - %s: %+.5f\n", d.model_a.c_str(),
                          d.model_b.c_str(), d.mean_delta);
            txt << buf;
        }
    }
}

} // namespace salnet::pipeline
