#ifndef SALNET_PIPELINE_HPP
#define SALNET_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salnet/dataset_io.hpp"
#include "salnet/motion_features.hpp"
#include "salnet/patch_sampler.hpp"
#include "salnet/solver.hpp"

namespace salnet {

// Input-channel configuration. Motion, when present, is always the last
// channel.
struct ChannelConfig {
    std::string name;   // 3k | 4k | 8k | rgb8k | hsv8k
    int channel_count = 0;
    bool use_rgb = false;
    bool use_hsv = false;       // hue, saturation, value = max(R,G,B)
    bool use_contrasts = false; // V1..V7
    bool use_motion = false;    // normalized residual-motion magnitude
};

ChannelConfig channel_config_from_name(const std::string& name);

// Feature stack of one frame under a channel configuration. The first frame
// of a sequence gets a zero motion channel.
PlaneStack compose_features(const ChannelConfig& config, const FrameSequence& seq,
                            int frame_index, const FlowParams& flow = {});

// INI-style config: [channels] name; [sampler] t/epsilon/...; [arch] layers;
// [solver] learning_rate/...; [run] workers. CLI flags override file values.
struct PipelineConfig {
    std::string channels = "4k";
    SamplerConfig sampler;
    std::string arch; // layer DSL; empty selects the default architecture
    cnn::SolverConfig solver;
    double val_fraction = 0.2;
    int workers = 1;
    FlowParams flow;
};

PipelineConfig load_pipeline_config(const std::filesystem::path& file);

// Raw INI access used by load_pipeline_config and tests.
std::map<std::string, std::map<std::string, std::string>>
parse_ini(const std::filesystem::path& file);

namespace pipeline {

// Feature file name: <video>_<frame %06d>.fmap.
std::string feature_file_name(const std::string& video_id, int frame_index);

struct ExtractOptions {
    std::filesystem::path manifest;
    std::string channels = "4k";
    std::filesystem::path out_dir;
    int workers = 1;
    FlowParams flow;
};
void cmd_extract(const ExtractOptions&);

struct SampleOptions {
    std::filesystem::path manifest;
    std::filesystem::path features_dir;
    std::filesystem::path out_dir;
    SamplerConfig sampler;
};
void cmd_sample(const SampleOptions&);

struct TrainOptions {
    std::filesystem::path dataset_dir;
    std::filesystem::path out_model;
    std::filesystem::path report_csv; // empty: <out_model>.report.csv
    std::optional<std::filesystem::path> resume;
    cnn::SolverConfig solver;
    std::string arch;     // empty: default architecture for the patch size
    std::string channels; // recorded into the checkpoint
    double val_fraction = 0.2;
};
cnn::TrainReport cmd_train(const TrainOptions&);

struct PredictOptions {
    std::filesystem::path model_file;
    std::filesystem::path manifest;
    std::filesystem::path out_dir;
    int workers = 1;
    FlowParams flow;
    bool export_pgm = true;
};
void cmd_predict(const PredictOptions&);

struct EvaluateOptions {
    std::filesystem::path manifest;
    // (model name, directory of <video>_<frame>.fmap/.pgm maps)
    std::vector<std::pair<std::string, std::filesystem::path>> model_dirs;
    std::filesystem::path out_prefix; // writes <prefix>.csv, .txt, _pairwise.csv
    std::vector<std::string> metrics = {"auc"};
    double sigma_px = 0; // wooding spread for pcc; 0 = 2% of width
    int workers = 1;
};
void cmd_evaluate(const EvaluateOptions&);

} // namespace pipeline

} // namespace salnet

#endif
