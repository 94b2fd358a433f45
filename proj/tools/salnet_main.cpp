// salnet: video saliency prediction pipeline.
//
// Subcommands mirror the five pipeline stages: extract feature stacks,
// sample labeled patches, train the classifier, predict dense saliency maps,
// evaluate maps against gaze fixations.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "salnet/error.hpp"
#include "salnet/pipeline.hpp"

using namespace salnet;

namespace {

struct Cli {
    std::string config_file;
    PipelineConfig cfg;

    // extract / predict / evaluate
    std::string manifest, out, channels, features, dataset, model, report, resume;
    std::vector<std::string> maps;
    std::vector<std::string> metrics;
    int workers = 0;
    bool no_pgm = false;
};

cnn::Strategy parse_strategy(const std::string& s) {
    if (s == "per_epoch_full_pass") return cnn::Strategy::per_epoch_full_pass;
    if (s == "fixed_chunk") return cnn::Strategy::fixed_chunk;
    throw InputError("unknown strategy '" + s + "'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"salnet - video saliency prediction pipeline"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    Cli cli;
    app.add_option("--config", cli.config_file, "INI config file")
        ->envname("SALNET_CONFIG")
        ->check(CLI::ExistingFile);
    app.add_option("--workers", cli.workers, "worker threads for per-frame stages")
        ->envname("SALNET_WORKERS");

    uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "seed for sampling and training")
                         ->envname("SALNET_SEED");

    auto* extract = app.add_subcommand("extract", "compute per-frame feature stacks");
    extract->add_option("--manifest", cli.manifest, "dataset manifest")->required();
    extract->add_option("--out", cli.out, "output directory")->required();
    auto* extract_channels = extract->add_option("--channels", cli.channels,
                                                 "3k|4k|8k|rgb8k|hsv8k");

    auto* sample = app.add_subcommand("sample", "extract labeled patches");
    sample->add_option("--manifest", cli.manifest, "dataset manifest")->required();
    sample->add_option("--features", cli.features, "directory from `extract`")->required();
    sample->add_option("--out", cli.out, "patch dataset directory")->required();
    int t = 0, relax_depth = -1, max_salient = 0, nonsalient = -1;
    double epsilon = 0, sigma_px = -1;
    bool no_balance = false;
    auto* t_opt = sample->add_option("--t", t, "patch side in pixels");
    auto* eps_opt = sample->add_option("--epsilon", epsilon, "threshold relaxation factor");
    auto* j_opt = sample->add_option("--relax-depth", relax_depth, "relaxation depth J");
    auto* ms_opt = sample->add_option("--max-salient", max_salient, "salient patches per frame");
    auto* ns_opt = sample->add_option("--nonsalient-per-frame", nonsalient,
                                      "non-salient patches per frame (0: match salient)");
    auto* sg_opt = sample->add_option("--sigma-px", sigma_px, "wooding spread in pixels");
    sample->add_flag("--no-balance", no_balance, "keep unbalanced classes");

    auto* train = app.add_subcommand("train", "train the patch classifier");
    train->add_option("--dataset", cli.dataset, "patch dataset directory")->required();
    train->add_option("--out", cli.model, "output checkpoint")->required();
    train->add_option("--report", cli.report, "accuracy CSV (default <out>.report.csv)");
    train->add_option("--resume", cli.resume, "checkpoint to continue from");
    auto* train_channels = train->add_option("--channels", cli.channels,
                                             "channel config recorded in the checkpoint");
    double lr = 0, momentum = -1, val_fraction = -1;
    long max_iterations = 0, validation_interval = 0;
    int batch = 0, epochs = 0;
    std::string strategy, arch;
    auto* lr_opt = train->add_option("--lr", lr, "base learning rate");
    auto* mom_opt = train->add_option("--momentum", momentum, "SGD momentum");
    auto* batch_opt = train->add_option("--batch", batch, "batch size");
    auto* epochs_opt = train->add_option("--epochs", epochs, "epochs");
    auto* maxit_opt = train->add_option("--max-iterations", max_iterations, "iteration cap");
    auto* vi_opt = train->add_option("--validation-interval", validation_interval,
                                     "iterations between validations (fixed_chunk)");
    auto* strat_opt =
        train->add_option("--strategy", strategy, "per_epoch_full_pass|fixed_chunk");
    auto* arch_opt = train->add_option("--arch", arch, "layer DSL, e.g. conv:5x5x12:s1,...");
    auto* vf_opt = train->add_option("--val-fraction", val_fraction, "held-out fraction");

    auto* predict = app.add_subcommand("predict", "build dense saliency maps");
    predict->add_option("--model", cli.model, "trained checkpoint")->required();
    predict->add_option("--manifest", cli.manifest, "dataset manifest")->required();
    predict->add_option("--out", cli.out, "output directory")->required();
    predict->add_flag("--no-pgm", cli.no_pgm, "skip PGM export");

    auto* evaluate = app.add_subcommand("evaluate", "score maps against gaze fixations");
    evaluate->add_option("--manifest", cli.manifest, "dataset manifest")->required();
    evaluate
        ->add_option("--maps", cli.maps,
                     "name=dir of saliency maps; repeat for model comparison")
        ->required();
    evaluate->add_option("--out", cli.out, "report prefix (writes .csv/.txt/_pairwise.csv)")
        ->required();
    evaluate->add_option("--metric", cli.metrics, "auc|nss|pcc (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!cli.config_file.empty()) cli.cfg = load_pipeline_config(cli.config_file);
        PipelineConfig& cfg = cli.cfg;
        if (cli.workers > 0) cfg.workers = cli.workers;
        if (*seed_opt) {
            cfg.sampler.seed = seed;
            cfg.solver.seed = seed;
        }

        if (*extract) {
            pipeline::ExtractOptions opt;
            opt.manifest = cli.manifest;
            opt.out_dir = cli.out;
            opt.channels = *extract_channels ? cli.channels : cfg.channels;
            opt.workers = cfg.workers;
            opt.flow = cfg.flow;
            pipeline::cmd_extract(opt);
        } else if (*sample) {
            pipeline::SampleOptions opt;
            opt.manifest = cli.manifest;
            opt.features_dir = cli.features;
            opt.out_dir = cli.out;
            opt.sampler = cfg.sampler;
            if (*t_opt) opt.sampler.t = t;
            if (*eps_opt) opt.sampler.epsilon = epsilon;
            if (*j_opt) opt.sampler.relax_depth = relax_depth;
            if (*ms_opt) opt.sampler.max_salient_per_frame = max_salient;
            if (*ns_opt) opt.sampler.nonsalient_per_frame = nonsalient;
            if (*sg_opt) opt.sampler.sigma_px = sigma_px;
            if (no_balance) opt.sampler.balance = false;
            pipeline::cmd_sample(opt);
        } else if (*train) {
            pipeline::TrainOptions opt;
            opt.dataset_dir = cli.dataset;
            opt.out_model = cli.model;
            if (!cli.report.empty()) opt.report_csv = cli.report;
            if (!cli.resume.empty()) opt.resume = cli.resume;
            opt.solver = cfg.solver;
            opt.arch = *arch_opt ? arch : cfg.arch;
            opt.channels = *train_channels ? cli.channels : cfg.channels;
            opt.val_fraction = cfg.val_fraction;
            if (*lr_opt) opt.solver.learning_rate = lr;
            if (*mom_opt) opt.solver.momentum = momentum;
            if (*batch_opt) opt.solver.batch_size = batch;
            if (*epochs_opt) opt.solver.epochs = epochs;
            if (*maxit_opt) opt.solver.max_iterations = max_iterations;
            if (*vi_opt) opt.solver.validation_interval = validation_interval;
            if (*strat_opt) opt.solver.strategy = parse_strategy(strategy);
            if (*vf_opt) opt.val_fraction = val_fraction;
            cnn::TrainReport report = pipeline::cmd_train(opt);
            std::printf("best accuracy %.4f at iteration %ld (%ld iterations, %.1fs)\n",
                        report.best_accuracy, report.best_iteration, report.iterations_run,
                        report.wall_time_sec);
        } else if (*predict) {
            pipeline::PredictOptions opt;
            opt.model_file = cli.model;
            opt.manifest = cli.manifest;
            opt.out_dir = cli.out;
            opt.workers = cfg.workers;
            opt.flow = cfg.flow;
            opt.export_pgm = !cli.no_pgm;
            pipeline::cmd_predict(opt);
        } else if (*evaluate) {
            pipeline::EvaluateOptions opt;
            opt.manifest = cli.manifest;
            opt.out_prefix = cli.out;
            if (!cli.metrics.empty()) opt.metrics = cli.metrics;
            opt.sigma_px = cfg.sampler.sigma_px;
            opt.workers = cfg.workers;
            for (const auto& m : cli.maps) {
                size_t eq = m.find('=');
                if (eq == std::string::npos)
                    throw InputError("--maps wants name=dir, got '" + m + "'");
                opt.model_dirs.emplace_back(m.substr(0, eq), m.substr(eq + 1));
            }
            pipeline::cmd_evaluate(opt);
        }
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
