#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gcl/checkpoint.hpp"
#include "gcl/evalkit.hpp"
#include "gcl/hetgraph.hpp"
#include "gcl/selftest.hpp"
#include "gcl/trainer.hpp"

namespace fs = std::filesystem;

namespace {

// Rebuilds the parameter structure (paths, layers, dims) from the names and
// shapes stored in a checkpoint.
void params_from_checkpoint(const std::string& path, gcl::TrainConfig& cfg,
                            std::size_t& feature_dim, std::size_t& num_paths) {
    const auto table = gcl::peek_checkpoint(path);
    num_paths = 0;
    cfg.layers = 0;
    for (const auto& [name, shape] : table) {
        if (name.rfind("enc.path", 0) == 0) {
            const std::size_t dot = name.find('.', 8);
            num_paths = std::max(num_paths, std::stoul(name.substr(8, dot - 8)) + 1);
        }
        const std::size_t w1 = name.find(".w1.");
        if (w1 != std::string::npos)
            cfg.layers = std::max(cfg.layers, std::stoul(name.substr(w1 + 4)) + 1);
        if (name == "enc.path0.w1.0") feature_dim = shape[0];
        if (name == "proj.w1") cfg.dim = shape[0];
    }
    if (num_paths == 0 || cfg.layers == 0)
        throw std::runtime_error("checkpoint does not look like a trained model: " + path);
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
    gcl::SynthSpec spec = gcl::parse_synth_spec(spec_path);
    gcl::HeteroGraph g = gcl::generate_synthetic(spec);
    gcl::save_dataset(out_dir, g);
    std::printf("wrote dataset: %zu nodes, %zu meta-paths -> %s\n", g.num_nodes,
                g.metapaths.size(), out_dir.c_str());
    return 0;
}

int cmd_train(const std::string& config_path) {
    gcl::TrainConfig cfg = gcl::TrainConfig::from_file(config_path);
    if (cfg.dataset_dir.empty()) throw std::runtime_error("config: dataset_dir is required");
    if (cfg.out_dir.empty()) throw std::runtime_error("config: out_dir is required");
    gcl::HeteroGraph g = gcl::load_dataset(cfg.dataset_dir);
    gcl::TrainResult res = gcl::train(g, cfg);
    std::printf("trained %zu epochs (best %zu, monitor=%s); outputs in %s\n",
                res.report.losses.size(), res.report.best_epoch, res.report.monitor.c_str(),
                cfg.out_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& emb_path, const std::string& dataset_dir, const std::string& out,
             std::size_t runs, std::uint64_t seed) {
    gcl::HeteroGraph g = gcl::load_dataset(dataset_dir);
    gcl::Tensor h = gcl::read_embeddings_tsv(emb_path);
    if (h.rows() != g.num_nodes)
        throw std::runtime_error("eval: embeddings rows do not match dataset nodes");
    gcl::EvalReport rep = gcl::evaluate(h, g, runs, seed);
    const std::string text = rep.to_json();
    std::ofstream(out) << text << "\n";
    std::printf("%s\n", text.c_str());
    return 0;
}

int cmd_embed(const std::string& ckpt_path, const std::string& dataset_dir,
              const std::string& out, double curvature) {
    gcl::HeteroGraph g = gcl::load_dataset(dataset_dir);
    gcl::TrainConfig cfg;
    cfg.curvature = curvature;
    std::size_t feature_dim = 0, num_paths = 0;
    params_from_checkpoint(ckpt_path, cfg, feature_dim, num_paths);
    if (feature_dim != g.feature_dim)
        throw std::runtime_error("embed: checkpoint feature dim does not match dataset");
    if (num_paths != g.metapaths.size())
        throw std::runtime_error("embed: checkpoint meta-path count does not match dataset");
    gcl::EncoderParams enc;
    gcl::DiscrParams discr;
    gcl::init_params(feature_dim, num_paths, cfg, enc, discr);
    gcl::ParamSet ps;
    enc.collect(ps);
    discr.collect(ps);
    gcl::load_checkpoint(ckpt_path, ps);
    gcl::InferenceEmbeddings emb = gcl::inference_embeddings(g, enc, cfg);
    gcl::write_embeddings_tsv(out, emb.h_ult);
    std::printf("wrote %zu x %zu embeddings -> %s\n", emb.h_ult.rows(), emb.h_ult.cols(),
                out.c_str());
    return 0;
}

int cmd_hyperbolicity(const std::string& dataset_dir, std::size_t cap) {
    gcl::HeteroGraph g = gcl::load_dataset(dataset_dir);
    for (const auto& mp : g.metapaths) {
        gcl::HyperbolicityResult r = gcl::gromov_hyperbolicity(mp, cap);
        if (r.degenerate)
            std::printf("%s: δ=0 (degenerate: largest component has %zu nodes)\n",
                        mp.name.c_str(), r.component_size);
        else
            std::printf("%s: δ=%g (component of %zu nodes)\n", mp.name.c_str(), r.delta,
                        r.component_size);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geometry contrastive learning on heterogeneous graphs"};
    app.require_subcommand(1);

    std::string spec_path, out_dir;
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset directory");
    synth->add_option("--spec", spec_path, "synthetic spec (JSON)")->required();
    synth->add_option("--out", out_dir, "output dataset directory")->required();

    std::string config_path;
    auto* train = app.add_subcommand("train", "train on a dataset per a config file");
    train->add_option("--config", config_path, "key=value config file")->required();

    std::string emb_path, dataset_dir, eval_out = "eval_report.json";
    std::size_t runs = 50;
    std::uint64_t seed = 0;
    auto* eval = app.add_subcommand("eval", "evaluate frozen embeddings");
    eval->add_option("--embeddings", emb_path, "embeddings TSV")->required();
    eval->add_option("--dataset", dataset_dir, "dataset directory")->required();
    eval->add_option("--out", eval_out, "output report path (JSON)");
    eval->add_option("--runs", runs, "probe / k-means repetitions");
    eval->add_option("--seed", seed, "evaluation seed");

    std::string ckpt_path, embed_out = "embeddings.tsv";
    double curvature = 1.0;
    auto* embed = app.add_subcommand("embed", "re-emit embeddings from a checkpoint");
    embed->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
    embed->add_option("--dataset", dataset_dir, "dataset directory")->required();
    embed->add_option("--out", embed_out, "output embeddings TSV");
    embed->add_option("--curvature", curvature, "ball curvature used at training time");

    std::size_t cap = 2000;
    auto* hyp = app.add_subcommand("hyperbolicity", "print Gromov δ per meta-path");
    hyp->add_option("--dataset", dataset_dir, "dataset directory")->required();
    hyp->add_option("--cap", cap, "largest component size accepted by the exact scan");

    bool quiet = false;
    auto* self = app.add_subcommand("selftest", "run the built-in invariant suite");
    self->add_flag("--quiet", quiet, "print failures only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(spec_path, out_dir);
        if (train->parsed()) return cmd_train(config_path);
        if (eval->parsed()) return cmd_eval(emb_path, dataset_dir, eval_out, runs, seed);
        if (embed->parsed()) return cmd_embed(ckpt_path, dataset_dir, embed_out, curvature);
        if (hyp->parsed()) return cmd_hyperbolicity(dataset_dir, cap);
        if (self->parsed()) return gcl::selftest(!quiet) == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
