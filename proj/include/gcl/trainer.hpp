#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcl/adam.hpp"
#include "gcl/augment.hpp"
#include "gcl/contrast.hpp"
#include "gcl/encoders.hpp"

namespace gcl {

struct TrainConfig {
    double lr = 1e-3;
    double weight_decay = 0.0;
    std::size_t dim = 64;
    std::size_t epochs_max = 200;
    std::size_t patience = 20;
    double beta = 0.0;    // weight of loss_node
    double lambda = 0.0;  // weight of loss_rel
    double gamma = 0.0;   // weight of loss_reg
    std::size_t sample_size = 1000;
    double view1_p_a = 0.0, view1_p_e = 0.0;
    double view2_p_a = 0.0, view2_p_e = 0.0;
    double dropout = 0.5;
    double curvature = 1.0;
    std::uint64_t seed = 0;
    std::size_t eval_every = 0;  // > 0 enables probe-based early stopping when labels exist
    std::string dataset_dir;
    std::string out_dir;
    std::size_t layers = 1;  // not a config-file key; programmatic only

    // flat key=value text, '#' starts a comment; unknown keys are errors
    static TrainConfig from_file(const std::string& path);
    void validate() const;
    EncoderConfig encoder_config() const;
};

struct EpochLosses {
    double total = 0, lg = 0, node = 0, rel = 0, reg = 0;
};

struct TrainReport {
    std::vector<EpochLosses> losses;
    std::size_t best_epoch = 0;
    double best_monitor = 0;
    double wall_time_sec = 0;
    std::string checkpoint_path;
    std::string monitor;  // "loss" or "val_probe"
    bool aborted_nonfinite = false;

    std::string to_json() const;
};

// Everything one epoch's loss depends on besides the parameters: the two
// stochastic views, the sampled triples, the feature-shuffle permutation and
// the dropout stream. Fixing a context makes the loss a deterministic
// function of the parameters (used by the finite-difference checks).
struct EpochContext {
    GraphView view1, view2;
    TripleBatch batch;
    bool has_batch = false;
    std::vector<int> shuffle_perm;
    std::uint64_t dropout_seed = 0;
    bool training = true;
};

EpochContext make_epoch_context(const HeteroGraph& g, const TrainConfig& cfg, std::size_t epoch);

struct LossParts {
    Tensor total, lg, node, rel, reg;
};

LossParts compute_losses(const EpochContext& ctx, const EncoderParams& enc,
                         const DiscrParams& discr, const TrainConfig& cfg);

// Glorot-uniform weights, zero biases, attention queries at small uniform
// noise (1e-2) to break the softmax symmetry; deterministic per seed.
void init_params(std::size_t feature_dim, std::size_t num_paths, const TrainConfig& cfg,
                 EncoderParams& enc, DiscrParams& discr);

struct InferenceEmbeddings {
    Tensor h_ult;                   // (N x d)
    std::vector<Tensor> path_ult;   // per meta-path
};

// Clean-graph, dropout-free forward through both encoders.
InferenceEmbeddings inference_embeddings(const HeteroGraph& g, const EncoderParams& enc,
                                         const TrainConfig& cfg);

struct TrainResult {
    EncoderParams enc;
    DiscrParams discr;
    Tensor h_ult;
    TrainReport report;
};

TrainResult train(const HeteroGraph& g, const TrainConfig& cfg);

void write_embeddings_tsv(const std::string& path, const Tensor& h);
Tensor read_embeddings_tsv(const std::string& path);

}  // namespace gcl
