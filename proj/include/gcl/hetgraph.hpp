#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcl/tensor.hpp"

namespace gcl {

// One meta-path based subgraph as a symmetric CSR adjacency: neighbor lists
// sorted ascending, duplicate-free, no self loops stored.
struct MetaPathSubgraph {
    std::string name;
    int relation_id = 0;
    std::vector<int> indptr;   // size num_nodes + 1
    std::vector<int> indices;

    std::size_t num_nodes() const { return indptr.empty() ? 0 : indptr.size() - 1; }
    std::size_t num_edges() const { return indices.size() / 2; }  // undirected
    int degree(int i) const { return indptr[i + 1] - indptr[i]; }
    bool has_edge(int u, int v) const;
};

enum class Split : std::int8_t { kNone = -1, kTrain = 0, kVal = 1, kTest = 2 };

struct HeteroGraph {
    std::size_t num_nodes = 0;
    std::size_t feature_dim = 0;
    Tensor features;  // (N x F)
    std::vector<MetaPathSubgraph> metapaths;
    std::vector<int> labels;        // size N or empty; -1 = unlabeled
    std::vector<Split> splits;      // size N or empty
    std::vector<int> id_map;        // original id of node i when densified
    std::vector<std::string> load_warnings;

    bool has_labels() const;
    bool has_splits() const { return !splits.empty(); }
    int num_classes() const;  // max label + 1
    void validate() const;    // throws on any broken invariant
};

// Builds a validated CSR subgraph from an undirected edge list: self loops
// dropped (reported through warnings when given), duplicates merged,
// symmetrized, neighbor lists sorted.
MetaPathSubgraph build_subgraph(std::string name, int relation_id, std::size_t num_nodes,
                                const std::vector<std::pair<int, int>>& edges,
                                std::vector<std::string>* warnings = nullptr);

// Dataset directory format: graph.meta (JSON) + features.tsv + edge files +
// optional labels.tsv / splits.tsv. Sparse node ids are densified by first
// appearance in file order; the mapping is kept on the returned graph.
HeteroGraph load_dataset(const std::string& dir_path);
void save_dataset(const std::string& dir_path, const HeteroGraph& g);

struct MetaPathSpec {
    std::string name;
    bool tree = false;
    double p_intra = 0.0;
    double p_inter = 0.0;
    double noise_p = 0.0;  // extra random edges for tree subgraphs
};

struct SynthSpec {
    std::size_t num_nodes = 0;
    std::size_t num_classes = 2;
    std::size_t feature_dim = 16;
    std::uint64_t seed = 0;
    double mean_scale = 1.0;
    double noise_std = 1.0;
    std::vector<MetaPathSpec> metapaths;
    double train_frac = 0.1;
    double val_frac = 0.1;
};

SynthSpec parse_synth_spec(const std::string& json_path);

// Planted-partition generator: class-correlated SBM subgraphs plus optional
// balanced-tree subgraphs; features are class means plus Gaussian noise.
// Deterministic for a fixed spec.
HeteroGraph generate_synthetic(const SynthSpec& spec);

struct HyperbolicityResult {
    double delta = 0.0;
    bool degenerate = false;      // largest component has < 4 nodes
    std::size_t component_size = 0;
};

// Gromov delta by the exact four-point condition over the largest connected
// component (unweighted BFS distances). Throws if the component exceeds cap.
HyperbolicityResult gromov_hyperbolicity(const MetaPathSubgraph& sub, std::size_t cap = 2000);

}  // namespace gcl
