#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geompnn/features.hpp"
#include "geompnn/graph.hpp"
#include "geompnn/mesh.hpp"
#include "geompnn/tape.hpp"
#include "geompnn/tensor.hpp"

namespace geompnn {

/// Model families: the pointwise MLP and volume-graph GNN baselines, the
/// surface-to-volume message passer, and its variant with interleaved
/// volume-volume message-passing layers.
enum class ModelKind { PointwiseMlp, VolumeGnn, Surf2Vol, Surf2VolGnn };

const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view name);  // throws data_error

/// Architecture hyperparameters. Defaults: hidden width 128, MLPs with two
/// hidden layers, four surface-encoder layers (radius 0.05, max degree 8),
/// four surface-to-volume layers with k = 8 neighbors, volume radius graphs
/// with radius 0.05 and max degree 4 for the GNN baselines.
struct ArchConfig {
  ModelKind kind = ModelKind::Surf2Vol;
  std::size_t hidden = 128;
  std::size_t mlp_depth = 2;    // hidden layers per MLP block
  std::size_t surf_layers = 4;  // surface-encoder message-passing layers
  std::size_t s2v_layers = 4;   // surface-to-volume layers
  std::size_t vol_layers = 4;   // VolumeGnn only; Surf2VolGnn interleaves s2v_layers - 1
  std::size_t k_neighbors = 8;  // surface neighbors per volume point
  double surf_radius = 0.05;
  std::size_t surf_max_degree = 8;
  double vol_radius = 0.05;
  std::size_t vol_max_degree = 4;
};

/// One named weight or bias matrix.
struct NamedParam {
  std::string name;
  Tensor value;
};

/// Indices into ModelParams::blocks for one MLP (depth hidden layers with
/// GELU, then a linear output layer).
struct MlpRef {
  std::vector<std::size_t> w;
  std::vector<std::size_t> b;
};

/// Per-layer message-passing parameters: an edge-update MLP acting on
/// [z_src, z_dst, e] and a node-update MLP acting on [z, m].
struct LayerRef {
  MlpRef edge;
  MlpRef node;
};

/// Full parameter set plus the configuration a checkpoint must carry to run
/// standalone inference.
struct ModelParams {
  ArchConfig arch;
  FeatureConfig features;
  FieldId field = FieldId::VelX;
  FieldNormalizer normalizer;

  std::vector<NamedParam> blocks;

  MlpRef node_embed;       // node features -> hidden
  MlpRef edge_embed;       // surface-to-volume edge features -> hidden
  MlpRef surf_node_embed;  // surface node features -> hidden
  MlpRef surf_edge_embed;  // surface edge geometry -> hidden
  MlpRef vol_edge_embed;   // volume edge geometry -> hidden (GNN variants)
  MlpRef decoder;          // hidden -> 1
  std::vector<LayerRef> surf_layers;
  std::vector<LayerRef> s2v_layers;
  std::vector<LayerRef> vol_layers;

  std::size_t param_count() const;
};

/// Builds the block structure with zero-valued tensors.
ModelParams make_model(const ArchConfig& arch, const FeatureConfig& features, FieldId field,
                       const FieldNormalizer& normalizer);
/// make_model + uniform fan-in initialization, reproducible from the seed.
ModelParams init_model(const ArchConfig& arch, const FeatureConfig& features, FieldId field,
                       const FieldNormalizer& normalizer, std::uint64_t seed);

/// Per-case inputs: assembled feature matrices and graphs. The surface graph
/// and latents depend only on the surface, so any volume subset sees the
/// same surface side.
struct CaseTensors {
  Tensor node_feats;       // one row per mesh point
  Tensor surf_node_feats;  // one row per surface point (surface order)
  NeighborGraph surf_graph;
  Tensor surf_edge_feats;  // [dx, dy, dist] per surface edge
  BipartiteGraph s2v;
  Tensor s2v_edge_feats;
  NeighborGraph vol_graph;  // GNN variants only
  Tensor vol_edge_feats;
};

/// graph_seed feeds the degree-capping sampler of the radius graphs; fixed
/// default keeps inference deterministic.
CaseTensors build_case_tensors(const MeshCase& c, const ModelParams& mp,
                               std::uint64_t graph_seed = 0, bool parallel = true);

/// Records the model forward pass for one case on the tape. When `train` is
/// true every block is registered as a differentiable tape parameter and
/// param_ids (aligned with mp.blocks) is filled. Returns the id of the
/// (n_points x 1) prediction in normalized target space.
Tape::Id model_forward(Tape& tape, const ModelParams& mp, const CaseTensors& ct, bool train,
                       std::vector<Tape::Id>* param_ids);

/// Convenience inference path: features + graphs + forward, no gradients.
/// Output is (n_points x 1), normalized target space.
Tensor predict(const ModelParams& mp, const MeshCase& c, std::uint64_t graph_seed = 0,
               bool parallel = true);

/// Versioned binary checkpoint holding the full ModelParams.
void save_checkpoint(const std::string& path, const ModelParams& mp);
ModelParams load_checkpoint(const std::string& path);

/// FNV-1a over the raw bytes of every block, in block order. Used to verify
/// that evaluation leaves parameters untouched.
std::uint64_t params_hash(const ModelParams& mp);

}  // namespace geompnn
