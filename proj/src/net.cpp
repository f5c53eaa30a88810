#include "geompnn/net.hpp"

#include <array>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

#include "geompnn/errors.hpp"
#include "geompnn/rng.hpp"

namespace geompnn {

namespace {

constexpr const char* kKindNames[4] = {"mlp", "gnn", "surf2vol", "surf2vol_gnn"};

bool uses_surface(ModelKind k) {
  return k == ModelKind::Surf2Vol || k == ModelKind::Surf2VolGnn;
}

bool uses_volume_graph(ModelKind k) {
  return k == ModelKind::VolumeGnn || k == ModelKind::Surf2VolGnn;
}

std::size_t interleaved_vol_layers(const ArchConfig& a) {
  // One volume message-passing layer between consecutive surface-to-volume
  // layers.
  return a.s2v_layers == 0 ? 0 : a.s2v_layers - 1;
}

MlpRef add_mlp(ModelParams& mp, const std::string& name, std::size_t in, std::size_t hidden,
               std::size_t out, std::size_t depth) {
  MlpRef ref;
  std::size_t prev = in;
  for (std::size_t l = 0; l <= depth; ++l) {
    const std::size_t cur = (l == depth) ? out : hidden;
    // Invariant relied on elsewhere: each weight block is immediately
    // followed by its bias block.
    ref.w.push_back(mp.blocks.size());
    mp.blocks.push_back({name + ".w" + std::to_string(l), Tensor(prev, cur)});
    ref.b.push_back(mp.blocks.size());
    mp.blocks.push_back({name + ".b" + std::to_string(l), Tensor(1, cur)});
    prev = cur;
  }
  return ref;
}

std::vector<LayerRef> add_layers(ModelParams& mp, const std::string& prefix, std::size_t count,
                                 std::size_t h, std::size_t depth) {
  std::vector<LayerRef> layers;
  layers.reserve(count);
  for (std::size_t l = 0; l < count; ++l) {
    LayerRef ref;
    const std::string base = prefix + std::to_string(l);
    ref.edge = add_mlp(mp, base + ".edge", 3 * h, h, h, depth);
    ref.node = add_mlp(mp, base + ".node", 2 * h, h, h, depth);
    layers.push_back(std::move(ref));
  }
  return layers;
}

}  // namespace

const char* model_kind_name(ModelKind k) { return kKindNames[static_cast<int>(k)]; }

ModelKind parse_model_kind(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kKindNames[i]) return static_cast<ModelKind>(i);
  }
  throw data_error("unknown model kind: " + std::string(name));
}

std::size_t ModelParams::param_count() const {
  std::size_t n = 0;
  for (const NamedParam& b : blocks) n += b.value.size();
  return n;
}

ModelParams make_model(const ArchConfig& arch, const FeatureConfig& features, FieldId field,
                       const FieldNormalizer& normalizer) {
  if (arch.hidden == 0) throw data_error("model: hidden width must be positive");
  ModelParams mp;
  mp.arch = arch;
  mp.features = features;
  mp.field = field;
  mp.normalizer = normalizer;

  const std::size_t h = arch.hidden;
  const std::size_t d = arch.mlp_depth;
  const std::size_t node_w = node_feature_width(features.variant);
  const std::size_t edge_w = edge_feature_width(features.variant);

  mp.node_embed = add_mlp(mp, "node_embed", node_w, h, h, d);
  if (uses_surface(arch.kind)) {
    mp.surf_node_embed = add_mlp(mp, "surf_node_embed", node_w, h, h, d);
    mp.surf_edge_embed = add_mlp(mp, "surf_edge_embed", kSurfaceEdgeWidth, h, h, d);
    mp.edge_embed = add_mlp(mp, "edge_embed", edge_w, h, h, d);
    mp.surf_layers = add_layers(mp, "surf_layer", arch.surf_layers, h, d);
    mp.s2v_layers = add_layers(mp, "s2v_layer", arch.s2v_layers, h, d);
  }
  if (uses_volume_graph(arch.kind)) {
    mp.vol_edge_embed = add_mlp(mp, "vol_edge_embed", kSurfaceEdgeWidth, h, h, d);
    const std::size_t n_vol =
        arch.kind == ModelKind::VolumeGnn ? arch.vol_layers : interleaved_vol_layers(arch);
    mp.vol_layers = add_layers(mp, "vol_layer", n_vol, h, d);
  }
  mp.decoder = add_mlp(mp, "decoder", h, h, 1, d);
  return mp;
}

ModelParams init_model(const ArchConfig& arch, const FeatureConfig& features, FieldId field,
                       const FieldNormalizer& normalizer, std::uint64_t seed) {
  ModelParams mp = make_model(arch, features, field, normalizer);
  Rng base(mix_seed(seed, hash_label("init"), 0));
  double bound = 0.0;
  for (NamedParam& blk : mp.blocks) {
    // Weight blocks precede their bias block, so the fan-in bound of the
    // last weight applies to the following bias.
    if (blk.value.rows > 1 || blk.name.find(".w") != std::string::npos) {
      bound = 1.0 / std::sqrt(double(blk.value.rows));
    }
    Rng r = base.stream(blk.name, 0);
    for (double& v : blk.value.data) v = r.uniform(-bound, bound);
  }
  return mp;
}

CaseTensors build_case_tensors(const MeshCase& c, const ModelParams& mp, std::uint64_t graph_seed,
                               bool parallel) {
  CaseTensors ct;
  const FeatureBuilder fb(c, mp.features);
  ct.node_feats = fb.node_matrix(parallel);
  if (uses_surface(mp.arch.kind)) {
    ct.surf_node_feats = fb.node_matrix_rows(c.surface_idx, parallel);
    std::vector<Point2> surf_pts;
    surf_pts.reserve(c.surface_idx.size());
    for (std::size_t i : c.surface_idx) surf_pts.push_back(c.points[i]);
    ct.surf_graph = radius_graph(surf_pts, mp.arch.surf_radius, mp.arch.surf_max_degree,
                                 mix_seed(graph_seed, hash_label("surf-graph"), 0), parallel);
    ct.surf_edge_feats = fb.surface_edge_matrix(ct.surf_graph);
    ct.s2v = surf2vol_graph(c, mp.arch.k_neighbors, parallel);
    ct.s2v_edge_feats = fb.edge_matrix(ct.s2v, parallel);
  }
  if (uses_volume_graph(mp.arch.kind)) {
    ct.vol_graph = radius_graph(c.points, mp.arch.vol_radius, mp.arch.vol_max_degree,
                                mix_seed(graph_seed, hash_label("vol-graph"), 0), parallel);
    ct.vol_edge_feats = fb.surface_edge_matrix(ct.vol_graph);
  }
  return ct;
}

namespace {

/// Edge wiring of one graph, shared by all layers over that graph.
struct GraphWiring {
  std::vector<std::size_t> src_rows;  // row into the source latent matrix, per edge
  std::vector<std::size_t> dst_rows;  // row into the node latent matrix, per edge
  std::size_t n_dst = 0;
  double divisor = 0.0;  // > 0: fixed in-degree; 0: divide by group size
};

GraphWiring wire(const NeighborGraph& g) {
  GraphWiring w;
  w.src_rows.reserve(g.edges.size());
  w.dst_rows.reserve(g.edges.size());
  for (const GraphEdge& e : g.edges) {
    w.src_rows.push_back(e.src);
    w.dst_rows.push_back(e.dst);
  }
  w.n_dst = g.n_nodes;
  return w;
}

GraphWiring wire(const BipartiteGraph& g) {
  GraphWiring w;
  w.src_rows.reserve(g.edges.size());
  w.dst_rows.reserve(g.edges.size());
  for (const GraphEdge& e : g.edges) {
    w.src_rows.push_back(e.src);
    w.dst_rows.push_back(e.dst);
  }
  w.n_dst = g.n_dst;
  w.divisor = double(g.k);
  return w;
}

struct ForwardCtx {
  Tape& tape;
  const ModelParams& mp;
  const std::vector<Tape::Id>& pids;

  Tape::Id mlp(const MlpRef& ref, Tape::Id x) const {
    const std::size_t depth = ref.w.size() - 1;
    for (std::size_t l = 0; l <= depth; ++l) {
      x = tape.add_bias(tape.matmul(x, pids[ref.w[l]]), pids[ref.b[l]]);
      if (l < depth) x = tape.gelu(x);
    }
    return x;
  }

  /// One message-passing layer: residual edge update from
  /// [z_src, z_dst, e], mean-aggregated messages, residual node update from
  /// [z, m]. Homogeneous graphs pass z_src_mat == z.
  void layer(const LayerRef& lr, const GraphWiring& w, Tape::Id z_src_mat, Tape::Id& z,
             Tape::Id& e) const {
    const Tape::Id zs = tape.gather_rows(z_src_mat, w.src_rows);
    const Tape::Id zd = tape.gather_rows(z, w.dst_rows);
    const std::array<Tape::Id, 3> ecat{zs, zd, e};
    e = tape.add(e, mlp(lr.edge, tape.concat_cols(ecat)));
    const Tape::Id m = tape.segment_mean(e, w.dst_rows, w.n_dst, w.divisor);
    const std::array<Tape::Id, 2> ncat{z, m};
    z = tape.add(z, mlp(lr.node, tape.concat_cols(ncat)));
  }
};

}  // namespace

Tape::Id model_forward(Tape& tape, const ModelParams& mp, const CaseTensors& ct, bool train,
                       std::vector<Tape::Id>* param_ids) {
  std::vector<Tape::Id> pids(mp.blocks.size());
  for (std::size_t i = 0; i < mp.blocks.size(); ++i) {
    pids[i] = train ? tape.param(mp.blocks[i].value) : tape.input(mp.blocks[i].value);
  }
  if (param_ids) *param_ids = pids;
  const ForwardCtx ctx{tape, mp, pids};
  const ModelKind kind = mp.arch.kind;

  Tape::Id z = ctx.mlp(mp.node_embed, tape.input(ct.node_feats));

  if (kind == ModelKind::PointwiseMlp) {
    return ctx.mlp(mp.decoder, z);
  }

  if (kind == ModelKind::VolumeGnn) {
    const GraphWiring vw = wire(ct.vol_graph);
    Tape::Id ev = ctx.mlp(mp.vol_edge_embed, tape.input(ct.vol_edge_feats));
    for (const LayerRef& lr : mp.vol_layers) ctx.layer(lr, vw, z, z, ev);
    return ctx.mlp(mp.decoder, z);
  }

  // Surface encoder shared by the surface-to-volume variants.
  const GraphWiring sw = wire(ct.surf_graph);
  Tape::Id z_surf = ctx.mlp(mp.surf_node_embed, tape.input(ct.surf_node_feats));
  Tape::Id e_surf = ctx.mlp(mp.surf_edge_embed, tape.input(ct.surf_edge_feats));
  for (const LayerRef& lr : mp.surf_layers) ctx.layer(lr, sw, z_surf, z_surf, e_surf);

  const GraphWiring bw = wire(ct.s2v);
  Tape::Id e = ctx.mlp(mp.edge_embed, tape.input(ct.s2v_edge_feats));

  if (kind == ModelKind::Surf2Vol) {
    for (const LayerRef& lr : mp.s2v_layers) ctx.layer(lr, bw, z_surf, z, e);
    return ctx.mlp(mp.decoder, z);
  }

  // Surf2VolGnn: volume message passing between consecutive
  // surface-to-volume layers.
  const GraphWiring vw = wire(ct.vol_graph);
  Tape::Id ev = ctx.mlp(mp.vol_edge_embed, tape.input(ct.vol_edge_feats));
  for (std::size_t l = 0; l < mp.s2v_layers.size(); ++l) {
    ctx.layer(mp.s2v_layers[l], bw, z_surf, z, e);
    if (l + 1 < mp.s2v_layers.size()) {
      ctx.layer(mp.vol_layers[l], vw, z, z, ev);
    }
  }
  return ctx.mlp(mp.decoder, z);
}

Tensor predict(const ModelParams& mp, const MeshCase& c, std::uint64_t graph_seed, bool parallel) {
  Tape tape;
  const CaseTensors ct = build_case_tensors(c, mp, graph_seed, parallel);
  const Tape::Id out = model_forward(tape, mp, ct, false, nullptr);
  return tape.value(out);
}

std::uint64_t params_hash(const ModelParams& mp) {
  std::uint64_t h = 14695981039346656037ull;
  const auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  for (const NamedParam& blk : mp.blocks) {
    mix(blk.name.data(), blk.name.size());
    mix(blk.value.data.data(), blk.value.data.size() * sizeof(double));
  }
  return h;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O. Fixed-width little-endian fields; doubles as raw IEEE bits.

namespace {

constexpr char kMagic[4] = {'G', 'M', 'P', 'N'};
constexpr std::uint32_t kVersionTag = 1;

void put_u32(std::FILE* f, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = (v >> (8 * i)) & 0xff;
  std::fwrite(b, 1, 4, f);
}

void put_u64(std::FILE* f, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  std::fwrite(b, 1, 8, f);
}

void put_f64(std::FILE* f, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(f, bits);
}

std::uint32_t get_u32(std::FILE* f) {
  unsigned char b[4];
  if (std::fread(b, 1, 4, f) != 4) throw data_error("checkpoint: truncated file");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::FILE* f) {
  unsigned char b[8];
  if (std::fread(b, 1, 8, f) != 8) throw data_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::FILE* f) {
  const std::uint64_t bits = get_u64(f);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& mp) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
  if (!f) throw data_error("checkpoint: cannot write " + path);
  std::fwrite(kMagic, 1, 4, f.get());
  put_u32(f.get(), kVersionTag);
  put_u32(f.get(), static_cast<std::uint32_t>(mp.arch.kind));
  put_u32(f.get(), static_cast<std::uint32_t>(mp.field));
  put_u32(f.get(), static_cast<std::uint32_t>(mp.features.variant));
  std::uint32_t flags = 0;
  if (mp.normalizer.log_transform) flags |= 1;
  if (mp.features.sph_factorial_norm) flags |= 2;
  put_u32(f.get(), flags);

  put_u64(f.get(), mp.arch.hidden);
  put_u64(f.get(), mp.arch.mlp_depth);
  put_u64(f.get(), mp.arch.surf_layers);
  put_u64(f.get(), mp.arch.s2v_layers);
  put_u64(f.get(), mp.arch.vol_layers);
  put_u64(f.get(), mp.arch.k_neighbors);
  put_u64(f.get(), mp.arch.surf_max_degree);
  put_u64(f.get(), mp.arch.vol_max_degree);
  put_f64(f.get(), mp.arch.surf_radius);
  put_f64(f.get(), mp.arch.vol_radius);

  put_u32(f.get(), static_cast<std::uint32_t>(mp.features.sine.n_basis));
  put_u32(f.get(), static_cast<std::uint32_t>(mp.features.sph_n_basis));
  put_f64(f.get(), mp.features.sine.s);
  put_f64(f.get(), mp.features.sine.L);
  put_f64(f.get(), mp.normalizer.mean);
  put_f64(f.get(), mp.normalizer.std);

  put_u64(f.get(), mp.blocks.size());
  for (const NamedParam& blk : mp.blocks) {
    put_u32(f.get(), static_cast<std::uint32_t>(blk.name.size()));
    std::fwrite(blk.name.data(), 1, blk.name.size(), f.get());
    put_u64(f.get(), blk.value.rows);
    put_u64(f.get(), blk.value.cols);
    for (double v : blk.value.data) put_f64(f.get(), v);
  }
  if (std::ferror(f.get())) throw data_error("checkpoint: write failed for " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
  if (!f) throw data_error("checkpoint: cannot open " + path);
  char magic[4];
  if (std::fread(magic, 1, 4, f.get()) != 4 || std::memcmp(magic, kMagic, 4) != 0) {
    throw data_error("checkpoint: bad magic in " + path);
  }
  const std::uint32_t version = get_u32(f.get());
  if (version != kVersionTag) throw data_error("checkpoint: unsupported version");

  ArchConfig arch;
  arch.kind = static_cast<ModelKind>(get_u32(f.get()));
  const FieldId field = static_cast<FieldId>(get_u32(f.get()));
  FeatureConfig features;
  features.variant = static_cast<FeatureVariant>(get_u32(f.get()));
  const std::uint32_t flags = get_u32(f.get());

  arch.hidden = get_u64(f.get());
  arch.mlp_depth = get_u64(f.get());
  arch.surf_layers = get_u64(f.get());
  arch.s2v_layers = get_u64(f.get());
  arch.vol_layers = get_u64(f.get());
  arch.k_neighbors = get_u64(f.get());
  arch.surf_max_degree = get_u64(f.get());
  arch.vol_max_degree = get_u64(f.get());
  arch.surf_radius = get_f64(f.get());
  arch.vol_radius = get_f64(f.get());

  features.sine.n_basis = static_cast<int>(get_u32(f.get()));
  features.sph_n_basis = static_cast<int>(get_u32(f.get()));
  features.sine.s = get_f64(f.get());
  features.sine.L = get_f64(f.get());
  features.sph_factorial_norm = (flags & 2) != 0;

  FieldNormalizer norm;
  norm.mean = get_f64(f.get());
  norm.std = get_f64(f.get());
  norm.log_transform = (flags & 1) != 0;

  ModelParams mp = make_model(arch, features, field, norm);
  const std::uint64_t n_blocks = get_u64(f.get());
  if (n_blocks != mp.blocks.size()) throw data_error("checkpoint: block count mismatch");
  for (NamedParam& blk : mp.blocks) {
    const std::uint32_t name_len = get_u32(f.get());
    std::string name(name_len, '\0');
    if (std::fread(name.data(), 1, name_len, f.get()) != name_len) {
      throw data_error("checkpoint: truncated file");
    }
    if (name != blk.name) throw data_error("checkpoint: block name mismatch: " + name);
    const std::uint64_t rows = get_u64(f.get());
    const std::uint64_t cols = get_u64(f.get());
    if (rows != blk.value.rows || cols != blk.value.cols) {
      throw data_error("checkpoint: shape mismatch in " + name);
    }
    for (double& v : blk.value.data) v = get_f64(f.get());
  }
  return mp;
}

}  // namespace geompnn
