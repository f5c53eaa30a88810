#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "geompnn/errors.hpp"
#include "geompnn/eval.hpp"
#include "geompnn/gradcheck.hpp"
#include "geompnn/graph.hpp"
#include "geompnn/mesh.hpp"
#include "geompnn/net.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/synthetic.hpp"
#include "geompnn/train.hpp"
#include "geompnn/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using geompnn::data_error;
using geompnn::numerical_error;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

/// Run manifest: resolved configuration + artifact paths, written before any
/// long computation so a run can be reproduced.
void write_run_manifest(const fs::path& path, const std::string& command, std::uint64_t seed,
                        const json& config, const std::vector<std::string>& artifacts) {
  json doc;
  doc["tool"] = "geompnn";
  doc["version"] = geompnn::kVersion;
  doc["command"] = command;
  doc["seed"] = seed;
  doc["config"] = config;
  doc["artifacts"] = artifacts;
  std::ofstream os(path);
  if (!os) throw data_error("cannot write run manifest " + path.string());
  os << doc.dump(2) << '\n';
}

std::vector<geompnn::MeshCase> load_cases(const std::string& manifest_path) {
  std::vector<geompnn::MeshCase> cases;
  for (const std::string& p : geompnn::load_manifest(manifest_path)) {
    cases.push_back(geompnn::load_case(p));
  }
  if (cases.empty()) throw data_error("manifest lists no cases: " + manifest_path);
  return cases;
}

geompnn::FeatureVariant default_variant_for(geompnn::FieldId field) {
  // Canonicalized inputs for the hard fields, harmonic embeddings for the
  // velocities.
  switch (field) {
    case geompnn::FieldId::Pressure:
    case geompnn::FieldId::TurbVisc:
      return geompnn::FeatureVariant::Inlet;
    default:
      return geompnn::FeatureVariant::SpH;
  }
}

struct GenerateOpts {
  std::string out_dir = "dataset";
  std::uint64_t seed = 0;
  std::size_t count = 8;
  std::size_t n_surface = 200;
  std::size_t n_volume = 7800;
  double train_frac = 0.75;
  geompnn::ParamRanges ranges;
};

int cmd_generate(const GenerateOpts& o) {
  if (o.count < 1) throw data_error("generate: count must be >= 1");
  if (!(o.train_frac >= 0.0 && o.train_frac <= 1.0)) {
    throw data_error("generate: train fraction must lie in [0, 1]");
  }
  fs::create_directories(o.out_dir);

  std::vector<std::string> case_files;
  std::vector<std::string> artifacts;
  for (std::size_t i = 0; i < o.count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "case_%03zu.txt", i);
    case_files.push_back(name);
    artifacts.push_back((fs::path(o.out_dir) / name).string());
  }
  artifacts.push_back((fs::path(o.out_dir) / "train.txt").string());
  artifacts.push_back((fs::path(o.out_dir) / "test.txt").string());

  json cfg;
  cfg["count"] = o.count;
  cfg["n_surface"] = o.n_surface;
  cfg["n_volume"] = o.n_volume;
  cfg["train_frac"] = o.train_frac;
  cfg["mu_x"] = {o.ranges.mu_x_min, o.ranges.mu_x_max};
  cfg["mu_y"] = {o.ranges.mu_y_min, o.ranges.mu_y_max};
  cfg["speed"] = {o.ranges.speed_min, o.ranges.speed_max};
  cfg["alpha"] = {o.ranges.alpha_min, o.ranges.alpha_max};
  write_run_manifest(fs::path(o.out_dir) / "run_generate.json", "generate", o.seed, cfg,
                     artifacts);

  geompnn::Rng param_rng(geompnn::mix_seed(o.seed, geompnn::hash_label("case-params"), 0));
  geompnn::GenerateConfig gc;
  gc.n_surface = o.n_surface;
  gc.n_volume = o.n_volume;
  for (std::size_t i = 0; i < o.count; ++i) {
    const geompnn::JoukowskiParams params = geompnn::sample_params(o.ranges, param_rng);
    char case_id[32];
    std::snprintf(case_id, sizeof(case_id), "case_%03zu", i);
    const geompnn::MeshCase mesh = geompnn::generate_case(
        params, gc, geompnn::mix_seed(o.seed, geompnn::hash_label("case-mesh"), i), case_id);
    geompnn::save_case(mesh, (fs::path(o.out_dir) / case_files[i]).string());
  }

  const std::size_t n_train =
      std::min<std::size_t>(o.count, std::size_t(std::llround(o.train_frac * double(o.count))));
  std::vector<std::string> train_files(case_files.begin(), case_files.begin() + n_train);
  std::vector<std::string> test_files(case_files.begin() + n_train, case_files.end());
  geompnn::save_manifest(train_files, (fs::path(o.out_dir) / "train.txt").string());
  geompnn::save_manifest(test_files, (fs::path(o.out_dir) / "test.txt").string());
  std::cout << "generated " << o.count << " cases in " << o.out_dir << " (" << n_train
            << " train, " << (o.count - n_train) << " test)\n";
  return kExitOk;
}

struct TrainOpts {
  std::string manifest;
  std::string out_dir = "models";
  std::string field = "ux";
  std::string variant;  // empty: per-field default
  std::string model = "surf2vol";
  bool all_fields = false;
  bool log_pressure = false;
  geompnn::TrainConfig cfg;
  geompnn::ArchConfig arch;
};

int train_one(const TrainOpts& o, const std::vector<geompnn::MeshCase>& cases,
              geompnn::FieldId field) {
  geompnn::TrainConfig cfg = o.cfg;
  cfg.field = field;
  cfg.log_pressure = o.log_pressure && field == geompnn::FieldId::Pressure;

  geompnn::FeatureConfig features;
  features.variant =
      o.variant.empty() ? default_variant_for(field) : geompnn::parse_variant(o.variant);
  if (features.variant == geompnn::FeatureVariant::Sine ||
      features.variant == geompnn::FeatureVariant::SpH ||
      features.variant == geompnn::FeatureVariant::Inlet) {
    features.sine = geompnn::default_sine_config(cases);
  }

  geompnn::ArchConfig arch = o.arch;
  arch.kind = geompnn::parse_model_kind(o.model);

  const std::string stem =
      std::string(geompnn::field_name(field)) + "_" + geompnn::variant_name(features.variant);
  const fs::path ckpt = fs::path(o.out_dir) / (stem + ".ckpt");
  const fs::path hist = fs::path(o.out_dir) / (stem + "_history.txt");

  json jc;
  jc["manifest"] = o.manifest;
  jc["field"] = geompnn::field_name(field);
  jc["variant"] = geompnn::variant_name(features.variant);
  jc["model"] = o.model;
  jc["epochs"] = cfg.epochs;
  jc["subsample_n"] = cfg.subsample_n;
  jc["max_lr"] = cfg.max_lr;
  jc["log_pressure"] = cfg.log_pressure;
  jc["hidden"] = arch.hidden;
  jc["mlp_depth"] = arch.mlp_depth;
  jc["surf_layers"] = arch.surf_layers;
  jc["s2v_layers"] = arch.s2v_layers;
  jc["vol_layers"] = arch.vol_layers;
  jc["k_neighbors"] = arch.k_neighbors;
  jc["surf_radius"] = arch.surf_radius;
  jc["vol_radius"] = arch.vol_radius;
  jc["sine_s"] = features.sine.s;
  jc["sine_L"] = features.sine.L;
  write_run_manifest(fs::path(o.out_dir) / ("run_train_" + stem + ".json"), "train", cfg.seed, jc,
                     {ckpt.string(), hist.string()});

  const geompnn::TrainResult result = geompnn::train_field(cases, arch, features, cfg);
  geompnn::save_history(hist.string(), result.history);
  if (result.diverged) {
    std::cerr << result.diagnostic << "\n";
    std::cerr << "partial history written to " << hist << "\n";
    return kExitNumerical;
  }
  geompnn::save_checkpoint(ckpt.string(), result.model);
  std::cout << "trained " << stem << ": " << result.history.size() << " epochs, final mse "
            << result.history.back().mse << ", checkpoint " << ckpt.string() << "\n";
  return kExitOk;
}

int cmd_train(const TrainOpts& o) {
  const std::vector<geompnn::MeshCase> cases = load_cases(o.manifest);
  fs::create_directories(o.out_dir);
  if (o.all_fields) {
    for (int f = 0; f < geompnn::kNumFields; ++f) {
      const int rc = train_one(o, cases, static_cast<geompnn::FieldId>(f));
      if (rc != kExitOk) return rc;
    }
    return kExitOk;
  }
  return train_one(o, cases, geompnn::parse_field(o.field));
}

struct EvalOpts {
  std::string manifest;
  std::vector<std::string> checkpoints;
  std::string out_dir = "eval";
  std::size_t subsample_n = 32000;
  std::uint64_t seed = 0;
  bool timing = false;
};

int cmd_eval(const EvalOpts& o) {
  const std::vector<geompnn::MeshCase> cases = load_cases(o.manifest);
  std::vector<geompnn::ModelParams> models;
  for (const std::string& p : o.checkpoints) models.push_back(geompnn::load_checkpoint(p));
  fs::create_directories(o.out_dir);

  const fs::path text_path = fs::path(o.out_dir) / "report.txt";
  const fs::path machine_path = fs::path(o.out_dir) / "report_machine.txt";
  json jc;
  jc["manifest"] = o.manifest;
  jc["checkpoints"] = o.checkpoints;
  jc["subsample_n"] = o.subsample_n;
  jc["timing"] = o.timing;
  write_run_manifest(fs::path(o.out_dir) / "run_eval.json", "eval", o.seed, jc,
                     {text_path.string(), machine_path.string()});

  const geompnn::EvalReport report =
      geompnn::evaluate(models, cases, o.subsample_n, o.seed, o.timing);
  {
    std::ofstream os(text_path);
    if (!os) throw data_error("cannot write " + text_path.string());
    geompnn::write_report_text(os, report);
  }
  {
    std::ofstream os(machine_path);
    if (!os) throw data_error("cannot write " + machine_path.string());
    geompnn::write_report_machine(os, report);
  }
  std::cout << "evaluated " << models.size() << " checkpoint(s) on " << cases.size()
            << " case(s); report in " << o.out_dir << "\n";
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  bool all_ok = true;
  for (const geompnn::GradCheckResult& r : geompnn::primitive_gradchecks(seed)) {
    const bool ok = r.passed();
    all_ok = all_ok && ok;
    std::printf("%-24s max_rel_error=%.3e %s\n", r.name.c_str(), r.max_rel_error,
                ok ? "ok" : "FAIL");
  }
  const geompnn::GradCheckResult model = geompnn::model_gradcheck(seed);
  const bool model_ok = model.passed();
  all_ok = all_ok && model_ok;
  std::printf("%-24s max_rel_error=%.3e %s\n", model.name.c_str(), model.max_rel_error,
              model_ok ? "ok" : "FAIL");
  if (!geompnn::gradcheck_detects_wrong_gradient(seed)) {
    std::printf("negative control FAILED: corrupted gradient not detected\n");
    all_ok = false;
  }
  return all_ok ? kExitOk : kExitNumerical;
}

struct DumpFeatureOpts {
  std::string case_path;
  std::string out_path;
  std::string variant = "base";
  double sine_s = 0.0;  // <= 0: fit from the case
  double sine_l = 0.0;
};

int cmd_dump_features(const DumpFeatureOpts& o) {
  const geompnn::MeshCase c = geompnn::load_case(o.case_path);
  geompnn::FeatureConfig cfg;
  cfg.variant = geompnn::parse_variant(o.variant);
  if (o.sine_s > 0.0 && o.sine_l > 0.0) {
    cfg.sine.s = o.sine_s;
    cfg.sine.L = o.sine_l;
  } else {
    cfg.sine = geompnn::default_sine_config({&c, 1});
  }
  const geompnn::FeatureBuilder fb(c, cfg);
  std::ofstream os(o.out_path);
  if (!os) throw data_error("cannot write " + o.out_path);
  geompnn::dump_features(os, c, fb);
  std::cout << "wrote " << c.points.size() << " feature rows to " << o.out_path << "\n";
  return kExitOk;
}

struct DumpGraphOpts {
  std::string case_path;
  std::string out_path;
  std::string type = "s2v";  // surface | volume | s2v
  double radius = 0.05;
  std::size_t max_degree = 8;
  std::size_t k = 8;
  std::uint64_t seed = 0;
};

int cmd_dump_graph(const DumpGraphOpts& o) {
  const geompnn::MeshCase c = geompnn::load_case(o.case_path);
  if (o.type == "s2v") {
    const geompnn::BipartiteGraph g = geompnn::surf2vol_graph(c, o.k);
    geompnn::dump_edge_list(o.out_path, g.edges, g.edge_geom);
    std::cout << "wrote " << g.edges.size() << " edges to " << o.out_path << "\n";
  } else if (o.type == "surface") {
    std::vector<geompnn::Point2> pts;
    for (std::size_t i : c.surface_idx) pts.push_back(c.points[i]);
    const geompnn::NeighborGraph g = geompnn::radius_graph(pts, o.radius, o.max_degree, o.seed);
    geompnn::dump_edge_list(o.out_path, g.edges, g.edge_geom);
    std::cout << "wrote " << g.edges.size() << " edges to " << o.out_path << "\n";
  } else if (o.type == "volume") {
    const geompnn::NeighborGraph g =
        geompnn::radius_graph(c.points, o.radius, o.max_degree, o.seed);
    geompnn::dump_edge_list(o.out_path, g.edges, g.edge_geom);
    std::cout << "wrote " << g.edges.size() << " edges to " << o.out_path << "\n";
  } else {
    throw data_error("dump-graph: unknown type " + o.type +
                     " (expected surface, volume, or s2v)");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geompnn: geometry-aware message passing for airfoil flow fields"};
  app.set_version_flag("--version", std::string(geompnn::kVersion));
  app.require_subcommand(1);

  GenerateOpts gen;
  CLI::App* sg = app.add_subcommand("generate", "write a synthetic labeled dataset");
  sg->add_option("--out", gen.out_dir, "output directory");
  sg->add_option("--seed", gen.seed, "random seed");
  sg->add_option("--count", gen.count, "number of cases");
  sg->add_option("--n-surface", gen.n_surface, "surface points per case");
  sg->add_option("--n-volume", gen.n_volume, "volume points per case");
  sg->add_option("--train-frac", gen.train_frac, "train split fraction");
  sg->add_option("--speed-min", gen.ranges.speed_min, "inlet speed range low");
  sg->add_option("--speed-max", gen.ranges.speed_max, "inlet speed range high");
  sg->add_option("--alpha-min", gen.ranges.alpha_min, "angle of attack low (rad)");
  sg->add_option("--alpha-max", gen.ranges.alpha_max, "angle of attack high (rad)");
  sg->add_option("--mu-x-min", gen.ranges.mu_x_min, "shape parameter mu_x low");
  sg->add_option("--mu-x-max", gen.ranges.mu_x_max, "shape parameter mu_x high");
  sg->add_option("--mu-y-min", gen.ranges.mu_y_min, "shape parameter mu_y low");
  sg->add_option("--mu-y-max", gen.ranges.mu_y_max, "shape parameter mu_y high");

  TrainOpts tr;
  CLI::App* st = app.add_subcommand("train", "train per-field models");
  st->add_option("--manifest", tr.manifest, "training manifest")->required();
  st->add_option("--out", tr.out_dir, "output directory");
  st->add_option("--field", tr.field, "target field: ux uy p nut");
  st->add_option("--variant", tr.variant, "feature variant: base trail polar sine sph inlet");
  st->add_option("--model", tr.model, "model kind: mlp gnn surf2vol surf2vol_gnn");
  st->add_flag("--all-fields", tr.all_fields, "train all four fields sequentially");
  st->add_flag("--log-pressure", tr.log_pressure, "log-compress pressure targets");
  st->add_option("--seed", tr.cfg.seed, "random seed");
  st->add_option("--epochs", tr.cfg.epochs, "training epochs");
  st->add_option("--subsample-n", tr.cfg.subsample_n, "volume points sampled per epoch");
  st->add_option("--max-lr", tr.cfg.max_lr, "peak learning rate");
  st->add_option("--warmup-frac", tr.cfg.warmup_frac, "1cycle warmup fraction");
  st->add_option("--hidden", tr.arch.hidden, "hidden width");
  st->add_option("--mlp-depth", tr.arch.mlp_depth, "hidden layers per MLP");
  st->add_option("--surf-layers", tr.arch.surf_layers, "surface encoder layers");
  st->add_option("--s2v-layers", tr.arch.s2v_layers, "surface-to-volume layers");
  st->add_option("--vol-layers", tr.arch.vol_layers, "volume layers (gnn baseline)");
  st->add_option("--k-neighbors", tr.arch.k_neighbors, "surface neighbors per volume point");
  st->add_option("--surf-radius", tr.arch.surf_radius, "surface graph radius");
  st->add_option("--vol-radius", tr.arch.vol_radius, "volume graph radius");

  EvalOpts ev;
  CLI::App* se = app.add_subcommand("eval", "evaluate checkpoints on a manifest");
  se->add_option("--manifest", ev.manifest, "evaluation manifest")->required();
  se->add_option("--checkpoint", ev.checkpoints, "checkpoint file(s)")->required();
  se->add_option("--out", ev.out_dir, "output directory");
  se->add_option("--subsample-n", ev.subsample_n, "subsample size for the shift metric");
  se->add_option("--seed", ev.seed, "random seed");
  se->add_flag("--timing", ev.timing, "measure wall-clock inference time");

  std::uint64_t gc_seed = 0;
  CLI::App* sc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  sc->add_option("--seed", gc_seed, "random seed");

  DumpFeatureOpts df;
  CLI::App* sf = app.add_subcommand("dump-features", "write per-point feature rows");
  sf->add_option("--case", df.case_path, "case file")->required();
  sf->add_option("--out", df.out_path, "output file")->required();
  sf->add_option("--variant", df.variant, "feature variant");
  sf->add_option("--sine-s", df.sine_s, "sine basis spacing (default: fit)");
  sf->add_option("--sine-l", df.sine_l, "sine basis domain size (default: fit)");

  DumpGraphOpts dg;
  CLI::App* sgr = app.add_subcommand("dump-graph", "write an edge list");
  sgr->add_option("--case", dg.case_path, "case file")->required();
  sgr->add_option("--out", dg.out_path, "output file")->required();
  sgr->add_option("--type", dg.type, "graph type: surface volume s2v");
  sgr->add_option("--radius", dg.radius, "radius for radius graphs");
  sgr->add_option("--max-degree", dg.max_degree, "degree cap for radius graphs");
  sgr->add_option("--k", dg.k, "neighbors for the bipartite graph");
  sgr->add_option("--seed", dg.seed, "seed for degree capping");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sg->parsed()) return cmd_generate(gen);
    if (st->parsed()) return cmd_train(tr);
    if (se->parsed()) return cmd_eval(ev);
    if (sc->parsed()) return cmd_gradcheck(gc_seed);
    if (sf->parsed()) return cmd_dump_features(df);
    if (sgr->parsed()) return cmd_dump_graph(dg);
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
