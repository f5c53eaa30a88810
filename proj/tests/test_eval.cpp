#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "geompnn/errors.hpp"
#include "geompnn/eval.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/synthetic.hpp"

using namespace geompnn;

namespace {

FeatureConfig config_for(FeatureVariant v) {
  FeatureConfig cfg;
  cfg.variant = v;
  cfg.sine.s = 0.05;
  cfg.sine.L = 3.0;
  return cfg;
}

ArchConfig small_arch(ModelKind kind) {
  ArchConfig a;
  a.kind = kind;
  a.hidden = 16;
  a.mlp_depth = 1;
  a.surf_layers = 2;
  a.s2v_layers = 2;
  a.vol_layers = 2;
  a.k_neighbors = 4;
  return a;
}

MeshCase eval_case(std::uint64_t seed, std::size_t n_volume = 300) {
  GenerateConfig gc;
  gc.n_surface = 100;
  gc.n_volume = n_volume;
  gc.max_radius_factor = 3.0;
  return generate_case(JoukowskiParams{}, gc, seed, "eval" + std::to_string(seed));
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("mean squared error agrees with a two-pass oracle") {
    const std::vector<double> same{1.0, -2.0, 0.5};
    CHECK(mse(same, same) == 0.0);
    const std::vector<double> p{1.0, 2.0, 3.0};
    const std::vector<double> t{0.0, 3.0, 2.0};
    CHECK(mse(p, t) == 1.0);  // all squared differences are 1

    Rng rng(42);
    std::vector<double> a(5000), b(5000);
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = rng.uniform(-100.0, 100.0);
      b[i] = rng.uniform(-100.0, 100.0);
    }
    // independent accumulation in extended precision
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const long double d = static_cast<long double>(a[i]) - static_cast<long double>(b[i]);
      acc += d * d;
    }
    const double oracle = static_cast<double>(acc / static_cast<long double>(a.size()));
    CHECK(mse(a, b) == doctest::Approx(oracle).epsilon(1e-12));

    const std::vector<double> shorter{1.0};
    CHECK_THROWS_AS(mse(p, shorter), data_error);
    const std::vector<double> empty;
    CHECK_THROWS_AS(mse(empty, empty), data_error);
  }

  TEST_CASE("field error is measured in normalized space with optional raw pressure") {
    MeshCase c;
    c.case_id = "tiny";
    c.points = {{0.0, 0.0}, {1.0, 0.0}};
    c.surface_idx = {0};
    c.normals = {{0.0, -1.0}, {0.0, 0.0}};
    c.wall_distance = {0.0, 1.0};
    c.targets = std::vector<TargetRow>{{0, 0, 2.0, 0}, {0, 0, 4.0, 0}};
    FieldNormalizer nz;
    nz.mean = 3.0;
    nz.std = 1.0;
    Tensor pred(2, 1);
    pred.data = {-1.0, 1.0};  // exactly the normalized targets
    const FieldMse exact = mse_field(pred, c, FieldId::Pressure, nz);
    CHECK(exact.normalized == 0.0);
    CHECK_FALSE(exact.raw_pressure.has_value());  // no log compression

    pred.data = {0.0, 1.0};  // first point off by one in normalized space
    CHECK(mse_field(pred, c, FieldId::Pressure, nz).normalized == 0.5);

    FieldNormalizer lz;
    lz.log_transform = true;
    const FieldMse with_raw = mse_field(pred, c, FieldId::Pressure, lz);
    REQUIRE(with_raw.raw_pressure.has_value());
    // raw error recomputed through the inverse transform
    const double r0 = lz.inverse(0.0) - 2.0;
    const double r1 = lz.inverse(1.0) - 4.0;
    CHECK(*with_raw.raw_pressure == doctest::Approx((r0 * r0 + r1 * r1) / 2.0).epsilon(1e-15));
    // raw pressure reporting is pressure-specific
    CHECK_FALSE(mse_field(pred, c, FieldId::VelX, lz).raw_pressure.has_value());

    Tensor bad(1, 1);
    CHECK_THROWS_AS(mse_field(bad, c, FieldId::Pressure, nz), data_error);
  }

  TEST_CASE("the resolution shift is exactly zero on an identity subsample") {
    const MeshCase c = eval_case(60);
    const ModelParams mp =
        init_model(small_arch(ModelKind::Surf2Vol), config_for(FeatureVariant::Base),
                   FieldId::VelX, {}, 1);
    const ShiftResult r = resolution_shift(mp, c, c.size(), 123);
    CHECK(r.defined);
    CHECK(r.epsilon_full == r.epsilon_sub);
    CHECK(r.ratio == 0.0);
  }

  TEST_CASE("a pointwise model sees only sampling noise under subsampling") {
    GenerateConfig gc;
    gc.n_surface = 200;
    gc.n_volume = 8000;
    const MeshCase c = generate_case(JoukowskiParams{}, gc, 31, "shift");
    const ModelParams mp =
        init_model(small_arch(ModelKind::PointwiseMlp), config_for(FeatureVariant::Base),
                   FieldId::VelX, {}, 2);
    const ShiftResult r = resolution_shift(mp, c, c.size() / 4, 9);
    REQUIRE(r.defined);
    CHECK(std::abs(r.ratio) < 0.05);
  }

  TEST_CASE("evaluation aggregates per-case errors and never mutates the models") {
    const std::vector<MeshCase> cases{eval_case(61), eval_case(62)};
    std::vector<ModelParams> models;
    models.push_back(init_model(small_arch(ModelKind::Surf2Vol), config_for(FeatureVariant::SpH),
                                FieldId::VelY, {}, 3));
    models.push_back(init_model(small_arch(ModelKind::PointwiseMlp),
                                config_for(FeatureVariant::Base), FieldId::VelX, {}, 4));
    const std::uint64_t h0 = params_hash(models[0]);
    const std::uint64_t h1 = params_hash(models[1]);
    const EvalReport rep = evaluate(models, cases, 150, 17, false);
    CHECK(params_hash(models[0]) == h0);
    CHECK(params_hash(models[1]) == h1);
    CHECK(rep.n_sub == 150);
    REQUIRE(rep.rows.size() == 2);
    // rows sorted by (variant, field): the base-variant model comes first
    CHECK(rep.rows[0].variant == FeatureVariant::Base);
    CHECK(rep.rows[0].field == FieldId::VelX);
    CHECK(rep.rows[1].variant == FeatureVariant::SpH);
    for (const EvalRow& row : rep.rows) {
      REQUIRE(row.per_case.size() == 2);
      CHECK(row.per_case[0].first == "eval61");
      CHECK(row.per_case[1].first == "eval62");
      CHECK(row.mse_full == (row.per_case[0].second + row.per_case[1].second) / 2.0);
      CHECK(row.mse_sub > 0.0);
      REQUIRE(row.reldiff_defined);
      CHECK(row.reldiff == (row.mse_full - row.mse_sub) / row.mse_sub);
      // timing was off: the report stays byte-reproducible
      CHECK(row.forward_ms == 0.0);
      CHECK(row.graph_ms == 0.0);
    }
    // per-case values equal an independent recomputation
    const FieldMse direct =
        mse_field(predict(models[1], cases[0]), cases[0], FieldId::VelX, models[1].normalizer);
    CHECK(rep.rows[0].per_case[0].second == direct.normalized);
    // the same evaluation replayed is bit-identical
    const EvalReport again = evaluate(models, cases, 150, 17, false);
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      CHECK(again.rows[i].mse_full == rep.rows[i].mse_full);
      CHECK(again.rows[i].mse_sub == rep.rows[i].mse_sub);
    }
  }

  TEST_CASE("timing is opt-in") {
    const std::vector<MeshCase> cases{eval_case(63)};
    const std::vector<ModelParams> models{init_model(
        small_arch(ModelKind::Surf2Vol), config_for(FeatureVariant::Base), FieldId::VelX, {}, 5)};
    const EvalReport timed = evaluate(models, cases, 100, 1, true);
    CHECK(timed.rows[0].forward_ms > 0.0);
    CHECK(timed.rows[0].graph_ms > 0.0);
  }

  TEST_CASE("checkpoints for one field must share the normalizer") {
    const std::vector<MeshCase> cases{eval_case(64)};
    FieldNormalizer a;
    a.mean = 1.0;
    FieldNormalizer b;
    b.mean = 2.0;
    std::vector<ModelParams> models;
    models.push_back(init_model(small_arch(ModelKind::PointwiseMlp),
                                config_for(FeatureVariant::Base), FieldId::VelX, a, 1));
    models.push_back(init_model(small_arch(ModelKind::PointwiseMlp),
                                config_for(FeatureVariant::Sine), FieldId::VelX, b, 2));
    CHECK_THROWS_WITH_AS(evaluate(models, cases, 50, 0, false),
                         doctest::Contains("normalizer mismatch"), data_error);
    CHECK_THROWS_AS(evaluate(models, {}, 50, 0, false), data_error);
  }

  TEST_CASE("report writers emit fixed layouts with full precision") {
    EvalReport rep;
    rep.n_sub = 42;
    EvalRow row;
    row.variant = FeatureVariant::Base;
    row.field = FieldId::VelX;
    row.mse_full = 0.25;
    row.mse_sub = 0.125;
    row.reldiff = 1.0;
    row.reldiff_defined = true;
    row.per_case = {{"c0", 0.1239871234987123}};
    rep.rows.push_back(row);
    EvalRow undef;
    undef.variant = FeatureVariant::Inlet;
    undef.field = FieldId::Pressure;
    undef.mse_full = 0.0;
    undef.mse_sub = 0.0;
    undef.reldiff_defined = false;
    undef.mse_full_raw_pressure = 3.5;
    rep.rows.push_back(undef);

    std::ostringstream machine;
    write_report_machine(machine, rep);
    CHECK(machine.str() ==
          "base ux 0.25 0.125 1 0\n"
          "inlet p 0 0 nan 0\n");

    std::ostringstream text;
    write_report_text(text, rep);
    const std::string s = text.str();
    CHECK(s.find("evaluation report (subsample n = 42)") != std::string::npos);
    CHECK(s.find("base ux 0.25 0.125 1 -") != std::string::npos);
    CHECK(s.find("  case c0 0.1239871234987123") != std::string::npos);
    CHECK(s.find("undefined") != std::string::npos);
    CHECK(s.find("3.5") != std::string::npos);
  }
}
