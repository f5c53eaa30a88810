// Benchmark comparing the OpenMP-parallel kernels against their serial
// reference implementations. Every pair must agree bit-for-bit; any mismatch
// makes the run fail, so this doubles as an integration check.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "geompnn/features.hpp"
#include "geompnn/graph.hpp"
#include "geompnn/kdtree.hpp"
#include "geompnn/rng.hpp"
#include "geompnn/synthetic.hpp"
#include "geompnn/tensor.hpp"

namespace gk = geompnn::kernels;
using geompnn::Tensor;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

Tensor random_tensor(std::size_t r, std::size_t c, geompnn::Rng& rng) {
  Tensor t(r, c);
  for (double& v : t.data) v = rng.uniform(-1.0, 1.0);
  return t;
}

struct BenchRow {
  std::string name;
  std::string size;
  double serial_ms = 0.0;
  double parallel_ms = 0.0;
  bool exact = false;
};

void print_table(const std::vector<BenchRow>& rows) {
  std::printf("%-22s %-18s %12s %12s %9s %7s\n", "kernel", "size", "serial ms", "parallel ms",
              "speedup", "exact");
  for (const BenchRow& r : rows) {
    std::printf("%-22s %-18s %12.3f %12.3f %9.2f %7s\n", r.name.c_str(), r.size.c_str(),
                r.serial_ms, r.parallel_ms,
                r.parallel_ms > 0.0 ? r.serial_ms / r.parallel_ms : 0.0,
                r.exact ? "yes" : "NO");
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool smoke = false;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--smoke") smoke = true;
  }
  const int reps = smoke ? 1 : 5;
  const std::size_t n = smoke ? 96 : 768;   // matmul dimension
  const std::size_t m = smoke ? 2000 : 200000;  // elementwise / segment rows
  const std::size_t npts = smoke ? 500 : 20000;

  geompnn::Rng rng(42);
  std::vector<BenchRow> rows;

  auto bench_pair = [&](const std::string& name, const std::string& size,
                        const std::function<Tensor()>& serial,
                        const std::function<Tensor()>& parallel) {
    BenchRow row;
    row.name = name;
    row.size = size;
    Tensor a, b;
    row.serial_ms = time_ms([&] { a = serial(); }, reps);
    row.parallel_ms = time_ms([&] { b = parallel(); }, reps);
    row.exact = bit_equal(a, b);
    rows.push_back(row);
  };

  {
    const Tensor a = random_tensor(n, n, rng);
    const Tensor b = random_tensor(n, n, rng);
    char size[64];
    std::snprintf(size, sizeof(size), "%zux%zu * %zux%zu", n, n, n, n);
    bench_pair("matmul", size, [&] { return gk::matmul_serial(a, b); },
               [&] { return gk::matmul(a, b); });
    bench_pair("matmul_at_b", size, [&] { return gk::matmul_at_b_serial(a, b); },
               [&] { return gk::matmul_at_b(a, b); });
    bench_pair("matmul_a_bt", size, [&] { return gk::matmul_a_bt_serial(a, b); },
               [&] { return gk::matmul_a_bt(a, b); });
  }

  {
    const Tensor x = random_tensor(m, 64, rng);
    const Tensor y = random_tensor(m, 64, rng);
    const Tensor bias = random_tensor(1, 64, rng);
    char size[64];
    std::snprintf(size, sizeof(size), "%zux64", m);
    bench_pair("gelu", size, [&] { return gk::gelu_serial(x); }, [&] { return gk::gelu(x); });
    bench_pair("add", size, [&] { return gk::add_serial(x, y); }, [&] { return gk::add(x, y); });
    bench_pair("add_bias", size, [&] { return gk::add_bias_serial(x, bias); },
               [&] { return gk::add_bias(x, bias); });
  }

  {
    const Tensor x = random_tensor(m, 64, rng);
    std::vector<std::size_t> idx(m);
    std::vector<std::size_t> keys(m);
    const std::size_t n_groups = m / 8;
    for (std::size_t i = 0; i < m; ++i) {
      idx[i] = rng.uniform_index(m);
      keys[i] = rng.uniform_index(n_groups);
    }
    const geompnn::RowGroups groups = geompnn::RowGroups::build(keys, n_groups);
    char size[64];
    std::snprintf(size, sizeof(size), "%zux64", m);
    bench_pair("gather_rows", size, [&] { return gk::gather_rows_serial(x, idx); },
               [&] { return gk::gather_rows(x, idx); });
    bench_pair("segment_mean", size, [&] { return gk::segment_mean_serial(x, groups, 0.0); },
               [&] { return gk::segment_mean(x, groups, 0.0); });
  }

  // Spatial queries: kd-tree (parallel batch) against brute force.
  {
    std::vector<geompnn::Point2> pts(npts);
    for (auto& p : pts) p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    const std::size_t nq = smoke ? 100 : 2000;
    std::vector<geompnn::Point2> queries(pts.begin(), pts.begin() + nq);
    const geompnn::KdTree2 tree(pts);
    constexpr std::size_t kK = 8;

    BenchRow row;
    row.name = "knn (tree vs brute)";
    char size[64];
    std::snprintf(size, sizeof(size), "%zu pts, %zu q", npts, nq);
    row.size = size;
    std::vector<std::vector<std::size_t>> brute, fast;
    row.serial_ms = time_ms(
        [&] {
          brute.clear();
          for (const auto& q : queries) brute.push_back(geompnn::brute_force_knn(pts, q, kK));
        },
        reps);
    row.parallel_ms = time_ms([&] { fast = tree.knn_batch(queries, kK, true); }, reps);
    row.exact = brute == fast;
    rows.push_back(row);
  }

  // End-to-end feature assembly on a synthetic case.
  {
    geompnn::GenerateConfig gc;
    gc.n_surface = smoke ? 60 : 200;
    gc.n_volume = smoke ? 400 : 7800;
    const geompnn::MeshCase c = geompnn::generate_case(geompnn::JoukowskiParams{}, gc, 7, "bench");
    geompnn::FeatureConfig fc;
    fc.variant = geompnn::FeatureVariant::Inlet;
    fc.sine = geompnn::default_sine_config({&c, 1});
    const geompnn::FeatureBuilder fb(c, fc);
    char size[64];
    std::snprintf(size, sizeof(size), "%zu pts x %zu", c.points.size(), fb.node_width());
    bench_pair("node_features", size, [&] { return fb.node_matrix_serial(); },
               [&] { return fb.node_matrix(true); });

    const geompnn::BipartiteGraph g = geompnn::surf2vol_graph(c, 8);
    std::snprintf(size, sizeof(size), "%zu edges x %zu", g.edges.size(), fb.edge_width());
    bench_pair("edge_features", size, [&] { return fb.edge_matrix_serial(g); },
               [&] { return fb.edge_matrix(g, true); });
  }

  print_table(rows);

  bool all_exact = true;
  for (const BenchRow& r : rows) all_exact = all_exact && r.exact;
  if (!all_exact) {
    std::printf("\nFAIL: parallel and serial kernels disagree\n");
    return 1;
  }
  std::printf("\nall parallel kernels bit-identical to serial references\n");
  return 0;
}
