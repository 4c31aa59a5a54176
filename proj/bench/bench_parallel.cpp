#include <benchmark/benchmark.h>

#include "bihc/coordinates.hpp"
#include "bihc/io.hpp"
#include "bihc/scene.hpp"

using namespace bihc;

namespace {

const Cage& rest() {
  static const Cage c = read_cage_file(std::string(BIHC_DATA_DIR) + "/cubic_blob.cage");
  return c;
}

const CoordinateSystem& system() {
  static const CoordinateSystem s = build_system(rest(), default_config(3));
  return s;
}

const std::vector<Point2>& points() {
  static const std::vector<Point2> p = read_shape_file(std::string(BIHC_DATA_DIR) + "/blob_grid.shape").vertices;
  return p;
}

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_Assemble(benchmark::State& state) {
  const Discretization& disc = system().disc;
  for (auto _ : state) {
    BemMatrices m = assemble(disc, {}, mode(state));
    benchmark::DoNotOptimize(m.Phi_n.data());
  }
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_Precompute(benchmark::State& state) {
  for (auto _ : state) {
    CoordinateTable t = precompute_table(system(), points(), mode(state));
    benchmark::DoNotOptimize(t.alpha_c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(points().size()));
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_Assemble)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Precompute)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
