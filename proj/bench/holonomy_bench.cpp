// Serial reference against the OpenMP kernels. Thread count follows
// OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "cartan/catalog.hpp"
#include "cartan/holonomy.hpp"
#include "cartan/transport.hpp"

using namespace cartan;

namespace {

const std::vector<double> kEps{0.4, 0.2, 0.1, 0.05, 0.025, 0.0125};

void sample(benchmark::State& state, const char* name, bool parallel) {
  const CatalogEntry& e = catalog_entry(name);
  const MetricChart chart = chart_from_descriptor(e.descriptor);
  Protocol p;
  p.n_polygons = static_cast<int>(state.range(0));
  for (auto _ : state) {
    HolonomySample s = parallel ? sample_holonomy(chart, e.base, p) : sample_holonomy_serial(chart, e.base, p);
    benchmark::DoNotOptimize(s.elements.data());
  }
  state.counters["loops"] = static_cast<double>(protocol_loops(chart, e.base, p).size());
}

template <bool Parallel>
void family(benchmark::State& state) {
  const MetricChart chart = sphere_chart();
  const Vec x = catalog_entry("sphere-s2").base;
  for (auto _ : state) {
    LoopFamily f = Parallel ? small_loop_family(chart, x, kEps, 0, 1) : small_loop_family_serial(chart, x, kEps, 0, 1);
    benchmark::DoNotOptimize(f.elements.data());
  }
}

}  // namespace

BENCHMARK_CAPTURE(sample, sphere_serial, "sphere-s2", false)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sample, sphere_omp, "sphere-s2", true)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sample, paraboloid_serial, "paraboloid", false)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(sample, paraboloid_omp, "paraboloid", true)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(family, false)->Name("small_loop_family/serial")->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(family, true)->Name("small_loop_family/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
