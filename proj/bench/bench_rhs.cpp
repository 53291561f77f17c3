#include <benchmark/benchmark.h>

#include <cmath>

#include "qlmm/cases.hpp"
#include "qlmm/dg_operator.hpp"

namespace {

using namespace qlmm;

struct Setup {
  Discretization disc;
  SimplicialMesh mesh;
  DGField u;
  DGField b;
  std::vector<Vec2> vel;
};

// Moving-mesh RHS input with a smooth vertex velocity.
Setup make_setup(int dim, int degree, int n) {
  const CaseSpec c = make_case(dim == 1 ? "dam-break-wavy-1d" : "perturbation-2d");
  Setup s{Discretization(dim, degree), c.build_mesh(n, n, std::max(1, n / 3)), {}, {}, {}};
  s.u = l2_project(s.disc, s.mesh, c.initial, dim + 1);
  s.b = l2_project(s.disc, s.mesh, [&](const Vec2& x) { return std::array<double, 3>{c.bottom(x), 0.0, 0.0}; }, 1);
  for (const Vec2& x : s.mesh.vertices()) s.vel.push_back({0.1 * std::sin(x.x), dim == 2 ? 0.1 * std::cos(x.y) : 0.0});
  return s;
}

void run(benchmark::State& state, int dim, bool parallel) {
  const Setup s = make_setup(dim, static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const SpatialOperator op(s.disc, PhysicsParams{});
  DGField l;
  for (auto _ : state) {
    if (parallel) op.rhs(s.mesh, s.u, s.b, s.vel, l);
    else op.rhs_serial(s.mesh, s.u, s.b, s.vel, l);
    benchmark::DoNotOptimize(l.data().data());
  }
  state.SetItemsProcessed(state.iterations() * s.mesh.num_elements());
}

void BM_Rhs1dSerial(benchmark::State& st) { run(st, 1, false); }
void BM_Rhs1dOpenMP(benchmark::State& st) { run(st, 1, true); }
void BM_Rhs2dSerial(benchmark::State& st) { run(st, 2, false); }
void BM_Rhs2dOpenMP(benchmark::State& st) { run(st, 2, true); }

BENCHMARK(BM_Rhs1dSerial)->Args({1, 2000})->Args({2, 2000});
BENCHMARK(BM_Rhs1dOpenMP)->Args({1, 2000})->Args({2, 2000});
BENCHMARK(BM_Rhs2dSerial)->Args({1, 60})->Args({2, 60});
BENCHMARK(BM_Rhs2dOpenMP)->Args({1, 60})->Args({2, 60});

}  // namespace

BENCHMARK_MAIN();
