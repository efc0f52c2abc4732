#include <benchmark/benchmark.h>

#include <memory>

#include "lookback/fpp.hpp"
#include "lookback/oracle.hpp"
#include "lookback/pricer.hpp"

using namespace lookback;

namespace {

LookbackContract put_contract() {
  LookbackContract c;
  c.kind = OptionKind::floating_put;
  c.maturity = 1.0;
  c.x = 1.0;
  c.running_max = 1.5;
  return c;
}

const ModelSpec kBs{BlackScholes{0.3}, 0.05, 0.02};
const ModelSpec kKou{Kou{0.3, 3.0, 0.5, 0.5, 0.1, 0.1}, 0.05, 0.02};
const ModelSpec kRs{
    RegimeSwitchingBS{{0.2, 0.4}, {{-0.75, 0.75}, {0.25, -0.25}}}, 0.05, 0.02};

void survival_action(benchmark::State& state) {
  auto grid = std::make_shared<const Grid>(build_aligned_grid(
      1e-3, 4.5, {1.0, 1.5}, static_cast<std::size_t>(state.range(0))));
  Generator gen = build_generator(kBs, grid);
  for (auto _ : state)
    benchmark::DoNotOptimize(survival_up(gen, 1.5, 1.0, 1.0));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(survival_action)->RangeMultiplier(2)->Range(100, 1600)->Complexity();

void price_flat_vol(benchmark::State& state) {
  PricingConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  const LookbackContract c = put_contract();
  for (auto _ : state) benchmark::DoNotOptimize(price(c, kBs, cfg).price);
}
BENCHMARK(price_flat_vol)->RangeMultiplier(2)->Range(100, 800);

void price_regime_switch(benchmark::State& state) {
  PricingConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  cfg.threads = static_cast<int>(state.range(1));
  const LookbackContract c = put_contract();
  for (auto _ : state) benchmark::DoNotOptimize(price(c, kRs, cfg).price);
}
BENCHMARK(price_regime_switch)->Args({400, 1})->Args({400, 4});

void price_jumps_generic(benchmark::State& state) {
  PricingConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  const LookbackContract c = put_contract();
  for (auto _ : state) benchmark::DoNotOptimize(price(c, kKou, cfg).price);
}
BENCHMARK(price_jumps_generic)->Arg(400)->Arg(800);

void price_jumps_fastpath(benchmark::State& state) {
  PricingConfig cfg;
  cfg.n = static_cast<std::size_t>(state.range(0));
  const LookbackContract c = put_contract();
  for (auto _ : state)
    benchmark::DoNotOptimize(price_levy_fastpath(c, kKou, cfg).price);
}
BENCHMARK(price_jumps_fastpath)->Arg(400)->Arg(800);

void lattice_sweep(benchmark::State& state) {
  LookbackContract c = put_contract();
  c.running_max = 1.0;  // fresh contract lands on every lattice
  const int nx = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        fd_price_floating_put(c, kBs, FdConfig{nx, nx / 2, 3.0}));
}
BENCHMARK(lattice_sweep)->Arg(240)->Arg(480);

}  // namespace

BENCHMARK_MAIN();
