#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "casad/byte_series.hpp"
#include "casad/eigen.hpp"
#include "casad/simulator.hpp"
#include "casad/ssa.hpp"

namespace {

const casad::ByteSeries& prototype_bytes() {
  static const casad::ByteSeries series = [] {
    const casad::FrameLog log = casad::run_simulation(casad::default_prototype());
    return casad::extract_byte_series(log);
  }();
  return series;
}

casad::SsaModel make_model(std::size_t lag, std::size_t r) {
  casad::LagConfig cfg{40000, lag, casad::DimensionRule::explicit_r(r)};
  return casad::train(prototype_bytes().values, cfg);
}

void BM_DetectorStep(benchmark::State& state) {
  const auto model = make_model(static_cast<std::size_t>(state.range(0)),
                                static_cast<std::size_t>(state.range(1)));
  std::mt19937_64 rng(1);
  std::vector<std::uint8_t> bytes(1 << 16);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng() & 0xFF);

  casad::StreamDetector detector(model);
  std::size_t i = 0;
  for (auto _ : state) {
    auto s = detector.step(bytes[i]);
    benchmark::DoNotOptimize(s);
    i = (i + 1) & (bytes.size() - 1);
  }
  state.SetBytesProcessed(state.iterations());
}
BENCHMARK(BM_DetectorStep)
    ->Args({100, 10})
    ->Args({250, 10})
    ->Args({500, 10})
    ->Args({500, 20})
    ->Args({500, 40});

void BM_ScoreSeries(benchmark::State& state) {
  const auto model = make_model(500, static_cast<std::size_t>(state.range(0)));
  const auto& series = prototype_bytes();
  for (auto _ : state) {
    const casad::DepartureSeries scores =
        casad::score_series(model, series.values, std::nullopt, 40000);
    benchmark::DoNotOptimize(scores.scores.data());
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(series.size() - 40000));
}
BENCHMARK(BM_ScoreSeries)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_Train(benchmark::State& state) {
  const std::size_t lag = static_cast<std::size_t>(state.range(0));
  const auto& series = prototype_bytes();
  casad::LagConfig cfg{40000, lag, casad::DimensionRule::energy_fraction(0.90)};
  for (auto _ : state) {
    const casad::SsaModel model = casad::train(series.values, cfg);
    benchmark::DoNotOptimize(model.training_score_max());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Train)->Arg(100)->Arg(250)->Arg(500)->Unit(benchmark::kMillisecond)
    ->Complexity();

void BM_GramFromSeries(benchmark::State& state) {
  const std::size_t lag = static_cast<std::size_t>(state.range(0));
  const auto& series = prototype_bytes();
  for (auto _ : state) {
    const casad::Matrix g = casad::gram_from_series(series.values, 40000, lag);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_GramFromSeries)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const casad::BusSchedule schedule = casad::default_prototype();
  for (auto _ : state) {
    const casad::FrameLog log = casad::run_simulation(schedule);
    benchmark::DoNotOptimize(log.frames.data());
  }
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
