#include <benchmark/benchmark.h>

#include <map>

#include "citegap/corpus.hpp"
#include "citegap/imbalance.hpp"
#include "citegap/nullmodels.hpp"
#include "citegap/synthgen.hpp"

namespace {

using namespace citegap;

const CitationNetwork& network(std::size_t n_papers) {
  static std::map<std::size_t, CitationNetwork> cache;
  auto it = cache.find(n_papers);
  if (it == cache.end()) {
    synth::SynthConfig config;
    config.n_papers = n_papers;
    config.year_from = 1995;
    config.pa_exponent = 0.5;
    config.seed = 1;
    const auto c = synth::generate(config);
    it = cache.emplace(n_papers, build_network(c.papers, c.citations, c.authors)).first;
  }
  return it->second;
}

void BM_CandidateIndex(benchmark::State& state) {
  const auto& net = network(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(CandidateIndex(net));
  state.counters["edges"] = static_cast<double>(net.edge_count());
}
BENCHMARK(BM_CandidateIndex)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

template <Model M>
void BM_Randomize(benchmark::State& state) {
  const auto& net = network(static_cast<std::size_t>(state.range(0)));
  const CandidateIndex index(net);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(randomize(index, M, seed++));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(net.edge_count()));
}
BENCHMARK(BM_Randomize<Model::RD>)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Randomize<Model::HD>)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Randomize<Model::PD>)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_Tabulate(benchmark::State& state) {
  const auto& net = network(10000);
  const auto groups = standard_groups(Partition::ByTopic);
  const GroupTabulator tab(net, groups);
  for (auto _ : state) benchmark::DoNotOptimize(tab.tabulate(net.edges()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(net.edge_count()));
}
BENCHMARK(BM_Tabulate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
