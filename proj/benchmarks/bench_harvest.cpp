#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "citegap/harvest.hpp"

namespace {

using namespace citegap;

std::string random_title(std::mt19937& gen, std::size_t words) {
  static const char* vocab[] = {"graph", "neural", "citation", "bias", "Zürich", "naïve", "sparse", "model"};
  std::uniform_int_distribution<std::size_t> pick(0, std::size(vocab) - 1);
  std::string s;
  for (std::size_t k = 0; k < words; ++k) s += std::string(k ? " " : "") + vocab[pick(gen)];
  return s;
}

void BM_NormalizedLevenshtein(benchmark::State& state) {
  std::mt19937 gen(1);
  const auto a = random_title(gen, static_cast<std::size_t>(state.range(0)));
  const auto b = random_title(gen, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(harvest::normalized_levenshtein(a, b));
}
BENCHMARK(BM_NormalizedLevenshtein)->Arg(4)->Arg(12)->Arg(40);

void BM_LinkCorpora(benchmark::State& state) {
  std::mt19937 gen(2);
  std::vector<harvest::RawRecord> a, b;
  for (int i = 0; i < state.range(0); ++i) {
    harvest::RawRecord r;
    r.record_id = "r" + std::to_string(i);
    r.title = random_title(gen, 6);
    r.year = 2000 + i % 20;
    r.author_full_names = {"Ann Lee", "Bo Kim"};
    r.source = harvest::Source::A;
    a.push_back(r);
    r.source = harvest::Source::B;
    r.title += " extended";
    b.push_back(r);
  }
  for (auto _ : state) benchmark::DoNotOptimize(harvest::link_corpora(a, b));
}
BENCHMARK(BM_LinkCorpora)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
