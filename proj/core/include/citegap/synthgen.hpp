#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "citegap/corpus.hpp"
#include "citegap/types.hpp"

namespace citegap::synth {

enum class CitationDistribution : std::uint8_t { Poisson, Fixed, Geometric };

struct SynthConfig {
  std::size_t n_papers = 1000;
  int year_from = 2000;
  int year_to = 2020;
  // MM, MW, WM, WW
  std::array<double, 4> category_probs{0.756, 0.078, 0.111, 0.055};
  std::size_t n_countries = 5;
  double country_skew = 1.0;  // Zipf exponent over countries, 0 = uniform
  std::size_t n_topics = 8;
  double topic_skew = 1.0;
  std::size_t n_subfields = 4;
  std::size_t venues_per_rank = 3;
  // A*, A, B, C, Q1, Q2, Q3, Q4
  std::array<double, 8> rank_probs{0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125};
  CitationDistribution citations = CitationDistribution::Poisson;
  double citations_mean = 5.0;
  double homophily_strength = 0.0;  // weight x (1 + h) when the AttributeKey matches
  double pa_exponent = 0.0;         // weight x (in_degree + 1)^pa
  std::array<double, 4> planted_bias{1.0, 1.0, 1.0, 1.0};  // weight multiplier by target category
  double sole_author_prob = 0.15;
  double author_reuse_prob = 0.5;
  std::size_t max_authors = 4;
  std::uint64_t seed = 1;
};

/// Throws InputError on an invalid configuration.
void validate(const SynthConfig& config);

/// Sets one field from its text form (`key = value` config files and flags).
/// Vector fields take comma-separated values. Throws InputError.
void set_option(SynthConfig& config, std::string_view key, std::string_view value);

struct SynthCorpus {
  std::vector<PaperRecord> papers;
  std::vector<CitationEdge> citations;
  std::vector<AuthorRecord> authors;
};

/// Generates papers in date order, then lets each paper published in 1990 or
/// later cite earlier papers from the preceding ten years that share none of
/// its authors. Targets are drawn without replacement with weight
/// homophily x preference x planted bias. A paper with fewer eligible targets
/// than its drawn count cites all of them. Throws GenerationError when a
/// fixed citation count exceeds n_papers - 1. Deterministic per seed.
SynthCorpus generate(const SynthConfig& config);

}  // namespace citegap::synth
