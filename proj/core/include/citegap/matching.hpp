#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citegap/corpus.hpp"
#include "citegap/nullmodels.hpp"
#include "citegap/stats.hpp"
#include "citegap/types.hpp"

namespace citegap::matching {

using Index = CitationNetwork::Index;

struct MatchKey {
  int year = 0;
  std::string country;
  std::string subfield_id;
  std::uint32_t out_citations = 0;

  friend bool operator==(const MatchKey&, const MatchKey&) = default;
  friend auto operator<=>(const MatchKey&, const MatchKey&) = default;
};

/// nullopt for papers that make no citations or have no country.
std::optional<MatchKey> match_key(const CitationNetwork& net, Index paper);

/// Share of men among gender-assigned authors of the network's papers.
double overall_male_fraction(const CitationNetwork& net);

/// Male share among the gender-assigned coauthors of the first and last
/// author (the two endpoints themselves excluded), minus `overall_male_fraction`.
/// nullopt when that pool has no gender-assigned member.
std::optional<double> ma_or(const PaperRecord& paper, const AuthorMap& authors,
                            double overall_male_fraction);
std::optional<double> ma_or(const CitationNetwork& net, Index paper, double overall_male_fraction);

/// Minimum prominence of the top `percentile` of each gender.
struct ProminenceCutoffs {
  std::optional<std::int64_t> female;
  std::optional<std::int64_t> male;
};

/// Per gender, the value at rank ceil(percentile * n) of the descending
/// prominence list of gender-assigned authors (at least rank 1).
ProminenceCutoffs prominence_cutoffs(std::span<const AuthorRecord> authors, double percentile = 0.01);

/// True iff the first or last author reaches their own gender's cutoff.
bool prominent_flag(const PaperRecord& paper, const AuthorMap& authors,
                    const ProminenceCutoffs& cutoffs);
bool prominent_flag(const CitationNetwork& net, Index paper, const ProminenceCutoffs& cutoffs);

struct MatchedPairReplicates {
  std::vector<Index> m_set;                // papers of M that have a MatchKey
  std::vector<bool> matchable;             // per m_set entry: some M' paper shares its key
  /// pairs[r] = (u, v) for every u paired in replicate r, in M order.
  std::vector<std::vector<std::pair<Index, Index>>> pairs;
  std::vector<std::size_t> skipped;        // per replicate
};

/// Replicate r visits M in a random order (StreamRng(seed + r, 0)) and pairs
/// each u with a uniformly drawn unused v in M' sharing u's MatchKey. Papers
/// of either set without a MatchKey are ignored. Throws InputError when M and
/// M' overlap.
MatchedPairReplicates build_matched_pairs(const CitationNetwork& net, std::span<const Index> m,
                                          std::span<const Index> m_prime,
                                          std::size_t n_replicates, std::uint64_t seed);

struct TTest {
  double t = 0.0;  // may be +-infinity
  double p = 1.0;
  bool reject = false;  // p < stats::kAlpha
};

/// t = (mean(deltas_prime) - delta_m) / (s / sqrt(n)) with s the sample
/// standard deviation; two-sided p from Student's t with n - 1 degrees of
/// freedom. Zero spread gives t = 0 when the means agree, +-inf otherwise.
/// Throws InputError with fewer than 2 values.
TTest t_statistic(double delta_m, std::span<const double> deltas_prime);

/// Observed and model-expected citations made by each paper to each category.
struct PaperExpectations {
  std::vector<std::array<std::int64_t, 4>> observed;
  std::vector<std::array<double, 4>> expected;  // mean over replicates
};

PaperExpectations paper_expectations(const CandidateIndex& index, Model model,
                                     std::size_t n_replicates, std::uint64_t base_seed,
                                     unsigned workers);

/// Over/under-citation by a set of citing papers: summed observed over summed
/// expected, minus one. nullopt when the expectation is zero.
std::optional<double> delta(const PaperExpectations& ex, std::span<const Index> papers,
                            GenderCategory g);

enum class Split : std::uint8_t { GenderMMvsWW, VenueType, Prominence, MaOrHalves, RandomHalves };
std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct Population {
  std::string name;  // e.g. "WW_vs_MM", "MM_conference_vs_journal"
  std::vector<Index> m;
  std::vector<Index> m_prime;
};

/// Builds the (M, M') pairs of a split. Only papers with a MatchKey take
/// part. MA_or halves split at the median of defined values; papers at the
/// median go to the bottom half (M'). Random halves shuffle with `seed`.
std::vector<Population> split_populations(const CitationNetwork& net, Split split,
                                          std::uint64_t seed, double prominence_percentile = 0.01);

struct ComparisonRow {
  std::string split;
  std::string population;
  GenderCategory category = GenderCategory::MM;
  bool insufficient = false;  // fewer than 2 matched pairs in some replicate
  std::optional<double> delta_m;
  std::optional<double> delta_ref_mean;
  std::optional<double> delta_ref_std;
  std::optional<TTest> test;
  double mean_pairs = 0.0;
  double mean_skipped = 0.0;
};

struct CompareOptions {
  std::size_t n_match_replicates = 100;
  std::uint64_t seed = 0;
  double prominence_percentile = 0.01;
};

/// Delta of M is taken over the papers of M that have at least one partner
/// candidate; each replicate's Delta of M'_i over its matched partners.
std::vector<ComparisonRow> compare_populations(const CitationNetwork& net,
                                               const PaperExpectations& ex, Split split,
                                               const CompareOptions& options);

/// CSV `split,population,category,delta_pct,delta_ref_pct,delta_ref_std,t,p,reject`.
void write_comparison(std::ostream& out, std::span<const ComparisonRow> rows);

}  // namespace citegap::matching
