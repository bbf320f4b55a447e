#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "citegap/corpus.hpp"
#include "citegap/error.hpp"
#include "citegap/types.hpp"

namespace citegap {

/// Attributes a homophilic replacement must share with the original target.
struct AttributeKey {
  std::string country;
  std::string topic_id;
  VenueRank venue_rank = VenueRank::AStar;

  friend bool operator==(const AttributeKey&, const AttributeKey&) = default;
  friend auto operator<=>(const AttributeKey&, const AttributeKey&) = default;
};

/// Throws InputError when the paper lacks a country or venue rank.
AttributeKey attribute_key(const PaperRecord& paper);

/// floor(ln(c + 1))
std::uint32_t log_bin(std::uint64_t c);

/// Citations received so far in a preferential-draws run. `step` is the date
/// rank of the citing paper being processed; `counts` holds citations placed
/// by all papers of lower rank.
struct PdState {
  std::vector<std::uint32_t> counts;  // by paper index
  std::uint32_t step = 0;
};

/// Immutable lookup structure over a network, shared by all replicates.
///
/// Papers are ordered by (pub_date, paper_id); the position in that order is
/// the paper's date rank. The candidates of a citing paper i are the papers
/// whose date lies in [date(i) - 10 years, date(i)], minus i itself and, when
/// the network applies conflict rules, minus every paper with an author who
/// is an author of i or a coauthor of i's first or last author.
class CandidateIndex {
 public:
  using Index = CitationNetwork::Index;

  explicit CandidateIndex(const CitationNetwork& net);

  const CitationNetwork& network() const { return *net_; }

  Index paper_at_rank(std::uint32_t rank) const { return order_[rank]; }
  std::uint32_t rank_of(Index i) const { return rank_[i]; }

  std::size_t bucket_count() const { return buckets_.size(); }
  std::uint32_t bucket_of(Index i) const { return bucket_of_[i]; }
  const AttributeKey& bucket_key(std::uint32_t b) const { return bucket_keys_[b]; }
  /// Date ranks of the bucket members, ascending.
  std::span<const std::uint32_t> bucket(std::uint32_t b) const { return buckets_[b]; }

  /// Date-rank window [first, last) of papers citable by i by date alone.
  std::pair<std::uint32_t, std::uint32_t> window(Index i) const { return window_[i]; }

  /// Sorted date ranks removed from i's window (i itself plus conflicts).
  std::vector<std::uint32_t> excluded_ranks(Index i) const;

  // Candidate sets as sorted paper indices.
  std::vector<Index> rd_candidates(Index i) const;
  std::vector<Index> hd_candidates(Index i, Index j) const;
  std::vector<Index> pd_candidates(Index i, Index j, std::span<const std::uint32_t> counts) const;

 private:
  std::vector<std::uint32_t> compute_excluded(Index i) const;

  const CitationNetwork* net_;
  std::vector<Index> order_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> window_;
  std::vector<std::uint32_t> bucket_of_;
  std::vector<AttributeKey> bucket_keys_;
  std::vector<std::vector<std::uint32_t>> buckets_;
  std::vector<std::vector<Index>> author_papers_;
  // Excluded ranks of every paper with out-edges, CSR by paper index.
  std::vector<std::size_t> excl_off_;
  std::vector<std::uint32_t> excl_;
};

/// Candidate sets by paper id, as sorted paper ids. Each call builds a
/// temporary CandidateIndex; loops should use the CandidateIndex methods.
std::vector<std::string> eligible_targets_rd(const CitationNetwork& net, std::string_view i);
std::vector<std::string> eligible_targets_hd(const CitationNetwork& net, std::string_view i,
                                             std::string_view j);
std::vector<std::string> eligible_targets_pd(const CitationNetwork& net, const PdState& state,
                                             std::string_view j);

struct DrawTrace {
  std::uint32_t replicate = 0;
  CitationNetwork::Index src = 0;
  CitationNetwork::Index orig_dst = 0;
  CitationNetwork::Index new_dst = 0;
  // Bins of the original and drawn target; preferential draws only.
  std::optional<std::uint32_t> bin_orig;
  std::optional<std::uint32_t> bin_new;
};

struct RandomizedNetwork {
  /// Edge k replaces original edge k; sources are unchanged. May hold duplicates.
  std::vector<CitationNetwork::Edge> edges;
  Model model = Model::RD;
  std::uint64_t seed = 0;
  std::size_t fallback_count = 0;
};

/// Randomizes every edge of the network under `model`.
///
/// Edge k draws from StreamRng(seed, k). Random and homophilic draws are
/// independent per edge; preferential draws visit citing papers in date-rank
/// order and see the counts placed by earlier citing papers only. An empty
/// candidate set keeps the original edge and counts a fallback. When `trace`
/// is given, one entry per edge is appended with replicate number 0.
RandomizedNetwork randomize(const CandidateIndex& index, Model model, std::uint64_t seed,
                            std::vector<DrawTrace>* trace = nullptr);
RandomizedNetwork randomize(const CitationNetwork& net, Model model, std::uint64_t seed);

inline constexpr const char* kPdTieBreak = "pub_date,paper_id";

/// CSV `replicate,src,orig_dst,new_dst,bin_orig,bin_new` with paper ids.
void write_draw_trace(std::ostream& out, const CitationNetwork& net,
                      std::span<const DrawTrace> trace);

/// Runs replicates r = 0..n-1 with seed base_seed + r on up to `workers`
/// threads and returns tabulate(randomized, r) in replicate order. The result
/// does not depend on the worker count. `tabulate` must be safe to call
/// concurrently.
template <class Tabulate>
auto run_replicates(const CandidateIndex& index, Model model, std::size_t n_replicates,
                    std::uint64_t base_seed, unsigned workers, Tabulate&& tabulate)
    -> std::vector<decltype(tabulate(std::declval<const RandomizedNetwork&>(), std::size_t{}))> {
  using Summary = decltype(tabulate(std::declval<const RandomizedNetwork&>(), std::size_t{}));
  if (n_replicates < 1) throw InputError("n_replicates must be at least 1");
  std::vector<std::optional<Summary>> slots(n_replicates);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= n_replicates) return;
      try {
        const RandomizedNetwork rn = randomize(index, model, base_seed + r);
        slots[r].emplace(tabulate(rn, r));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_replicates);
      }
    }
  };

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n_replicates));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Summary> out;
  out.reserve(n_replicates);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace citegap
