#include "citegap/nullmodels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include "citegap/csv.hpp"
#include "citegap/rng.hpp"

namespace citegap {

AttributeKey attribute_key(const PaperRecord& paper) {
  if (!paper.country || !paper.venue_rank)
    throw InputError("paper '" + paper.paper_id + "' lacks country or venue rank");
  return {*paper.country, paper.topic_id, *paper.venue_rank};
}

std::uint32_t log_bin(std::uint64_t c) {
  return static_cast<std::uint32_t>(std::floor(std::log(static_cast<double>(c) + 1.0)));
}

CandidateIndex::CandidateIndex(const CitationNetwork& net) : net_(&net) {
  const std::size_t n = net.size();
  order_.resize(n);
  for (Index i = 0; i < n; ++i) order_[i] = i;
  // Index order is paper_id order, so this is the (pub_date, paper_id) order.
  std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) {
    return net.paper(a).pub_date < net.paper(b).pub_date;
  });
  rank_.resize(n);
  std::vector<Date> dates(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    rank_[order_[r]] = r;
    dates[r] = net.paper(order_[r]).pub_date;
  }

  window_.resize(n);
  for (Index i = 0; i < n; ++i) {
    const Date d = net.paper(i).pub_date;
    const auto lo = std::lower_bound(dates.begin(), dates.end(), years_before(d, kCitationWindowYears));
    const auto hi = std::upper_bound(dates.begin(), dates.end(), d);
    window_[i] = {static_cast<std::uint32_t>(lo - dates.begin()),
                  static_cast<std::uint32_t>(hi - dates.begin())};
  }

  std::map<AttributeKey, std::uint32_t> bucket_ids;
  bucket_of_.resize(n);
  for (std::uint32_t r = 0; r < n; ++r) {
    const Index p = order_[r];
    auto [it, inserted] =
        bucket_ids.try_emplace(attribute_key(net.paper(p)), static_cast<std::uint32_t>(buckets_.size()));
    if (inserted) {
      buckets_.emplace_back();
      bucket_keys_.push_back(it->first);
    }
    bucket_of_[p] = it->second;
    buckets_[it->second].push_back(r);
  }

  author_papers_.resize(net.authors().size());
  for (Index i = 0; i < n; ++i)
    for (auto a : net.authors_of(i))
      if (author_papers_[a].empty() || author_papers_[a].back() != i) author_papers_[a].push_back(i);

  excl_off_.assign(n + 1, 0);
  for (Index i = 0; i < n; ++i) {
    if (net.out_degree(i) > 0) {
      auto ex = compute_excluded(i);
      excl_.insert(excl_.end(), ex.begin(), ex.end());
    }
    excl_off_[i + 1] = excl_.size();
  }
}

std::vector<std::uint32_t> CandidateIndex::compute_excluded(Index i) const {
  std::vector<std::uint32_t> out{rank_[i]};
  if (!net_->conflict_rules()) return out;
  const auto authors = net_->authors_of(i);
  std::vector<AuthorTable::Index> conflict(authors.begin(), authors.end());
  if (!authors.empty()) {
    for (AuthorTable::Index endpoint : {authors.front(), authors.back()}) {
      auto co = net_->authors().coauthors(endpoint);
      conflict.insert(conflict.end(), co.begin(), co.end());
    }
  }
  std::sort(conflict.begin(), conflict.end());
  conflict.erase(std::unique(conflict.begin(), conflict.end()), conflict.end());
  for (auto a : conflict)
    for (Index p : author_papers_[a]) out.push_back(rank_[p]);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::uint32_t> CandidateIndex::excluded_ranks(Index i) const {
  if (net_->out_degree(i) > 0)
    return {excl_.begin() + static_cast<std::ptrdiff_t>(excl_off_[i]),
            excl_.begin() + static_cast<std::ptrdiff_t>(excl_off_[i + 1])};
  return compute_excluded(i);
}

std::vector<CandidateIndex::Index> CandidateIndex::rd_candidates(Index i) const {
  const auto ex = excluded_ranks(i);
  const auto [lo, hi] = window_[i];
  std::vector<Index> out;
  for (std::uint32_t r = lo; r < hi; ++r)
    if (!std::binary_search(ex.begin(), ex.end(), r)) out.push_back(order_[r]);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<CandidateIndex::Index> CandidateIndex::hd_candidates(Index i, Index j) const {
  std::vector<Index> out;
  for (Index c : rd_candidates(i))
    if (bucket_of_[c] == bucket_of_[j]) out.push_back(c);
  if (!std::binary_search(out.begin(), out.end(), j))
    out.insert(std::lower_bound(out.begin(), out.end(), j), j);
  return out;
}

std::vector<CandidateIndex::Index> CandidateIndex::pd_candidates(
    Index i, Index j, std::span<const std::uint32_t> counts) const {
  if (counts.size() != net_->size()) throw InputError("count vector does not match network size");
  const std::uint32_t target = log_bin(counts[j]);
  std::vector<Index> out;
  for (Index c : hd_candidates(i, j))
    if (c == j || log_bin(counts[c]) == target) out.push_back(c);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> to_ids(const CitationNetwork& net,
                                const std::vector<CitationNetwork::Index>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(net.paper(i).paper_id);
  return out;
}

}  // namespace

std::vector<std::string> eligible_targets_rd(const CitationNetwork& net, std::string_view i) {
  const auto src = net.index_of(i);
  return to_ids(net, CandidateIndex(net).rd_candidates(src));
}

std::vector<std::string> eligible_targets_hd(const CitationNetwork& net, std::string_view i,
                                             std::string_view j) {
  const auto src = net.index_of(i);
  const auto dst = net.index_of(j);
  return to_ids(net, CandidateIndex(net).hd_candidates(src, dst));
}

std::vector<std::string> eligible_targets_pd(const CitationNetwork& net, const PdState& state,
                                             std::string_view j) {
  const auto dst = net.index_of(j);
  if (state.step >= net.size()) throw InputError("PD step out of range");
  CandidateIndex index(net);
  return to_ids(net, index.pd_candidates(index.paper_at_rank(state.step), dst, state.counts));
}

// ---------------------------------------------------------------------------

namespace {

using Index = CitationNetwork::Index;

// Excluded ranks of i restricted to its window.
std::span<const std::uint32_t> excluded_in_window(std::span<const std::uint32_t> ex,
                                                  std::uint32_t lo, std::uint32_t hi) {
  auto a = std::lower_bound(ex.begin(), ex.end(), lo);
  auto b = std::lower_bound(a, ex.end(), hi);
  return {a, b};
}

}  // namespace

RandomizedNetwork randomize(const CandidateIndex& index, Model model, std::uint64_t seed,
                            std::vector<DrawTrace>* trace) {
  const CitationNetwork& net = index.network();
  RandomizedNetwork out;
  out.model = model;
  out.seed = seed;
  out.edges.assign(net.edges().begin(), net.edges().end());
  if (trace) trace->reserve(trace->size() + net.edge_count());

  std::vector<std::uint32_t> ex_buffer;
  std::vector<std::uint32_t> skip;  // excluded positions within a bucket

  if (model == Model::RD || model == Model::HD) {
    for (Index i = 0; i < net.size(); ++i) {
      if (net.out_degree(i) == 0) continue;
      ex_buffer = index.excluded_ranks(i);
      const auto [lo, hi] = index.window(i);
      const auto ex = excluded_in_window(ex_buffer, lo, hi);
      const std::size_t base = net.first_edge(i);
      const auto edges = net.out_edges(i);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        const Index j = edges[k].dst;
        StreamRng rng(seed, base + k);
        Index drawn = j;
        if (model == Model::RD) {
          const std::uint64_t count = (hi - lo) - ex.size();
          if (count == 0) {
            ++out.fallback_count;
          } else {
            std::uint64_t pos = lo + rng.below(count);
            for (auto e : ex) {
              if (e <= pos)
                ++pos;
              else
                break;
            }
            drawn = index.paper_at_rank(static_cast<std::uint32_t>(pos));
          }
        } else {
          const std::uint32_t b = index.bucket_of(j);
          const auto members = index.bucket(b);
          const auto a = static_cast<std::uint64_t>(
              std::lower_bound(members.begin(), members.end(), lo) - members.begin());
          const auto z = static_cast<std::uint64_t>(
              std::lower_bound(members.begin(), members.end(), hi) - members.begin());
          skip.clear();
          for (auto e : ex)
            if (index.bucket_of(index.paper_at_rank(e)) == b)
              skip.push_back(static_cast<std::uint32_t>(
                  std::lower_bound(members.begin(), members.end(), e) - members.begin()));
          const std::uint64_t count = (z - a) - skip.size();
          const std::uint32_t rj = index.rank_of(j);
          const bool j_inside =
              rj >= lo && rj < hi && !std::binary_search(ex.begin(), ex.end(), rj);
          const std::uint64_t total = count + (j_inside ? 0 : 1);
          const std::uint64_t pick = rng.below(total);
          if (pick < count) {
            std::uint64_t pos = a + pick;
            for (auto s : skip) {
              if (s <= pos)
                ++pos;
              else
                break;
            }
            drawn = index.paper_at_rank(members[pos]);
          }
        }
        out.edges[base + k].dst = drawn;
        if (trace) trace->push_back({0, i, j, drawn, std::nullopt, std::nullopt});
      }
    }
    return out;
  }

  // Preferential draws.
  std::vector<std::uint32_t> counts(net.size(), 0);
  std::vector<std::uint32_t> bins(net.size(), 0);
  std::vector<Index> pending;
  std::vector<Index> pool;
  for (std::uint32_t r = 0; r < net.size(); ++r) {
    const Index i = index.paper_at_rank(r);
    if (net.out_degree(i) == 0) continue;
    ex_buffer = index.excluded_ranks(i);
    const auto [lo, hi] = index.window(i);
    const auto ex = excluded_in_window(ex_buffer, lo, hi);
    const std::size_t base = net.first_edge(i);
    const auto edges = net.out_edges(i);
    pending.clear();
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const Index j = edges[k].dst;
      StreamRng rng(seed, base + k);
      const std::uint32_t target_bin = bins[j];
      const auto members = index.bucket(index.bucket_of(j));
      auto it = std::lower_bound(members.begin(), members.end(), lo);
      auto ex_it = ex.begin();
      pool.clear();
      bool has_j = false;
      for (; it != members.end() && *it < hi; ++it) {
        while (ex_it != ex.end() && *ex_it < *it) ++ex_it;
        if (ex_it != ex.end() && *ex_it == *it) continue;
        const Index c = index.paper_at_rank(*it);
        if (bins[c] != target_bin) continue;
        pool.push_back(c);
        has_j = has_j || c == j;
      }
      if (!has_j) pool.push_back(j);
      const Index drawn = pool[rng.below(pool.size())];
      out.edges[base + k].dst = drawn;
      pending.push_back(drawn);
      if (trace) trace->push_back({0, i, j, drawn, target_bin, bins[drawn]});
    }
    for (Index d : pending) bins[d] = log_bin(++counts[d]);
  }
  return out;
}

RandomizedNetwork randomize(const CitationNetwork& net, Model model, std::uint64_t seed) {
  return randomize(CandidateIndex(net), model, seed);
}

void write_draw_trace(std::ostream& out, const CitationNetwork& net,
                      std::span<const DrawTrace> trace) {
  out << "replicate,src,orig_dst,new_dst,bin_orig,bin_new\n";
  for (const auto& t : trace) {
    out << t.replicate << ',' << csv::escape(net.paper(t.src).paper_id) << ','
        << csv::escape(net.paper(t.orig_dst).paper_id) << ','
        << csv::escape(net.paper(t.new_dst).paper_id) << ',';
    if (t.bin_orig) out << *t.bin_orig;
    out << ',';
    if (t.bin_new) out << *t.bin_new;
    out << '\n';
  }
}

}  // namespace citegap
