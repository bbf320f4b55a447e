#include "citegap/matching.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>

#include "citegap/csv.hpp"
#include "citegap/error.hpp"
#include "citegap/rng.hpp"

namespace citegap::matching {

std::optional<MatchKey> match_key(const CitationNetwork& net, Index paper) {
  const auto& p = net.paper(paper);
  const std::uint32_t out = net.out_degree(paper);
  if (out == 0 || !p.country) return std::nullopt;
  return MatchKey{p.year, *p.country, p.subfield_id, out};
}

double overall_male_fraction(const CitationNetwork& net) {
  std::vector<bool> seen(net.authors().size(), false);
  std::size_t gendered = 0, male = 0;
  for (Index i = 0; i < net.size(); ++i)
    for (auto a : net.authors_of(i)) {
      if (seen[a]) continue;
      seen[a] = true;
      const auto& g = net.authors().record(a).gender;
      if (!g) continue;
      ++gendered;
      if (*g == Gender::Male) ++male;
    }
  if (gendered == 0) return 0.0;
  return static_cast<double>(male) / static_cast<double>(gendered);
}

namespace {

std::optional<double> male_share_minus(std::size_t male, std::size_t gendered, double overall) {
  if (gendered == 0) return std::nullopt;
  return static_cast<double>(male) / static_cast<double>(gendered) - overall;
}

}  // namespace

std::optional<double> ma_or(const PaperRecord& paper, const AuthorMap& authors,
                            double overall_male_fraction) {
  if (paper.author_ids.empty()) return std::nullopt;
  const std::string& first = paper.author_ids.front();
  const std::string& last = paper.author_ids.back();
  std::set<std::string> pool;
  for (const std::string* endpoint : {&first, &last}) {
    auto it = authors.find(*endpoint);
    if (it == authors.end()) throw LookupError("unknown author id '" + *endpoint + "'");
    pool.insert(it->second.coauthors.begin(), it->second.coauthors.end());
  }
  pool.erase(first);
  pool.erase(last);
  std::size_t gendered = 0, male = 0;
  for (const auto& id : pool) {
    auto it = authors.find(id);
    if (it == authors.end() || !it->second.gender) continue;
    ++gendered;
    if (*it->second.gender == Gender::Male) ++male;
  }
  return male_share_minus(male, gendered, overall_male_fraction);
}

std::optional<double> ma_or(const CitationNetwork& net, Index paper, double overall_male_fraction) {
  const auto authors = net.authors_of(paper);
  if (authors.empty()) return std::nullopt;
  const auto first = authors.front();
  const auto last = authors.back();
  std::vector<AuthorTable::Index> pool;
  for (auto endpoint : {first, last}) {
    auto co = net.authors().coauthors(endpoint);
    pool.insert(pool.end(), co.begin(), co.end());
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::size_t gendered = 0, male = 0;
  for (auto a : pool) {
    if (a == first || a == last) continue;
    const auto& g = net.authors().record(a).gender;
    if (!g) continue;
    ++gendered;
    if (*g == Gender::Male) ++male;
  }
  return male_share_minus(male, gendered, overall_male_fraction);
}

ProminenceCutoffs prominence_cutoffs(std::span<const AuthorRecord> authors, double percentile) {
  if (!(percentile > 0.0 && percentile <= 1.0)) throw InputError("percentile must be in (0, 1]");
  std::vector<std::int64_t> female, male;
  for (const auto& a : authors) {
    if (!a.gender) continue;
    (*a.gender == Gender::Female ? female : male).push_back(a.prominence);
  }
  auto cutoff = [&](std::vector<std::int64_t>& v) -> std::optional<std::int64_t> {
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end(), std::greater<>());
    auto k = static_cast<std::size_t>(std::ceil(percentile * static_cast<double>(v.size())));
    k = std::clamp<std::size_t>(k, 1, v.size());
    return v[k - 1];
  };
  return {cutoff(female), cutoff(male)};
}

namespace {

bool reaches(const AuthorRecord& a, const ProminenceCutoffs& cutoffs) {
  if (!a.gender) return false;
  const auto& c = *a.gender == Gender::Female ? cutoffs.female : cutoffs.male;
  return c && a.prominence >= *c;
}

}  // namespace

bool prominent_flag(const PaperRecord& paper, const AuthorMap& authors,
                    const ProminenceCutoffs& cutoffs) {
  if (paper.author_ids.empty()) return false;
  for (const std::string* id : {&paper.author_ids.front(), &paper.author_ids.back()}) {
    auto it = authors.find(*id);
    if (it == authors.end()) throw LookupError("unknown author id '" + *id + "'");
    if (reaches(it->second, cutoffs)) return true;
  }
  return false;
}

bool prominent_flag(const CitationNetwork& net, Index paper, const ProminenceCutoffs& cutoffs) {
  const auto authors = net.authors_of(paper);
  if (authors.empty()) return false;
  return reaches(net.authors().record(authors.front()), cutoffs) ||
         reaches(net.authors().record(authors.back()), cutoffs);
}

// ---------------------------------------------------------------------------

MatchedPairReplicates build_matched_pairs(const CitationNetwork& net, std::span<const Index> m,
                                          std::span<const Index> m_prime,
                                          std::size_t n_replicates, std::uint64_t seed) {
  {
    std::vector<Index> a(m.begin(), m.end()), b(m_prime.begin(), m_prime.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<Index> common;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
    if (!common.empty()) throw InputError("matched-pair populations overlap");
  }

  std::map<MatchKey, std::uint32_t> key_ids;
  std::vector<std::vector<Index>> pools;
  for (Index v : m_prime) {
    auto key = match_key(net, v);
    if (!key) continue;
    auto [it, inserted] = key_ids.try_emplace(*key, static_cast<std::uint32_t>(pools.size()));
    if (inserted) pools.emplace_back();
    pools[it->second].push_back(v);
  }

  MatchedPairReplicates out;
  std::vector<std::int64_t> m_key;  // pool id per m_set entry, -1 without partners
  for (Index u : m) {
    auto key = match_key(net, u);
    if (!key) continue;
    out.m_set.push_back(u);
    auto it = key_ids.find(*key);
    m_key.push_back(it == key_ids.end() ? std::int64_t{-1} : std::int64_t{it->second});
    out.matchable.push_back(it != key_ids.end());
  }

  out.pairs.resize(n_replicates);
  out.skipped.assign(n_replicates, 0);
  std::vector<std::uint32_t> visit(out.m_set.size());
  std::vector<Index> partner(out.m_set.size());
  std::vector<bool> paired(out.m_set.size());
  for (std::size_t r = 0; r < n_replicates; ++r) {
    StreamRng rng(seed + r, 0);
    for (std::uint32_t k = 0; k < visit.size(); ++k) visit[k] = k;
    shuffle(std::span(visit), rng);
    std::vector<std::vector<Index>> avail = pools;
    std::fill(paired.begin(), paired.end(), false);
    for (auto k : visit) {
      const auto pool_id = m_key[k];
      if (pool_id < 0 || avail[static_cast<std::size_t>(pool_id)].empty()) {
        ++out.skipped[r];
        continue;
      }
      auto& pool = avail[static_cast<std::size_t>(pool_id)];
      const auto pick = static_cast<std::size_t>(rng.below(pool.size()));
      partner[k] = pool[pick];
      pool[pick] = pool.back();
      pool.pop_back();
      paired[k] = true;
    }
    for (std::size_t k = 0; k < out.m_set.size(); ++k)
      if (paired[k]) out.pairs[r].emplace_back(out.m_set[k], partner[k]);
  }
  return out;
}

TTest t_statistic(double delta_m, std::span<const double> deltas_prime) {
  if (deltas_prime.size() < 2) throw InputError("t statistic needs at least two replicate values");
  const auto ms = stats::mean_std(deltas_prime);
  const double n = static_cast<double>(deltas_prime.size());
  const double diff = ms.mean - delta_m;
  TTest out;
  const double s = *ms.sample_std;
  if (s == 0.0) {
    if (diff == 0.0) return out;
    out.t = diff > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity();
  } else {
    out.t = diff / (s / std::sqrt(n));
  }
  out.p = stats::student_t_two_sided_p(out.t, n - 1.0);
  out.reject = out.p < stats::kAlpha;
  return out;
}

// ---------------------------------------------------------------------------

PaperExpectations paper_expectations(const CandidateIndex& index, Model model,
                                     std::size_t n_replicates, std::uint64_t base_seed,
                                     unsigned workers) {
  const CitationNetwork& net = index.network();
  std::vector<std::int8_t> cat(net.size(), -1);
  for (Index i = 0; i < net.size(); ++i)
    if (const auto& c = net.paper(i).gender_category) cat[i] = static_cast<std::int8_t>(index_of(*c));

  PaperExpectations ex;
  ex.observed.assign(net.size(), {});
  for (const auto& e : net.edges())
    if (cat[e.dst] >= 0) ++ex.observed[e.src][static_cast<std::size_t>(cat[e.dst])];

  // Integer sums keep the result independent of replicate completion order.
  std::vector<std::array<std::uint64_t, 4>> sums(net.size(), std::array<std::uint64_t, 4>{});
  std::mutex mutex;
  run_replicates(index, model, n_replicates, base_seed, workers,
                 [&](const RandomizedNetwork& rn, std::size_t) {
                   std::vector<std::array<std::uint32_t, 4>> local(net.size(),
                                                                   std::array<std::uint32_t, 4>{});
                   for (const auto& e : rn.edges)
                     if (cat[e.dst] >= 0) ++local[e.src][static_cast<std::size_t>(cat[e.dst])];
                   std::lock_guard lock(mutex);
                   for (std::size_t i = 0; i < local.size(); ++i)
                     for (std::size_t k = 0; k < 4; ++k) sums[i][k] += local[i][k];
                   return true;
                 });
  ex.expected.resize(net.size());
  for (std::size_t i = 0; i < sums.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k)
      ex.expected[i][k] = static_cast<double>(sums[i][k]) / static_cast<double>(n_replicates);
  return ex;
}

std::optional<double> delta(const PaperExpectations& ex, std::span<const Index> papers,
                            GenderCategory g) {
  const std::size_t k = index_of(g);
  double obs = 0.0, expected = 0.0;
  for (Index i : papers) {
    obs += static_cast<double>(ex.observed[i][k]);
    expected += ex.expected[i][k];
  }
  if (expected == 0.0) return std::nullopt;
  return (obs - expected) / expected;
}

std::string_view to_string(Split s) {
  switch (s) {
    case Split::GenderMMvsWW: return "gender_MM_vs_WW";
    case Split::VenueType: return "venue_type";
    case Split::Prominence: return "prominence";
    case Split::MaOrHalves: return "ma_or_halves";
    case Split::RandomHalves: return "random_halves";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view s) {
  for (auto v : {Split::GenderMMvsWW, Split::VenueType, Split::Prominence, Split::MaOrHalves,
                 Split::RandomHalves})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::vector<Population> split_populations(const CitationNetwork& net, Split split,
                                          std::uint64_t seed, double prominence_percentile) {
  std::array<std::vector<Index>, 4> by_cat;
  for (Index i = 0; i < net.size(); ++i) {
    const auto& c = net.paper(i).gender_category;
    if (c && match_key(net, i)) by_cat[index_of(*c)].push_back(i);
  }
  const auto& mm = by_cat[index_of(GenderCategory::MM)];
  const auto& ww = by_cat[index_of(GenderCategory::WW)];

  std::vector<Population> out;
  if (split == Split::GenderMMvsWW) {
    out.push_back({"WW_vs_MM", ww, mm});
    return out;
  }

  std::optional<ProminenceCutoffs> cutoffs;
  double overall = 0.0;
  if (split == Split::Prominence)
    cutoffs = prominence_cutoffs(net.authors().records(), prominence_percentile);
  if (split == Split::MaOrHalves) overall = overall_male_fraction(net);

  for (auto g : {GenderCategory::MM, GenderCategory::WW}) {
    const auto& papers = g == GenderCategory::MM ? mm : ww;
    const std::string cat(to_string(g));
    Population pop;
    switch (split) {
      case Split::VenueType:
        pop.name = cat + "_conference_vs_journal";
        for (Index i : papers)
          (net.paper(i).venue_type == VenueType::Conference ? pop.m : pop.m_prime).push_back(i);
        break;
      case Split::Prominence:
        pop.name = cat + "_prominent_vs_not";
        for (Index i : papers)
          (prominent_flag(net, i, *cutoffs) ? pop.m : pop.m_prime).push_back(i);
        break;
      case Split::MaOrHalves: {
        pop.name = cat + "_ma_or_top_vs_bottom";
        std::vector<std::pair<double, Index>> defined;
        for (Index i : papers)
          if (auto v = ma_or(net, i, overall)) defined.emplace_back(*v, i);
        if (!defined.empty()) {
          std::vector<double> values;
          for (const auto& d : defined) values.push_back(d.first);
          std::sort(values.begin(), values.end());
          const std::size_t n = values.size();
          const double median =
              n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
          for (const auto& [v, i] : defined) (v > median ? pop.m : pop.m_prime).push_back(i);
        }
        break;
      }
      case Split::RandomHalves: {
        pop.name = cat + "_random_halves";
        std::vector<Index> shuffled = papers;
        StreamRng rng(seed, 0xA11A + index_of(g));
        shuffle(std::span(shuffled), rng);
        const std::size_t half = shuffled.size() / 2;
        pop.m.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(half));
        pop.m_prime.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(half), shuffled.end());
        std::sort(pop.m.begin(), pop.m.end());
        std::sort(pop.m_prime.begin(), pop.m_prime.end());
        break;
      }
      case Split::GenderMMvsWW:
        break;
    }
    out.push_back(std::move(pop));
  }
  return out;
}

std::vector<ComparisonRow> compare_populations(const CitationNetwork& net,
                                               const PaperExpectations& ex, Split split,
                                               const CompareOptions& options) {
  std::vector<ComparisonRow> rows;
  for (const auto& pop : split_populations(net, split, options.seed, options.prominence_percentile)) {
    const auto mp = build_matched_pairs(net, pop.m, pop.m_prime, options.n_match_replicates,
                                        options.seed);
    std::vector<Index> m_matchable;
    for (std::size_t k = 0; k < mp.m_set.size(); ++k)
      if (mp.matchable[k]) m_matchable.push_back(mp.m_set[k]);

    bool insufficient = mp.pairs.empty();
    double pairs_total = 0.0, skipped_total = 0.0;
    std::vector<std::vector<Index>> partners(mp.pairs.size());
    for (std::size_t r = 0; r < mp.pairs.size(); ++r) {
      if (mp.pairs[r].size() < 2) insufficient = true;
      pairs_total += static_cast<double>(mp.pairs[r].size());
      skipped_total += static_cast<double>(mp.skipped[r]);
      for (const auto& [u, v] : mp.pairs[r]) partners[r].push_back(v);
    }

    for (auto g : kGenderCategories) {
      ComparisonRow row;
      row.split = std::string(to_string(split));
      row.population = pop.name;
      row.category = g;
      row.insufficient = insufficient;
      if (!mp.pairs.empty()) {
        row.mean_pairs = pairs_total / static_cast<double>(mp.pairs.size());
        row.mean_skipped = skipped_total / static_cast<double>(mp.pairs.size());
      }
      if (!insufficient) {
        row.delta_m = delta(ex, m_matchable, g);
        std::vector<double> deltas;
        bool defined = true;
        for (const auto& p : partners) {
          auto d = delta(ex, p, g);
          if (!d) {
            defined = false;
            break;
          }
          deltas.push_back(*d);
        }
        if (defined && deltas.size() >= 2) {
          const auto ms = stats::mean_std(deltas);
          row.delta_ref_mean = ms.mean;
          row.delta_ref_std = ms.sample_std;
          if (row.delta_m) row.test = t_statistic(*row.delta_m, deltas);
        }
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_comparison(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "split,population,category,delta_pct,delta_ref_pct,delta_ref_std,t,p,reject\n";
  auto num = [](const std::optional<double>& v, double scale) {
    return v ? fmt::format("{}", *v * scale) : std::string("undefined");
  };
  for (const auto& r : rows) {
    out << csv::escape(r.split) << ',' << csv::escape(r.population) << ',' << to_string(r.category)
        << ',';
    if (r.insufficient) {
      out << "insufficient,insufficient,insufficient,insufficient,insufficient,false\n";
      continue;
    }
    out << num(r.delta_m, 100.0) << ',' << num(r.delta_ref_mean, 100.0) << ','
        << num(r.delta_ref_std, 100.0) << ',';
    if (r.test)
      out << fmt::format("{},{},{}", r.test->t, r.test->p, r.test->reject ? "true" : "false");
    else
      out << "undefined,undefined,false";
    out << '\n';
  }
}

}  // namespace citegap::matching
