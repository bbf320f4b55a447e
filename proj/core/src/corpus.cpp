#include "citegap/corpus.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include "citegap/error.hpp"

namespace citegap {

std::optional<std::string> assign_country(std::span<const std::string> affiliation_countries) {
  std::map<std::string_view, int> freq;
  for (const auto& c : affiliation_countries) ++freq[c];
  std::optional<std::string> best;
  int best_count = 0;
  bool tied = false;
  for (const auto& [country, count] : freq) {
    if (count > best_count) {
      best = std::string(country);
      best_count = count;
      tied = false;
    } else if (count == best_count) {
      tied = true;
    }
  }
  if (tied) return std::nullopt;
  return best;
}

namespace {

const AuthorRecord& lookup_author(const AuthorMap& authors, const std::string& id) {
  auto it = authors.find(id);
  if (it == authors.end()) throw LookupError("unknown author id '" + id + "'");
  return it->second;
}

struct FirstLast {
  const AuthorRecord* first;
  const AuthorRecord* last;
};

// Both endpoints resolved and eligible, or nullopt.
std::optional<FirstLast> eligible_first_last(const PaperRecord& paper, const AuthorMap& authors) {
  if (paper.author_ids.empty()) return std::nullopt;
  const AuthorRecord& first = lookup_author(authors, paper.author_ids.front());
  const AuthorRecord& last = lookup_author(authors, paper.author_ids.back());
  if (!first.gender || !last.gender || !first.country || !last.country) return std::nullopt;
  if (*first.country != *last.country) return std::nullopt;
  return FirstLast{&first, &last};
}

}  // namespace

std::optional<GenderCategory> assign_gender_category(const PaperRecord& paper,
                                                     const AuthorMap& authors) {
  for (const auto& id : paper.author_ids) lookup_author(authors, id);
  auto fl = eligible_first_last(paper, authors);
  if (!fl) return std::nullopt;
  return make_category(*fl->first->gender, *fl->last->gender);
}

std::optional<std::string> assign_paper_country(const PaperRecord& paper,
                                                const AuthorMap& authors) {
  auto fl = eligible_first_last(paper, authors);
  if (!fl) return std::nullopt;
  return fl->first->country;
}

void compute_prominence_and_coauthors(std::span<const PaperRecord> papers,
                                      std::span<const CitationEdge> edges, AuthorMap& authors) {
  std::unordered_map<std::string_view, std::size_t> paper_idx;
  paper_idx.reserve(papers.size());
  for (std::size_t i = 0; i < papers.size(); ++i) paper_idx.emplace(papers[i].paper_id, i);

  std::vector<std::int64_t> in_cites(papers.size(), 0);
  std::unordered_set<std::string> seen_edges;
  for (const auto& e : edges) {
    if (e.src == e.dst) continue;
    auto s = paper_idx.find(e.src);
    auto d = paper_idx.find(e.dst);
    if (s == paper_idx.end() || d == paper_idx.end()) continue;
    if (!seen_edges.insert(e.src + '\n' + e.dst).second) continue;
    ++in_cites[d->second];
  }

  for (auto& [id, a] : authors) {
    a.prominence = 0;
    a.coauthors.clear();
  }
  std::unordered_map<std::string, std::set<std::string>> co;
  for (std::size_t i = 0; i < papers.size(); ++i) {
    const auto& p = papers[i];
    std::vector<std::string> unique_ids = p.author_ids;
    std::sort(unique_ids.begin(), unique_ids.end());
    unique_ids.erase(std::unique(unique_ids.begin(), unique_ids.end()), unique_ids.end());
    for (const auto& id : unique_ids) {
      auto [it, inserted] = authors.try_emplace(id);
      if (inserted) it->second.author_id = id;
      it->second.prominence += in_cites[i];
      auto& set = co[id];
      for (const auto& other : unique_ids)
        if (other != id) set.insert(other);
    }
  }
  for (auto& [id, set] : co) authors[id].coauthors.assign(set.begin(), set.end());
}

// ---------------------------------------------------------------------------

AuthorTable::AuthorTable(const AuthorMap& authors) {
  records_.reserve(authors.size());
  for (const auto& [id, a] : authors) records_.push_back(a);
  std::sort(records_.begin(), records_.end(),
            [](const AuthorRecord& x, const AuthorRecord& y) { return x.author_id < y.author_id; });
  by_id_.reserve(records_.size());
  for (Index i = 0; i < records_.size(); ++i) by_id_.emplace(records_[i].author_id, i);
  coauthor_off_.reserve(records_.size() + 1);
  for (const auto& r : records_) {
    for (const auto& c : r.coauthors)
      if (auto it = by_id_.find(c); it != by_id_.end()) coauthor_idx_.push_back(it->second);
    std::sort(coauthor_idx_.begin() + static_cast<std::ptrdiff_t>(coauthor_off_.back()),
              coauthor_idx_.end());
    coauthor_off_.push_back(coauthor_idx_.size());
  }
}

std::optional<AuthorTable::Index> AuthorTable::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

AuthorMap AuthorTable::to_map() const {
  AuthorMap map;
  for (const auto& r : records_) map.emplace(r.author_id, r);
  return map;
}

// ---------------------------------------------------------------------------

CitationNetwork::CitationNetwork(std::vector<PaperRecord> papers,
                                 std::vector<std::pair<std::string, std::string>> edges,
                                 std::shared_ptr<const AuthorTable> authors, bool conflict_rules)
    : papers_(std::move(papers)), authors_(std::move(authors)), conflict_rules_(conflict_rules) {
  if (!authors_) authors_ = std::make_shared<AuthorTable>();
  std::sort(papers_.begin(), papers_.end(),
            [](const PaperRecord& a, const PaperRecord& b) { return a.paper_id < b.paper_id; });
  by_id_.reserve(papers_.size());
  for (Index i = 0; i < papers_.size(); ++i)
    if (!by_id_.emplace(papers_[i].paper_id, i).second)
      throw IngestError("duplicate paper_id '" + papers_[i].paper_id + "'");

  edges_.reserve(edges.size());
  for (const auto& [s, d] : edges) {
    auto si = find(s);
    auto di = find(d);
    if (!si || !di) throw InputError("edge " + s + " -> " + d + " references an unknown paper");
    if (*si == *di) throw InputError("self-citation edge on paper '" + s + "'");
    edges_.push_back({*si, *di});
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  edge_off_.assign(papers_.size() + 1, 0);
  in_degree_.assign(papers_.size(), 0);
  for (const auto& e : edges_) {
    ++edge_off_[e.src + 1];
    ++in_degree_[e.dst];
  }
  std::partial_sum(edge_off_.begin(), edge_off_.end(), edge_off_.begin());

  paper_author_off_.reserve(papers_.size() + 1);
  paper_author_off_.push_back(0);
  for (const auto& p : papers_) {
    for (const auto& id : p.author_ids) {
      auto a = authors_->find(id);
      if (!a) throw LookupError("unknown author id '" + id + "' on paper '" + p.paper_id + "'");
      paper_author_idx_.push_back(*a);
    }
    paper_author_off_.push_back(paper_author_idx_.size());
  }
}

std::optional<CitationNetwork::Index> CitationNetwork::find(std::string_view paper_id) const {
  auto it = by_id_.find(std::string(paper_id));
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

CitationNetwork::Index CitationNetwork::index_of(std::string_view paper_id) const {
  auto i = find(paper_id);
  if (!i) throw LookupError("unknown paper id '" + std::string(paper_id) + "'");
  return *i;
}

std::vector<CitationEdge> CitationNetwork::citation_edges() const {
  std::vector<CitationEdge> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back({papers_[e.src].paper_id, papers_[e.dst].paper_id});
  return out;
}

// ---------------------------------------------------------------------------

CitationNetwork filter_citations(std::span<const PaperRecord> papers,
                                 std::span<const CitationEdge> edges, const AuthorMap& authors,
                                 FilterOptions options) {
  std::unordered_map<std::string_view, std::size_t> kept;
  for (std::size_t i = 0; i < papers.size(); ++i) {
    const auto& p = papers[i];
    if (p.country && p.gender_category && p.venue_rank) kept.emplace(p.paper_id, i);
  }

  // Coauthor pool of the first and last author of each citing paper, built on demand.
  std::unordered_map<std::size_t, std::unordered_set<std::string_view>> pool_cache;
  auto coauthor_pool = [&](std::size_t u) -> const std::unordered_set<std::string_view>& {
    auto [it, inserted] = pool_cache.try_emplace(u);
    if (inserted) {
      const auto& ids = papers[u].author_ids;
      for (const std::string* endpoint : {&ids.front(), &ids.back()}) {
        auto a = authors.find(*endpoint);
        if (a == authors.end()) continue;
        for (const auto& c : a->second.coauthors) it->second.insert(c);
      }
    }
    return it->second;
  };

  std::vector<std::pair<std::string, std::string>> surviving;
  std::unordered_set<std::string_view> touched;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& e : edges) {
    auto s = kept.find(e.src);
    auto d = kept.find(e.dst);
    if (s == kept.end() || d == kept.end() || s->second == d->second) continue;
    if (!seen.insert((static_cast<std::uint64_t>(s->second) << 32) | d->second).second) continue;
    const PaperRecord& u = papers[s->second];
    const PaperRecord& v = papers[d->second];
    if (v.pub_date < years_before(u.pub_date, kCitationWindowYears)) continue;  // (i)
    if (u.year < kFirstCitingYear) continue;                                   // (iv)
    if (!options.include_self_citations) {
      bool conflict = false;
      for (const auto& a : v.author_ids) {
        if (std::find(u.author_ids.begin(), u.author_ids.end(), a) != u.author_ids.end()) {
          conflict = true;  // (ii)
          break;
        }
      }
      if (!conflict) {
        const auto& pool = coauthor_pool(s->second);
        for (const auto& a : v.author_ids)
          if (pool.contains(a)) {
            conflict = true;  // (iii)
            break;
          }
      }
      if (conflict) continue;
    }
    surviving.emplace_back(u.paper_id, v.paper_id);
    touched.insert(u.paper_id);
    touched.insert(v.paper_id);
  }

  std::vector<PaperRecord> out_papers;
  for (const auto& p : papers) {
    if (!kept.contains(p.paper_id)) continue;
    if (!options.keep_isolated && !touched.contains(p.paper_id)) continue;
    out_papers.push_back(p);
  }
  return CitationNetwork(std::move(out_papers), std::move(surviving),
                         std::make_shared<AuthorTable>(authors), !options.include_self_citations);
}

CitationNetwork build_network(std::vector<PaperRecord> papers, std::span<const CitationEdge> edges,
                              std::vector<AuthorRecord> authors, FilterOptions options,
                              BuildReport* report) {
  BuildReport rep;
  rep.papers_in = papers.size();
  rep.edges_in = edges.size();
  rep.authors_in = authors.size();

  for (auto& a : authors)
    if (!a.country && !a.affiliation_countries.empty())
      a.country = assign_country(a.affiliation_countries);
  AuthorMap map = make_author_map(std::move(authors));
  compute_prominence_and_coauthors(papers, edges, map);

  for (auto& p : papers) {
    p.gender_category = assign_gender_category(p, map);
    p.country = assign_paper_country(p, map);
    if (p.gender_category) ++rep.papers_categorized;
  }
  CitationNetwork net = filter_citations(papers, edges, map, options);
  rep.papers_out = net.size();
  rep.edges_out = net.edge_count();
  if (report) *report = rep;
  return net;
}

}  // namespace citegap
