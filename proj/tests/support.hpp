#pragma once

#include <algorithm>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citegap/corpus.hpp"
#include "citegap/nullmodels.hpp"
#include "citegap/types.hpp"

namespace citegap::testing {

inline PaperRecord make_paper(std::string id, std::string_view date, std::vector<std::string> authors,
                              std::optional<GenderCategory> category = GenderCategory::MM,
                              std::string country = "US", std::string topic = "t1",
                              VenueRank rank = VenueRank::A) {
  PaperRecord p;
  p.paper_id = std::move(id);
  p.title = "Title of " + p.paper_id;
  p.pub_date = parse_date(date);
  p.year = year_of(p.pub_date);
  p.venue_id = "V1";
  p.venue_type = static_cast<int>(rank) < 4 ? VenueType::Conference : VenueType::Journal;
  p.venue_rank = rank;
  p.country = std::move(country);
  p.topic_id = std::move(topic);
  p.subfield_id = "s1";
  p.author_ids = std::move(authors);
  p.gender_category = category;
  return p;
}

inline AuthorRecord make_author(std::string id, std::optional<Gender> gender,
                                std::optional<std::string> country = "US") {
  AuthorRecord a;
  a.author_id = id;
  a.full_name = "Name " + id;
  a.country = std::move(country);
  a.gender = gender;
  a.first_pub_year = 2000;
  return a;
}

/// Small hand-built corpus that skips the ingest filters.
struct Fixture {
  std::vector<PaperRecord> papers;
  std::vector<AuthorRecord> authors;
  std::vector<CitationEdge> edges;

  AuthorMap author_map() const {
    AuthorMap m = make_author_map(authors);
    compute_prominence_and_coauthors(papers, edges, m);
    return m;
  }

  CitationNetwork network(bool conflict_rules = true) const {
    auto table = std::make_shared<const AuthorTable>(author_map());
    std::vector<std::pair<std::string, std::string>> e;
    for (const auto& c : edges) e.emplace_back(c.src, c.dst);
    return CitationNetwork(papers, std::move(e), std::move(table), conflict_rules);
  }
};

/// Candidate set of citing paper i by direct rule evaluation over all papers.
inline std::vector<CitationNetwork::Index> brute_force_rd(const CitationNetwork& net,
                                                          CitationNetwork::Index i) {
  const auto& pi = net.paper(i);
  std::set<std::string> blocked(pi.author_ids.begin(), pi.author_ids.end());
  if (net.conflict_rules()) {
    const AuthorMap authors = net.authors().to_map();
    for (const auto* end : {&pi.author_ids.front(), &pi.author_ids.back()}) {
      const auto& co = authors.at(*end).coauthors;
      blocked.insert(co.begin(), co.end());
    }
  }
  std::vector<CitationNetwork::Index> out;
  for (CitationNetwork::Index j = 0; j < net.size(); ++j) {
    if (j == i) continue;
    const auto& pj = net.paper(j);
    if (pj.pub_date > pi.pub_date) continue;
    if (pj.pub_date < years_before(pi.pub_date, 10)) continue;
    if (net.conflict_rules()) {
      bool conflict = false;
      for (const auto& a : pj.author_ids) conflict = conflict || blocked.contains(a);
      if (conflict) continue;
    }
    out.push_back(j);
  }
  return out;
}

inline std::vector<CitationNetwork::Index> brute_force_hd(const CitationNetwork& net,
                                                          CitationNetwork::Index i,
                                                          CitationNetwork::Index j) {
  std::vector<CitationNetwork::Index> out;
  for (auto k : brute_force_rd(net, i))
    if (attribute_key(net.paper(k)) == attribute_key(net.paper(j))) out.push_back(k);
  if (!std::binary_search(out.begin(), out.end(), j)) {
    out.push_back(j);
    std::sort(out.begin(), out.end());
  }
  return out;
}

}  // namespace citegap::testing
