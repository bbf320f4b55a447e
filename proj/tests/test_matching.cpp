#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "citegap/error.hpp"
#include "citegap/matching.hpp"
#include "citegap/synthgen.hpp"
#include "support.hpp"

namespace citegap::matching {
namespace {

using testing::make_author;
using testing::make_paper;

TEST(MaOr, Examples) {
  AuthorMap authors;
  auto add = [&](std::string id, std::optional<Gender> g, std::vector<std::string> co) {
    auto a = make_author(id, g);
    a.coauthors = std::move(co);
    authors[id] = a;
  };
  add("f", Gender::Female, {"m1", "m2", "l"});
  add("l", Gender::Male, {"f", "m3"});
  add("m1", Gender::Male, {});
  add("m2", Gender::Male, {});
  add("m3", Gender::Male, {});
  const auto p = make_paper("P", "2015-01-01", {"f", "l"});
  EXPECT_NEAR(*ma_or(p, authors, 0.81), 0.19, 1e-12);

  add("solo", Gender::Male, {});
  EXPECT_FALSE(ma_or(make_paper("S", "2015-01-01", {"solo"}), authors, 0.81).has_value());

  add("g", Gender::Male, {"w1", "w2", "m1", "m2", "x"});
  add("w1", Gender::Female, {});
  add("w2", Gender::Female, {});
  add("x", std::nullopt, {});
  EXPECT_NEAR(*ma_or(make_paper("G", "2015-01-01", {"g"}), authors, 0.81), -0.31, 1e-12);
}

TEST(MaOr, IgnoresAuthorsOutsideThePool) {
  AuthorMap authors;
  for (const char* id : {"f", "c1", "c2", "other"}) authors[id] = make_author(id, Gender::Male);
  authors["f"].coauthors = {"c1", "c2"};
  authors["c2"].gender = Gender::Female;
  const auto p = make_paper("P", "2015-01-01", {"f"});
  const double before = *ma_or(p, authors, 0.5);
  authors["other"].gender = Gender::Female;
  authors["other"].author_id = "renamed";
  EXPECT_EQ(*ma_or(p, authors, 0.5), before);
}

TEST(Prominence, CutoffsIncludeTies) {
  std::vector<AuthorRecord> authors;
  for (int k = 1; k <= 200; ++k) {
    auto w = make_author("w" + std::to_string(k), Gender::Female);
    w.prominence = k;
    authors.push_back(w);
  }
  for (int k = 1; k <= 100; ++k) {
    auto m = make_author("m" + std::to_string(k), Gender::Male);
    m.prominence = 10 * k;
    authors.push_back(m);
  }
  auto tie = make_author("w_tie", Gender::Female);
  tie.prominence = 199;
  authors.push_back(tie);
  const auto cut = prominence_cutoffs(authors, 0.01);
  // 201 women: rank ceil(2.01) = 3 of (200, 199, 199, ...).
  EXPECT_EQ(cut.female, 199);
  EXPECT_EQ(cut.male, 1000);

  AuthorMap map;
  for (const auto& a : authors) map[a.author_id] = a;
  EXPECT_TRUE(prominent_flag(make_paper("P", "2015-01-01", {"w200", "m1"}), map, cut));
  EXPECT_TRUE(prominent_flag(make_paper("P", "2015-01-01", {"m2", "w_tie"}), map, cut));
  EXPECT_TRUE(prominent_flag(make_paper("P", "2015-01-01", {"w199"}), map, cut));
  EXPECT_FALSE(prominent_flag(make_paper("P", "2015-01-01", {"w100", "m50"}), map, cut));
  // A top man is not prominent by the women's scale and vice versa.
  EXPECT_FALSE(prominent_flag(make_paper("P", "2015-01-01", {"m20"}), map, cut));
}

TEST(TStatistic, Examples) {
  const std::vector<double> same(100, 0.3);
  auto t = t_statistic(0.3, same);
  EXPECT_EQ(t.t, 0.0);
  EXPECT_FALSE(t.reject);

  std::vector<double> spread;
  const double a = std::sqrt(0.99);  // sample std exactly 1
  for (int k = 0; k < 50; ++k) {
    spread.push_back(3.0 + a);
    spread.push_back(3.0 - a);
  }
  t = t_statistic(5.0, spread);
  EXPECT_NEAR(t.t, -20.0, 1e-9);
  EXPECT_TRUE(t.reject);
  EXPECT_NEAR(t_statistic(1.0, spread).t, 20.0, 1e-9);
  EXPECT_NEAR(t_statistic(3.0, spread).t, 0.0, 1e-12);

  const auto inf = t_statistic(0.5, same);
  EXPECT_TRUE(std::isinf(inf.t));
  EXPECT_LT(inf.t, 0);
  EXPECT_EQ(inf.p, 0.0);
  EXPECT_THROW(t_statistic(0.0, std::vector<double>{1.0}), InputError);
}

// Papers with out-edges get MatchKeys; targets are the T* papers.
struct MatchFixture : testing::Fixture {
  void citing(std::string id, int year, std::string country, int n_out, GenderCategory g) {
    papers.push_back(make_paper(id, std::to_string(year) + "-06-01", {"au_" + id}, g, country));
    for (int k = 0; k < n_out; ++k) edges.push_back({id, "T" + std::to_string(k)});
  }
  MatchFixture() {
    for (int k = 0; k < 4; ++k)
      papers.push_back(make_paper("T" + std::to_string(k), "2005-01-01", {"t" + std::to_string(k)}));
  }
};

TEST(MatchKey, RequiresOutCitations) {
  MatchFixture f;
  f.citing("U", 2010, "US", 2, GenderCategory::WW);
  const auto net = f.network();
  const auto key = match_key(net, net.index_of("U"));
  ASSERT_TRUE(key);
  EXPECT_EQ(key->year, 2010);
  EXPECT_EQ(key->out_citations, 2u);
  EXPECT_FALSE(match_key(net, net.index_of("T0")));
}

TEST(BuildMatchedPairs, ClonesPairFullyAndUnmatchedSkip) {
  MatchFixture f;
  for (int k = 0; k < 5; ++k) {
    f.citing("U" + std::to_string(k), 2010 + k, "US", 1 + k % 3, GenderCategory::WW);
    f.citing("V" + std::to_string(k), 2010 + k, "US", 1 + k % 3, GenderCategory::MM);
  }
  f.citing("Ulone", 2011, "JP", 1, GenderCategory::WW);
  const auto net = f.network();
  std::vector<Index> m, mp;
  for (int k = 0; k < 5; ++k) {
    m.push_back(net.index_of("U" + std::to_string(k)));
    mp.push_back(net.index_of("V" + std::to_string(k)));
  }
  m.push_back(net.index_of("Ulone"));
  const auto r = build_matched_pairs(net, m, mp, 100, 1);
  ASSERT_EQ(r.pairs.size(), 100u);
  EXPECT_EQ(r.m_set.size(), 6u);
  EXPECT_FALSE(r.matchable.back());
  for (std::size_t k = 0; k < 100; ++k) {
    EXPECT_EQ(r.pairs[k].size(), 5u);
    EXPECT_EQ(r.skipped[k], 1u);
    for (const auto& [u, v] : r.pairs[k]) EXPECT_EQ(match_key(net, u), match_key(net, v));
  }
  EXPECT_THROW(build_matched_pairs(net, m, m, 2, 1), InputError);
}

TEST(BuildMatchedPairs, UniformOverKeyCompatiblePartners) {
  MatchFixture f;
  f.citing("U", 2012, "US", 2, GenderCategory::WW);
  for (int k = 0; k < 3; ++k) f.citing("V" + std::to_string(k), 2012, "US", 2, GenderCategory::MM);
  f.citing("Vx", 2012, "US", 3, GenderCategory::MM);  // differs in out-citations
  const auto net = f.network();
  const std::vector<Index> m{net.index_of("U")};
  std::vector<Index> mp;
  for (const char* id : {"V0", "V1", "V2", "Vx"}) mp.push_back(net.index_of(id));
  const int n = 10000;
  const auto r = build_matched_pairs(net, m, mp, n, 99);
  std::map<Index, int> freq;
  for (const auto& reps : r.pairs) {
    ASSERT_EQ(reps.size(), 1u);
    ++freq[reps[0].second];
  }
  EXPECT_EQ(freq.size(), 3u);
  EXPECT_EQ(freq.count(net.index_of("Vx")), 0u);
  for (const auto& [v, c] : freq) EXPECT_NEAR(c / double(n), 1.0 / 3.0, 0.02);
}

CitationNetwork neutral_network(std::uint64_t seed, std::size_t n) {
  synth::SynthConfig config;
  config.n_papers = n;
  config.n_countries = 2;
  config.n_subfields = 2;
  config.year_from = 2012;
  config.year_to = 2016;
  config.citations = synth::CitationDistribution::Fixed;
  config.citations_mean = 4;
  config.category_probs = {0.5, 0.1, 0.1, 0.3};
  config.seed = seed;
  const auto c = synth::generate(config);
  return build_network(c.papers, c.citations, c.authors);
}

TEST(BuildMatchedPairs, NoPartnerReusedWithinReplicate) {
  const auto net = neutral_network(8, 1500);
  const auto pops = split_populations(net, Split::GenderMMvsWW, 0);
  ASSERT_EQ(pops.size(), 1u);
  EXPECT_EQ(pops[0].name, "WW_vs_MM");
  const auto r = build_matched_pairs(net, pops[0].m, pops[0].m_prime, 20, 4);
  for (const auto& reps : r.pairs) {
    std::set<Index> used;
    for (const auto& [u, v] : reps) {
      EXPECT_TRUE(used.insert(v).second);
      EXPECT_EQ(match_key(net, u), match_key(net, v));
    }
  }
}

TEST(SplitPopulations, MedianPapersGoToBottomHalf) {
  const auto net = neutral_network(9, 1500);
  const double overall = overall_male_fraction(net);
  for (const auto& pop : split_populations(net, Split::MaOrHalves, 0)) {
    std::vector<double> top, bottom;
    for (auto i : pop.m) top.push_back(*ma_or(net, i, overall));
    for (auto i : pop.m_prime) bottom.push_back(*ma_or(net, i, overall));
    if (top.empty()) continue;
    EXPECT_GT(*std::min_element(top.begin(), top.end()), *std::max_element(bottom.begin(), bottom.end()));
    EXPECT_GE(bottom.size(), top.size());
  }
}

TEST(ComparePopulations, RowsAndInsufficientMarker) {
  const auto net = neutral_network(10, 1200);
  const CandidateIndex index(net);
  const auto ex = paper_expectations(index, Model::PD, 10, 1, 2);
  const auto rows = compare_populations(net, ex, Split::VenueType, {.n_match_replicates = 20, .seed = 3});
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].population, "MM_conference_vs_journal");
  EXPECT_EQ(rows[4].population, "WW_conference_vs_journal");
  EXPECT_FALSE(rows[0].insufficient);
  EXPECT_TRUE(rows[0].test.has_value());
  EXPECT_GT(rows[0].mean_pairs, 2.0);

  // Without WW papers the WW_vs_MM population has nothing to pair.
  synth::SynthConfig config;
  config.n_papers = 300;
  config.year_from = 2012;
  config.category_probs = {0.6, 0.2, 0.2, 0.0};
  config.seed = 4;
  const auto c = synth::generate(config);
  const auto no_ww = build_network(c.papers, c.citations, c.authors);
  const CandidateIndex no_ww_index(no_ww);
  const auto prom = compare_populations(no_ww, paper_expectations(no_ww_index, Model::RD, 4, 1, 1),
                                        Split::GenderMMvsWW, {.n_match_replicates = 5, .seed = 3});
  bool any_insufficient = false;
  for (const auto& r : prom) any_insufficient = any_insufficient || r.insufficient;
  EXPECT_TRUE(any_insufficient);
  std::ostringstream out;
  write_comparison(out, prom);
  EXPECT_NE(out.str().find("insufficient"), std::string::npos);
}

TEST(PaperExpectations, MatchesObservedTotalsAndIsWorkerIndependent) {
  const auto net = neutral_network(11, 600);
  const CandidateIndex index(net);
  const auto a = paper_expectations(index, Model::HD, 8, 5, 1);
  const auto b = paper_expectations(index, Model::HD, 8, 5, 4);
  EXPECT_EQ(a.expected, b.expected);
  for (Index i = 0; i < net.size(); ++i) {
    double exp_total = 0.0;
    std::int64_t obs_total = 0;
    for (int g = 0; g < 4; ++g) {
      exp_total += a.expected[i][g];
      obs_total += a.observed[i][g];
    }
    EXPECT_NEAR(exp_total, static_cast<double>(obs_total), 1e-9);
    EXPECT_EQ(obs_total, static_cast<std::int64_t>(net.out_degree(i)));
  }
}

}  // namespace
}  // namespace citegap::matching
