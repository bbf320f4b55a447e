#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "citegap/corpus.hpp"
#include "citegap/error.hpp"
#include "citegap/stats.hpp"
#include "citegap/synthgen.hpp"

namespace citegap::synth {
namespace {

TEST(SynthConfig, SetOptionAndValidate) {
  SynthConfig c;
  set_option(c, "n_papers", "250");
  set_option(c, "planted_bias", "1,1,1,0.8");
  set_option(c, "citations", "fixed");
  set_option(c, "homophily_strength", "2.5");
  EXPECT_EQ(c.n_papers, 250u);
  EXPECT_EQ(c.planted_bias[3], 0.8);
  EXPECT_EQ(c.citations, CitationDistribution::Fixed);
  EXPECT_EQ(c.homophily_strength, 2.5);
  EXPECT_NO_THROW(validate(c));

  EXPECT_THROW(set_option(c, "bogus", "1"), InputError);
  EXPECT_THROW(set_option(c, "n_papers", "ten"), InputError);
  EXPECT_THROW(set_option(c, "planted_bias", "1,1,1"), InputError);

  SynthConfig bad;
  bad.category_probs = {0.5, 0.5, 0.5, 0.5};
  EXPECT_THROW(validate(bad), InputError);
  bad = SynthConfig{};
  bad.n_topics = 0;
  EXPECT_THROW(validate(bad), InputError);
  bad = SynthConfig{};
  bad.pa_exponent = -1;
  EXPECT_THROW(validate(bad), InputError);
}

TEST(Generate, DeterministicPerSeed) {
  SynthConfig c;
  c.n_papers = 400;
  c.seed = 17;
  const auto a = generate(c);
  const auto b = generate(c);
  EXPECT_EQ(a.papers, b.papers);
  EXPECT_EQ(a.citations, b.citations);
  EXPECT_EQ(a.authors, b.authors);
  c.seed = 18;
  EXPECT_NE(generate(c).citations, a.citations);
}

TEST(Generate, FixedCountBeyondCorpusIsAnError) {
  SynthConfig c;
  c.n_papers = 5;
  c.citations = CitationDistribution::Fixed;
  c.citations_mean = 5;
  EXPECT_THROW(generate(c), GenerationError);
}

TEST(Generate, PassesIngestionUnchanged) {
  SynthConfig c;
  c.n_papers = 800;
  c.year_from = 1985;
  c.seed = 3;
  const auto corpus = generate(c);
  ASSERT_FALSE(corpus.citations.empty());

  // Papers come in date order and carry their own category.
  EXPECT_TRUE(std::is_sorted(corpus.papers.begin(), corpus.papers.end(),
                             [](const auto& x, const auto& y) { return x.pub_date < y.pub_date; }));
  const AuthorMap authors = make_author_map(corpus.authors);
  for (const auto& p : corpus.papers) {
    ASSERT_TRUE(p.gender_category);
    EXPECT_EQ(assign_gender_category(p, authors), p.gender_category) << p.paper_id;
  }

  // Rules (i), (ii) and (iv) hold by construction; (iii) may be violated.
  BuildReport report;
  const auto net = build_network(corpus.papers, corpus.citations, corpus.authors,
                                 {.keep_isolated = true, .include_self_citations = true}, &report);
  EXPECT_EQ(net.size(), corpus.papers.size());
  EXPECT_EQ(net.edge_count(), corpus.citations.size());
  std::unordered_map<std::string, const PaperRecord*> by_id;
  for (const auto& p : corpus.papers) by_id[p.paper_id] = &p;
  for (const auto& e : corpus.citations) {
    const auto& u = *by_id.at(e.src);
    const auto& v = *by_id.at(e.dst);
    EXPECT_GE(u.year, 1990);
    EXPECT_GE(v.pub_date, years_before(u.pub_date, 10));
    for (const auto& a : v.author_ids)
      EXPECT_EQ(std::count(u.author_ids.begin(), u.author_ids.end(), a), 0);
  }
}

TEST(Generate, NeutralTargetsAreUniformOverEligiblePapers) {
  SynthConfig c;
  c.n_papers = 4000;
  c.seed = 12;
  const auto corpus = generate(c);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.papers.size(); ++i) index[corpus.papers[i].paper_id] = i;

  // The first citation of each paper is a single uniform draw; bin its
  // position within the eligible list into deciles.
  std::array<std::int64_t, 10> bins{};
  std::array<double, 10> expected{};
  std::set<std::string> seen;
  for (const auto& e : corpus.citations) {
    if (!seen.insert(e.src).second) continue;
    const std::size_t u = index.at(e.src);
    const auto& pu = corpus.papers[u];
    std::vector<std::size_t> eligible;
    for (std::size_t v = 0; v < u; ++v) {
      const auto& pv = corpus.papers[v];
      if (pv.pub_date < years_before(pu.pub_date, 10)) continue;
      bool shared = false;
      for (const auto& a : pv.author_ids)
        shared = shared || std::count(pu.author_ids.begin(), pu.author_ids.end(), a) > 0;
      if (!shared) eligible.push_back(v);
    }
    const auto pos = std::find(eligible.begin(), eligible.end(), index.at(e.dst)) - eligible.begin();
    ASSERT_LT(static_cast<std::size_t>(pos), eligible.size());
    const auto n = static_cast<std::ptrdiff_t>(eligible.size());
    ++bins[static_cast<std::size_t>(10 * pos / n)];
    for (std::ptrdiff_t q = 0; q < n; ++q) expected[static_cast<std::size_t>(10 * q / n)] += 1.0 / static_cast<double>(n);
  }
  std::int64_t total = 0;
  for (auto b : bins) total += b;
  ASSERT_GT(total, 3000);
  double chi2 = 0.0;
  for (std::size_t b = 0; b < 10; ++b) {
    const double d = static_cast<double>(bins[b]) - expected[b];
    chi2 += d * d / expected[b];
  }
  EXPECT_GT(stats::chi2_sf(chi2, 9.0), 0.001) << "chi2 " << chi2;
}

TEST(Generate, PreferentialAttachmentMaxInDegreeGrowsWithSize) {
  std::vector<double> max_in;
  for (std::size_t n : {1000u, 5000u, 10000u}) {
    double sum = 0.0;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      SynthConfig c;
      c.n_papers = n;
      c.pa_exponent = 1.0;
      c.seed = seed;
      const auto corpus = generate(c);
      std::unordered_map<std::string, int> in;
      int m = 0;
      for (const auto& e : corpus.citations) m = std::max(m, ++in[e.dst]);
      sum += m;
    }
    max_in.push_back(sum / 3.0);
  }
  EXPECT_LT(max_in[0], max_in[1]);
  EXPECT_LT(max_in[1], max_in[2]);
}

TEST(Generate, CategoryShareFollowsConfiguration) {
  SynthConfig c;
  c.n_papers = 20000;
  c.citations_mean = 0.0001;
  c.seed = 2;
  const auto corpus = generate(c);
  std::array<double, 4> share{};
  for (const auto& p : corpus.papers) share[index_of(*p.gender_category)] += 1.0 / 20000.0;
  for (int g = 0; g < 4; ++g) EXPECT_NEAR(share[g], c.category_probs[g], 0.01);
}

}  // namespace
}  // namespace citegap::synth
