#include "citegap/synthgen.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "citegap/error.hpp"
#include "citegap/rng.hpp"

namespace citegap::synth {

namespace {

constexpr std::array<const char*, 30> kCountries{
    "US", "CN", "DE", "GB", "JP", "FR", "IN", "KR", "CA", "IT", "ES", "AU", "NL", "BR", "CH",
    "SE", "IL", "SG", "AT", "BE", "DK", "FI", "NO", "PL", "PT", "IE", "GR", "CZ", "NZ", "MX"};

constexpr std::array<const char*, 12> kFemaleNames{"Anna",  "Maria", "Sofia", "Laura",
                                                   "Emma",  "Julia", "Elena", "Sara",
                                                   "Clara", "Alice", "Irene", "Nora"};
constexpr std::array<const char*, 12> kMaleNames{"David", "Marco", "Peter", "Lukas",
                                                 "Jonas", "Pablo", "Ivan",  "Tomas",
                                                 "Felix", "Oscar", "Hugo",  "Simon"};
constexpr std::array<const char*, 16> kFamilyNames{
    "Smith", "Garcia", "Muller", "Rossi", "Novak", "Silva", "Kim",    "Tanaka",
    "Wang",  "Larsen", "Dubois", "Costa", "Weber", "Moreau", "Jensen", "Sato"};

bool normalized(std::span<const double> p) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) < 1e-9;
}

class Categorical {
 public:
  explicit Categorical(std::span<const double> weights) {
    double acc = 0.0;
    for (double w : weights) cum_.push_back(acc += w);
  }
  std::size_t operator()(StreamRng& rng) const {
    const double u = rng.uniform01() * cum_.back();
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cum_.begin()), cum_.size() - 1);
  }

 private:
  std::vector<double> cum_;
};

std::vector<double> zipf(std::size_t n, double s) {
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / std::pow(static_cast<double>(k + 1), s);
  return w;
}

std::uint64_t draw_poisson(double mean, StreamRng& rng) {
  // Sequential inversion; validate() bounds the mean.
  const double u = rng.uniform01();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf && k < 10000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

std::uint64_t draw_geometric(double mean, StreamRng& rng) {
  if (mean <= 0.0) return 0;
  const double q = mean / (mean + 1.0);  // failure probability
  const double u = 1.0 - rng.uniform01();  // (0, 1]
  return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(q)));
}

template <class T>
T parse_value(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw InputError(fmt::format("invalid value '{}' for '{}'", text, key));
  return v;
}

template <std::size_t N>
std::array<double, N> parse_vector(std::string_view key, std::string_view text) {
  std::array<double, N> out{};
  std::size_t k = 0;
  while (true) {
    const auto comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (k == N) throw InputError(fmt::format("'{}' takes {} values", key, N));
    out[k++] = parse_value<double>(key, item);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (k != N) throw InputError(fmt::format("'{}' takes {} values", key, N));
  return out;
}

}  // namespace

void validate(const SynthConfig& c) {
  if (c.n_papers < 1) throw InputError("n_papers must be positive");
  if (c.year_from > c.year_to) throw InputError("year_from is after year_to");
  if (!normalized(c.category_probs)) throw InputError("category_probs must sum to 1");
  if (!normalized(c.rank_probs)) throw InputError("rank_probs must sum to 1");
  if (c.n_countries < 1 || c.n_countries > kCountries.size())
    throw InputError(fmt::format("n_countries must be in [1, {}]", kCountries.size()));
  if (c.n_topics < 1 || c.n_subfields < 1 || c.venues_per_rank < 1)
    throw InputError("n_topics, n_subfields and venues_per_rank must be positive");
  if (c.country_skew < 0 || c.topic_skew < 0) throw InputError("skews must be non-negative");
  if (!(c.citations_mean >= 0) || c.citations_mean > 500)
    throw InputError("citations_mean must be in [0, 500]");
  if (c.homophily_strength < 0 || c.pa_exponent < 0)
    throw InputError("homophily_strength and pa_exponent must be non-negative");
  for (double b : c.planted_bias)
    if (!(b >= 0)) throw InputError("planted_bias entries must be non-negative");
  for (double p : {c.sole_author_prob, c.author_reuse_prob})
    if (!(p >= 0 && p <= 1)) throw InputError("probabilities must be in [0, 1]");
  if (c.max_authors < 2) throw InputError("max_authors must be at least 2");
}

void set_option(SynthConfig& c, std::string_view key, std::string_view value) {
  if (key == "n_papers") c.n_papers = parse_value<std::size_t>(key, value);
  else if (key == "year_from") c.year_from = parse_value<int>(key, value);
  else if (key == "year_to") c.year_to = parse_value<int>(key, value);
  else if (key == "category_probs") c.category_probs = parse_vector<4>(key, value);
  else if (key == "n_countries") c.n_countries = parse_value<std::size_t>(key, value);
  else if (key == "country_skew") c.country_skew = parse_value<double>(key, value);
  else if (key == "n_topics") c.n_topics = parse_value<std::size_t>(key, value);
  else if (key == "topic_skew") c.topic_skew = parse_value<double>(key, value);
  else if (key == "n_subfields") c.n_subfields = parse_value<std::size_t>(key, value);
  else if (key == "venues_per_rank") c.venues_per_rank = parse_value<std::size_t>(key, value);
  else if (key == "rank_probs") c.rank_probs = parse_vector<8>(key, value);
  else if (key == "citations") {
    if (value == "poisson") c.citations = CitationDistribution::Poisson;
    else if (value == "fixed") c.citations = CitationDistribution::Fixed;
    else if (value == "geometric") c.citations = CitationDistribution::Geometric;
    else throw InputError(fmt::format("unknown citation distribution '{}'", value));
  }
  else if (key == "citations_mean") c.citations_mean = parse_value<double>(key, value);
  else if (key == "homophily_strength") c.homophily_strength = parse_value<double>(key, value);
  else if (key == "pa_exponent") c.pa_exponent = parse_value<double>(key, value);
  else if (key == "planted_bias") c.planted_bias = parse_vector<4>(key, value);
  else if (key == "sole_author_prob") c.sole_author_prob = parse_value<double>(key, value);
  else if (key == "author_reuse_prob") c.author_reuse_prob = parse_value<double>(key, value);
  else if (key == "max_authors") c.max_authors = parse_value<std::size_t>(key, value);
  else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, value);
  else throw InputError(fmt::format("unknown synth option '{}'", key));
}

SynthCorpus generate(const SynthConfig& c) {
  validate(c);
  if (c.citations == CitationDistribution::Fixed &&
      static_cast<double>(c.n_papers) - 1.0 < std::round(c.citations_mean))
    throw GenerationError(fmt::format("{} citations per paper requested but only {} other papers",
                                      std::round(c.citations_mean), c.n_papers - 1));

  StreamRng attr_rng(c.seed, 0);
  StreamRng cite_rng(c.seed, 1);
  const std::size_t n = c.n_papers;

  // Dates, sorted; paper ids follow date order.
  using std::chrono::sys_days;
  const sys_days first{std::chrono::year{c.year_from} / 1 / 1};
  const sys_days last{std::chrono::year{c.year_to} / 12 / 31};
  const auto span_days = static_cast<std::uint64_t>((last - first).count() + 1);
  std::vector<sys_days> days(n);
  for (auto& d : days) d = first + std::chrono::days{static_cast<int>(attr_rng.below(span_days))};
  std::sort(days.begin(), days.end());

  const Categorical country_dist(zipf(c.n_countries, c.country_skew));
  const Categorical topic_dist(zipf(c.n_topics, c.topic_skew));
  const Categorical rank_dist(c.rank_probs);
  const Categorical category_dist(c.category_probs);

  SynthCorpus out;
  out.papers.resize(n);
  std::vector<std::vector<std::size_t>> author_pool(2 * c.n_countries);  // (gender, country)
  std::vector<std::vector<std::size_t>> author_papers;
  std::vector<std::vector<std::size_t>> paper_authors(n);
  std::vector<std::size_t> country_idx(n), topic_idx(n), category_idx(n), rank_idx(n);

  auto new_author = [&](Gender g, std::size_t country, int year) {
    const std::size_t id = out.authors.size();
    AuthorRecord a;
    a.author_id = fmt::format("A{:06}", id);
    const auto& given = g == Gender::Female ? kFemaleNames : kMaleNames;
    a.full_name = fmt::format("{} {}", given[attr_rng.below(given.size())],
                              kFamilyNames[attr_rng.below(kFamilyNames.size())]);
    a.country = kCountries[country];
    a.gender = g;
    a.first_pub_year = year;
    out.authors.push_back(std::move(a));
    author_papers.emplace_back();
    author_pool[(g == Gender::Female ? 0 : c.n_countries) + country].push_back(id);
    return id;
  };

  for (std::size_t i = 0; i < n; ++i) {
    PaperRecord& p = out.papers[i];
    const Date date{days[i]};
    p.paper_id = fmt::format("P{:06}", i);
    p.title = fmt::format("Synthetic study {}", i);
    p.pub_date = date;
    p.year = year_of(date);
    country_idx[i] = country_dist(attr_rng);
    topic_idx[i] = topic_dist(attr_rng);
    rank_idx[i] = rank_dist(attr_rng);
    category_idx[i] = category_dist(attr_rng);
    const VenueRank rank = kVenueRanks[rank_idx[i]];
    p.venue_rank = rank;
    p.venue_type = rank_idx[i] < 4 ? VenueType::Conference : VenueType::Journal;
    p.venue_id = fmt::format("V{}-{}", rank_idx[i], attr_rng.below(c.venues_per_rank));
    p.country = kCountries[country_idx[i]];
    p.topic_id = fmt::format("T{:02}", topic_idx[i]);
    p.subfield_id = fmt::format("S{:02}", topic_idx[i] % c.n_subfields);
    const GenderCategory cat = kGenderCategories[category_idx[i]];
    p.gender_category = cat;

    const Gender g_first = (cat == GenderCategory::WM || cat == GenderCategory::WW) ? Gender::Female
                                                                                    : Gender::Male;
    const Gender g_last = (cat == GenderCategory::MW || cat == GenderCategory::WW) ? Gender::Female
                                                                                   : Gender::Male;
    std::size_t n_authors = 2 + attr_rng.below(c.max_authors - 1);
    if (g_first == g_last && attr_rng.uniform01() < c.sole_author_prob) n_authors = 1;

    auto& authors = paper_authors[i];
    for (std::size_t k = 0; k < n_authors; ++k) {
      Gender g = k == 0 ? g_first : (k + 1 == n_authors ? g_last : Gender::Male);
      if (k > 0 && k + 1 < n_authors && attr_rng.uniform01() < 0.2) g = Gender::Female;
      const auto& pool = author_pool[(g == Gender::Female ? 0 : c.n_countries) + country_idx[i]];
      std::size_t id = SIZE_MAX;
      if (!pool.empty() && attr_rng.uniform01() < c.author_reuse_prob) {
        const std::size_t pick = pool[attr_rng.below(pool.size())];
        if (std::find(authors.begin(), authors.end(), pick) == authors.end()) id = pick;
      }
      if (id == SIZE_MAX) id = new_author(g, country_idx[i], p.year);
      authors.push_back(id);
    }
    for (auto a : authors) {
      p.author_ids.push_back(out.authors[a].author_id);
      author_papers[a].push_back(i);
    }
  }

  // Citations.
  std::vector<std::uint32_t> in_degree(n, 0);
  std::vector<std::size_t> stamp(n, SIZE_MAX);
  std::vector<double> weight;
  std::vector<std::size_t> cand, picked;
  for (std::size_t u = 0; u < n; ++u) {
    const PaperRecord& pu = out.papers[u];
    std::uint64_t k = 0;
    switch (c.citations) {
      case CitationDistribution::Poisson: k = draw_poisson(c.citations_mean, cite_rng); break;
      case CitationDistribution::Fixed: k = static_cast<std::uint64_t>(std::llround(c.citations_mean)); break;
      case CitationDistribution::Geometric: k = draw_geometric(c.citations_mean, cite_rng); break;
    }
    if (pu.year < kFirstCitingYear || k == 0) continue;

    for (auto a : paper_authors[u])
      for (auto v : author_papers[a]) stamp[v] = u;
    const Date lo_date = years_before(pu.pub_date, kCitationWindowYears);
    const auto lo = static_cast<std::size_t>(
        std::lower_bound(out.papers.begin(), out.papers.begin() + static_cast<std::ptrdiff_t>(u),
                         lo_date,
                         [](const PaperRecord& p, const Date& d) { return p.pub_date < d; }) -
        out.papers.begin());

    cand.clear();
    weight.clear();
    double total = 0.0;
    for (std::size_t v = lo; v < u; ++v) {
      if (stamp[v] == u) continue;
      double w = c.planted_bias[category_idx[v]];
      if (c.homophily_strength > 0 && country_idx[v] == country_idx[u] &&
          topic_idx[v] == topic_idx[u] && rank_idx[v] == rank_idx[u])
        w *= 1.0 + c.homophily_strength;
      if (c.pa_exponent == 1.0)
        w *= static_cast<double>(in_degree[v]) + 1.0;
      else if (c.pa_exponent > 0)
        w *= std::pow(static_cast<double>(in_degree[v]) + 1.0, c.pa_exponent);
      if (w <= 0) continue;
      cand.push_back(v);
      weight.push_back(w);
      total += w;
    }

    const std::size_t draws = std::min<std::size_t>(k, cand.size());
    picked.clear();
    for (std::size_t d = 0; d < draws; ++d) {
      const double r = cite_rng.uniform01() * total;
      double acc = 0.0;
      std::size_t pick = SIZE_MAX, last_positive = SIZE_MAX;
      for (std::size_t x = 0; x < cand.size(); ++x) {
        if (weight[x] <= 0) continue;
        last_positive = x;
        acc += weight[x];
        if (r < acc) {
          pick = x;
          break;
        }
      }
      if (pick == SIZE_MAX) pick = last_positive;
      if (pick == SIZE_MAX) break;
      total -= weight[pick];
      weight[pick] = 0.0;
      picked.push_back(cand[pick]);
      out.citations.push_back({pu.paper_id, out.papers[cand[pick]].paper_id});
    }
    // In-degrees update after the paper has placed all its citations.
    for (auto v : picked) ++in_degree[v];
  }
  return out;
}

}  // namespace citegap::synth
