#include "citegap/imbalance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_map>

#include "citegap/csv.hpp"
#include "citegap/error.hpp"
#include "citegap/stats.hpp"

namespace citegap {

namespace {

constexpr std::string_view kFields[] = {"gender_category", "venue_type", "venue_rank",
                                        "country",         "topic_id",   "subfield_id",
                                        "venue_id",        "year"};

std::optional<std::string> field_value(const PaperRecord& p, std::string_view field) {
  if (field == "gender_category") {
    if (!p.gender_category) return std::nullopt;
    return std::string(to_string(*p.gender_category));
  }
  if (field == "venue_type") return std::string(to_string(p.venue_type));
  if (field == "venue_rank") {
    if (!p.venue_rank) return std::nullopt;
    return std::string(to_string(*p.venue_rank));
  }
  if (field == "country") return p.country;
  if (field == "topic_id") return p.topic_id;
  if (field == "subfield_id") return p.subfield_id;
  if (field == "venue_id") return p.venue_id;
  if (field == "year") return std::to_string(p.year);
  return std::nullopt;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

PaperPredicate PaperPredicate::parse(std::string_view text) {
  PaperPredicate pred;
  text = trim(text);
  if (text.empty() || text == "all") return pred;
  while (!text.empty()) {
    const auto amp = text.find('&');
    const std::string_view term = trim(text.substr(0, amp));
    text = amp == std::string_view::npos ? std::string_view{} : text.substr(amp + 1);
    const auto eq = term.find('=');
    if (eq == std::string_view::npos)
      throw InputError("predicate term '" + std::string(term) + "' is not field=value");
    const std::string field(trim(term.substr(0, eq)));
    const std::string value(trim(term.substr(eq + 1)));
    if (std::find(std::begin(kFields), std::end(kFields), field) == std::end(kFields))
      throw InputError("unknown predicate field '" + field + "'");
    bool ok = true;
    if (field == "gender_category") ok = parse_gender_category(value).has_value();
    if (field == "venue_type") ok = parse_venue_type(value).has_value();
    if (field == "venue_rank") ok = parse_venue_rank(value).has_value();
    if (field == "year") {
      int y = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), y);
      ok = ec == std::errc{} && ptr == value.data() + value.size();
    }
    if (!ok) throw InputError("invalid value '" + value + "' for field '" + field + "'");
    pred.terms_.push_back({field, value});
  }
  return pred;
}

bool PaperPredicate::operator()(const PaperRecord& p) const {
  for (const auto& t : terms_) {
    auto v = field_value(p, t.field);
    if (!v || *v != t.value) return false;
  }
  return true;
}

std::string PaperPredicate::to_string() const {
  if (terms_.empty()) return "all";
  std::string out;
  for (const auto& t : terms_) {
    if (!out.empty()) out += '&';
    out += t.field + '=' + t.value;
  }
  return out;
}

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::None: return "none";
    case Partition::BySubfield: return "subfield";
    case Partition::ByTopic: return "topic";
    case Partition::ByVenueRank: return "venue_rank";
    case Partition::ByVenueType: return "venue_type";
    case Partition::ByYear: return "year";
    case Partition::ByVenue: return "venue";
  }
  return "?";
}

std::optional<Partition> parse_partition(std::string_view s) {
  for (auto p : {Partition::None, Partition::BySubfield, Partition::ByTopic, Partition::ByVenueRank,
                 Partition::ByVenueType, Partition::ByYear, Partition::ByVenue})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::vector<GroupSpec> standard_groups(Partition partition) {
  std::vector<GroupSpec> out;
  out.push_back({"All", {}, {}, partition});
  for (auto c : kGenderCategories)
    out.push_back({std::string(to_string(c)),
                   PaperPredicate::parse("gender_category=" + std::string(to_string(c))),
                   {},
                   partition});
  return out;
}

std::string group_label(std::string_view name, Partition partition, std::string_view value) {
  if (partition == Partition::None) return std::string(name);
  return fmt::format("{}:{}={}", name, to_string(partition), value);
}

// ---------------------------------------------------------------------------

std::string partition_value(const PaperRecord& p, Partition partition) {
  switch (partition) {
    case Partition::None: return {};
    case Partition::BySubfield: return p.subfield_id;
    case Partition::ByTopic: return p.topic_id;
    case Partition::ByVenueRank: return p.venue_rank ? std::string(to_string(*p.venue_rank)) : "";
    case Partition::ByVenueType: return std::string(to_string(p.venue_type));
    case Partition::ByYear: return std::to_string(p.year);
    case Partition::ByVenue: return p.venue_id;
  }
  return {};
}

GroupTabulator::GroupTabulator(const CitationNetwork& net, std::span<const GroupSpec> groups)
    : net_(&net) {
  const std::size_t n = net.size();
  category_.resize(n);
  for (CitationNetwork::Index i = 0; i < n; ++i) {
    const auto& c = net.paper(i).gender_category;
    category_[i] = c ? static_cast<std::int8_t>(index_of(*c)) : std::int8_t{-1};
  }
  std::unordered_map<std::string, std::int32_t> cell_ids;
  auto cell_of = [&](const std::string& label) {
    auto [it, inserted] = cell_ids.try_emplace(label, static_cast<std::int32_t>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  };

  for (const auto& g : groups) {
    Compiled c;
    c.partition = g.partition;
    c.from_ok.resize(n);
    c.to_cell.assign(n, -1);
    if (g.partition == Partition::ByYear) c.from_cell.assign(n, -1);
    for (CitationNetwork::Index i = 0; i < n; ++i) {
      const auto& p = net.paper(i);
      c.from_ok[i] = g.from(p);
      if (g.partition == Partition::ByYear && c.from_ok[i])
        c.from_cell[i] = cell_of(group_label(g.name, g.partition, partition_value(p, g.partition)));
      if (category_[i] >= 0 && g.to(p))
        c.to_cell[i] = g.partition == Partition::ByYear
                           ? 0
                           : cell_of(group_label(g.name, g.partition,
                                                 partition_value(p, g.partition)));
    }
    groups_.push_back(std::move(c));
  }
}

CellCounts GroupTabulator::tabulate(std::span<const CitationNetwork::Edge> edges) const {
  std::vector<std::int64_t> dense(labels_.size() * 4, 0);
  for (const auto& g : groups_) {
    const bool by_year = g.partition == Partition::ByYear;
    for (const auto& e : edges) {
      if (!g.from_ok[e.src]) continue;
      const std::int32_t to = g.to_cell[e.dst];
      if (to < 0) continue;
      const std::int32_t cell = by_year ? g.from_cell[e.src] : to;
      ++dense[static_cast<std::size_t>(cell) * 4 + static_cast<std::size_t>(category_[e.dst])];
    }
  }
  CellCounts out;
  for (std::size_t cell = 0; cell < labels_.size(); ++cell)
    for (std::size_t k = 0; k < 4; ++k)
      if (dense[cell * 4 + k] > 0) out[{labels_[cell], kGenderCategories[k]}] = dense[cell * 4 + k];
  return out;
}

CellCounts observed_counts(const CitationNetwork& net, const GroupSpec& spec) {
  return GroupTabulator(net, std::span(&spec, 1)).tabulate(net.edges());
}

// ---------------------------------------------------------------------------

std::optional<double> over_under(double n_obs, double mu) {
  if (mu == 0.0) return std::nullopt;
  return (n_obs - mu) / mu;
}

ZResult z_and_p(double n_obs, double mu, double sigma, bool two_sided) {
  if (sigma < 0) throw InputError("negative standard deviation");
  ZResult r;
  if (sigma == 0.0) {
    if (n_obs != mu) return r;
    r.z = 0.0;
  } else {
    r.z = (n_obs - mu) / sigma;
  }
  const double tail = stats::normal_sf(std::abs(*r.z));
  r.p = two_sided ? std::min(1.0, 2.0 * tail) : tail;
  r.significant = std::abs(*r.z) > kZThreshold;
  return r;
}

std::vector<ImbalanceStat> summarize(const CellCounts& observed,
                                     std::span<const CellCounts> replicates, bool two_sided) {
  std::set<std::string> groups;
  for (const auto& [key, n] : observed) groups.insert(key.group);
  for (const auto& rep : replicates)
    for (const auto& [key, n] : rep) groups.insert(key.group);

  std::vector<ImbalanceStat> rows;
  std::vector<double> samples(replicates.size());
  for (const auto& g : groups) {
    for (auto c : kGenderCategories) {
      const CellKey key{g, c};
      ImbalanceStat s;
      s.group = g;
      s.category = c;
      if (auto it = observed.find(key); it != observed.end()) s.n_obs = it->second;
      for (std::size_t r = 0; r < replicates.size(); ++r) {
        auto it = replicates[r].find(key);
        samples[r] = it == replicates[r].end() ? 0.0 : static_cast<double>(it->second);
      }
      if (!samples.empty()) {
        const auto ms = stats::mean_std(samples);
        s.mu = ms.mean;
        s.sigma = ms.population_std;
      }
      const double n = static_cast<double>(s.n_obs);
      s.over_under = over_under(n, s.mu);
      const auto z = z_and_p(n, s.mu, s.sigma, two_sided);
      s.z = z.z;
      s.p = z.p;
      s.significant = z.significant;
      rows.push_back(std::move(s));
    }
  }
  return rows;
}

std::vector<ImbalanceStat> analyze(const CandidateIndex& index, Model model,
                                   std::span<const GroupSpec> groups,
                                   const AnalyzeOptions& options) {
  const GroupTabulator tab(index.network(), groups);
  const CellCounts observed = tab.tabulate(index.network().edges());
  const auto replicates =
      run_replicates(index, model, options.n_replicates, options.base_seed, options.workers,
                     [&](const RandomizedNetwork& rn, std::size_t) { return tab.tabulate(rn.edges); });
  return summarize(observed, replicates, options.two_sided);
}

std::vector<ImbalanceStat> analyze(const CitationNetwork& net, Model model,
                                   std::span<const GroupSpec> groups,
                                   const AnalyzeOptions& options) {
  return analyze(CandidateIndex(net), model, groups, options);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("spearman inputs differ in length");
  if (xs.size() < 2) throw InputError("spearman needs at least two points");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(xs.size());
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt_opt(const std::optional<double>& v, double scale = 1.0) {
  return v ? fmt::format("{}", *v * scale) : std::string("undefined");
}

std::optional<double> parse_opt(const std::string& s, std::size_t line) {
  if (s == "undefined") return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("invalid number '" + s + "'", line);
  return v;
}

}  // namespace

void write_imbalance_report(std::ostream& out, std::span<const ImbalanceStat> rows) {
  out << "group,category,n_obs,mu,sigma,over_under_pct,z,p,significant\n";
  for (const auto& r : rows)
    out << csv::escape(r.group) << ',' << to_string(r.category) << ',' << r.n_obs << ','
        << fmt::format("{},{}", r.mu, r.sigma) << ',' << fmt_opt(r.over_under, 100.0) << ','
        << fmt_opt(r.z) << ',' << fmt_opt(r.p) << ',' << (r.significant ? "true" : "false")
        << '\n';
}

std::vector<ImbalanceStat> read_imbalance_report(std::istream& in) {
  std::vector<ImbalanceStat> rows;
  csv::Reader reader(in);
  bool header = true;
  while (auto row = reader.next()) {
    if (header) {
      header = false;
      if (!row->empty() && (*row)[0] == "group") continue;
    }
    if (row->size() != 9) throw ParseError("expected 9 columns", reader.line());
    ImbalanceStat s;
    s.group = (*row)[0];
    auto c = parse_gender_category((*row)[1]);
    if (!c) throw ParseError("invalid category '" + (*row)[1] + "'", reader.line());
    s.category = *c;
    auto n = parse_opt((*row)[2], reader.line());
    auto mu = parse_opt((*row)[3], reader.line());
    auto sigma = parse_opt((*row)[4], reader.line());
    if (!n || !mu || !sigma) throw ParseError("n_obs, mu and sigma must be defined", reader.line());
    s.n_obs = static_cast<std::int64_t>(*n);
    s.mu = *mu;
    s.sigma = *sigma;
    s.over_under = parse_opt((*row)[5], reader.line());
    if (s.over_under) *s.over_under /= 100.0;
    s.z = parse_opt((*row)[6], reader.line());
    s.p = parse_opt((*row)[7], reader.line());
    if ((*row)[8] != "true" && (*row)[8] != "false")
      throw ParseError("invalid significant flag '" + (*row)[8] + "'", reader.line());
    s.significant = (*row)[8] == "true";
    rows.push_back(std::move(s));
  }
  return rows;
}

void write_replicate_summary(std::ostream& out, std::span<const CellCounts> replicates) {
  out << "replicate,from_group,to_category,count\n";
  for (std::size_t r = 0; r < replicates.size(); ++r)
    for (const auto& [key, n] : replicates[r])
      out << r << ',' << csv::escape(key.group) << ',' << to_string(key.category) << ',' << n
          << '\n';
}

}  // namespace citegap
