#include "commands.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "citegap/corpus.hpp"
#include "citegap/error.hpp"
#include "citegap/harvest.hpp"
#include "citegap/imbalance.hpp"
#include "citegap/matching.hpp"
#include "citegap/nullmodels.hpp"
#include "citegap/rng.hpp"
#include "citegap/stats.hpp"
#include "citegap/synthgen.hpp"

namespace citegap::cli {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// ---------------------------------------------------------------------------
// Settings

struct Settings {
  // common
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  std::string out;
  std::string config;
  // corpus
  std::string papers, citations, authors;
  bool keep_isolated = false;
  bool include_self_citations = false;
  // link
  std::string a_path, b_path;
  // build
  std::string gender_dict, thresholds;
  // models
  std::string model = "pd";
  std::size_t replicates = 100;
  bool trace = false;
  // analyze
  std::string partition = "none";
  bool two_sided = false;
  std::string from = "all", to = "all", group_name;
  // matchpairs
  std::vector<std::string> splits;
  std::size_t match_replicates = 100;
  double prominence_percentile = 0.01;
  // synth
  std::vector<std::string> params;
  // report
  std::string imbalance;
};

const std::set<std::string> kFlags{"--keep-isolated", "--include-self-citations", "--two-sided",
                                   "--trace"};

const std::set<std::string> kSynthKeys{
    "n_papers",       "year_from",       "year_to",       "category_probs",   "n_countries",
    "country_skew",   "n_topics",        "topic_skew",    "n_subfields",      "venues_per_rank",
    "rank_probs",     "citations",       "citations_mean", "homophily_strength", "pa_exponent",
    "planted_bias",   "sole_author_prob", "author_reuse_prob", "max_authors"};

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value' in config file", line_no);
    out.emplace_back(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return out;
}

bool truthy(const std::string& v) { return v == "true" || v == "1" || v == "yes" || v == "on"; }

bool given_on_command_line(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Appends config-file settings that the command line does not already set.
std::vector<std::string> merge_config(CLI::App& app, const std::vector<std::string>& args) {
  std::optional<std::string> config_path;
  std::string command;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    if (command.empty() && !args[i].empty() && args[i][0] != '-') command = args[i];
  }
  if (!config_path || command.empty()) return args;
  CLI::App* sub = nullptr;
  for (auto* s : app.get_subcommands({})) if (s->get_name() == command) sub = s;
  if (!sub) return args;

  std::vector<std::string> merged = args;
  const auto pos = std::find(merged.begin(), merged.end(), command) - merged.begin() + 1;
  std::vector<std::string> synth_params;
  for (const auto& [key, value] : read_config_file(*config_path)) {
    if (command == "synth" && kSynthKeys.contains(key)) {
      synth_params.push_back("--param=" + key + "=" + value);
      continue;
    }
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    if (flag == "--config") continue;
    if (sub->get_option_no_throw(flag) == nullptr) {
      bool known = kSynthKeys.contains(key);
      for (auto* s : app.get_subcommands({})) known = known || s->get_option_no_throw(flag);
      if (!known) throw UsageError("unknown config key '" + key + "'");
      continue;
    }
    if (given_on_command_line(args, flag)) continue;
    if (kFlags.contains(flag)) {
      if (truthy(value)) merged.push_back(flag);
    } else {
      merged.push_back(flag + "=" + value);
    }
  }
  // Config params go first so --param on the command line overrides them.
  merged.insert(merged.begin() + pos, synth_params.begin(), synth_params.end());
  return merged;
}

std::string settings_text(const CLI::App& sub) {
  std::map<std::string, std::string> kv;
  for (const auto* opt : sub.get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name == "--workers" || name == "--out" || name == "--config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ";") + r;
    } else {
      value = opt->get_default_str();
    }
    kv[name] = value;
  }
  std::string text = sub.get_name() + "\n";
  for (const auto& [k, v] : kv) text += k + "=" + v + "\n";
  return text;
}

// ---------------------------------------------------------------------------
// Outputs

struct Header {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::optional<Model> model;
};

std::string header_text(const Header& h) {
  std::string s = fmt::format("# citegap {}\n# command: {}\n# config_hash: {:016x}\n# seed: {}\n",
                              kVersion, h.command, h.config_hash, h.seed);
  if (h.model) {
    s += fmt::format("# model: {}\n# rng: {}\n", to_string(*h.model), StreamRng::kName);
    if (*h.model == Model::PD) s += fmt::format("# pd_tie_break: {}\n", kPdTieBreak);
  }
  return s;
}

/// Files are staged in memory and written together; a failed run leaves no
/// output behind.
class Outputs {
 public:
  Outputs(std::string dir, Header header) : dir_(std::move(dir)), header_(std::move(header)) {}

  std::ostringstream& add(const std::string& name) {
    files_.emplace_back(name, std::make_unique<std::ostringstream>());
    *files_.back().second << header_text(header_);
    return *files_.back().second;
  }

  void commit() {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
    std::vector<fs::path> written;
    try {
      for (const auto& [name, content] : files_) {
        const fs::path final_path = fs::path(dir_) / name;
        const fs::path tmp = fs::path(dir_) / ("." + name + ".tmp");
        {
          std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
          if (!f) throw IoError("cannot write '" + tmp.string() + "'");
          f << content->str();
          f.flush();
          if (!f) throw IoError("write failed for '" + tmp.string() + "'");
        }
        written.push_back(tmp);
        fs::rename(tmp, final_path);
        written.back() = final_path;
      }
    } catch (...) {
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  std::string dir_;
  Header header_;
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> files_;
};

// ---------------------------------------------------------------------------
// Shared steps

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " file '" + path + "' not found");
}

struct Loaded {
  std::optional<CitationNetwork> net;
  BuildReport report;
};

Loaded load_network(const Settings& s, const harvest::ThresholdTable* thresholds = nullptr,
                    harvest::GenderProvider* provider = nullptr) {
  require_file(s.papers, "papers");
  require_file(s.citations, "citations");
  require_file(s.authors, "authors");
  auto papers = load_papers(s.papers);
  auto edges = load_citations(s.citations);
  auto authors = load_authors(s.authors);
  if (provider) {
    for (auto& a : authors)
      if (!a.country && !a.affiliation_countries.empty())
        a.country = assign_country(a.affiliation_countries);
    harvest::infer_author_genders(authors, *provider, *thresholds);
  }
  Loaded l;
  l.net.emplace(build_network(std::move(papers), edges, std::move(authors),
                              {s.keep_isolated, s.include_self_citations}, &l.report));
  return l;
}

Model model_of(const Settings& s) {
  auto m = parse_model(s.model);
  if (!m) throw UsageError("unknown model '" + s.model + "'");
  return *m;
}

void write_build_report(std::ostream& out, const BuildReport& r) {
  out << "metric,value\n"
      << "papers_in," << r.papers_in << "\nedges_in," << r.edges_in << "\nauthors_in,"
      << r.authors_in << "\npapers_categorized," << r.papers_categorized << "\npapers_out,"
      << r.papers_out << "\nedges_out," << r.edges_out << '\n';
}

// ---------------------------------------------------------------------------
// Commands

void cmd_link(const Settings& s, const Header& h, std::ostream& log) {
  require_file(s.a_path, "a");
  require_file(s.b_path, "b");
  const auto a = harvest::load_raw_records(s.a_path, harvest::Source::A);
  const auto b = harvest::load_raw_records(s.b_path, harvest::Source::B);
  const auto result = harvest::link_corpora(a, b);
  Outputs out(s.out, h);
  harvest::write_link_report(out.add("link_report.csv"), result);
  out.commit();
  log << fmt::format("matched {}, ambiguous {}, unmatched {}\n", result.matches.size(),
                     result.ambiguous, result.unmatched);
}

void cmd_build(const Settings& s, const Header& h, std::ostream& log) {
  std::optional<harvest::DictionaryProvider> dict;
  harvest::ThresholdTable thresholds;
  if (!s.gender_dict.empty()) {
    require_file(s.gender_dict, "gender-dict");
    dict = harvest::DictionaryProvider::load(s.gender_dict);
    if (!s.thresholds.empty()) {
      require_file(s.thresholds, "thresholds");
      thresholds = harvest::ThresholdTable::load(s.thresholds);
    }
  } else if (!s.thresholds.empty()) {
    throw UsageError("--thresholds needs --gender-dict");
  }
  auto loaded = load_network(s, dict ? &thresholds : nullptr, dict ? &*dict : nullptr);
  const auto& net = *loaded.net;
  Outputs out(s.out, h);
  write_papers(out.add("papers.jsonl"), net.papers());
  write_citations(out.add("citations.csv"), net.citation_edges());
  write_authors(out.add("authors.jsonl"), net.authors().records());
  write_build_report(out.add("build_report.csv"), loaded.report);
  out.commit();
  log << fmt::format("network: {} papers, {} citations\n", net.size(), net.edge_count());
}

void cmd_randomize(const Settings& s, const Header& h, std::ostream& log) {
  const Model model = model_of(s);
  auto loaded = load_network(s);
  const CandidateIndex index(*loaded.net);
  const auto groups = standard_groups();
  const GroupTabulator tab(*loaded.net, groups);
  std::vector<std::size_t> fallbacks(s.replicates, 0);
  const auto summaries =
      run_replicates(index, model, s.replicates, s.seed, s.workers,
                     [&](const RandomizedNetwork& rn, std::size_t r) {
                       fallbacks[r] = rn.fallback_count;
                       return tab.tabulate(rn.edges);
                     });
  Outputs out(s.out, h);
  write_replicate_summary(out.add("replicate_summary.csv"), summaries);
  if (s.trace) {
    std::vector<DrawTrace> trace;
    for (std::size_t r = 0; r < s.replicates; ++r) {
      const std::size_t first = trace.size();
      randomize(index, model, s.seed + r, &trace);
      for (std::size_t k = first; k < trace.size(); ++k)
        trace[k].replicate = static_cast<std::uint32_t>(r);
    }
    write_draw_trace(out.add("draw_trace.csv"), *loaded.net, trace);
  }
  auto& meta = out.add("randomize_meta.csv");
  meta << "replicate,seed,fallback_count\n";
  for (std::size_t r = 0; r < s.replicates; ++r)
    meta << r << ',' << s.seed + r << ',' << fallbacks[r] << '\n';
  out.commit();
  log << fmt::format("{} replicates of {} over {} citations\n", s.replicates, to_string(model),
                     loaded.net->edge_count());
}

void cmd_analyze(const Settings& s, const Header& h, std::ostream& log) {
  const Model model = model_of(s);
  auto partition = parse_partition(s.partition);
  if (!partition) throw UsageError("unknown partition '" + s.partition + "'");
  std::vector<GroupSpec> groups;
  if (s.from != "all" || s.to != "all" || !s.group_name.empty()) {
    try {
      groups.push_back({s.group_name.empty() ? "custom" : s.group_name, PaperPredicate::parse(s.from),
                        PaperPredicate::parse(s.to), *partition});
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  } else {
    groups = standard_groups(*partition);
  }

  auto loaded = load_network(s);
  const auto& net = *loaded.net;
  const CandidateIndex index(net);
  const GroupTabulator tab(net, groups);
  std::vector<std::size_t> fallbacks(s.replicates, 0);
  const auto replicates = run_replicates(index, model, s.replicates, s.seed, s.workers,
                                         [&](const RandomizedNetwork& rn, std::size_t r) {
                                           fallbacks[r] = rn.fallback_count;
                                           return tab.tabulate(rn.edges);
                                         });
  const auto rows = summarize(tab.tabulate(net.edges()), replicates, s.two_sided);

  Outputs out(s.out, h);
  write_imbalance_report(out.add("imbalance.csv"), rows);
  auto& meta = out.add("imbalance_meta.csv");
  std::size_t total_fallback = 0;
  for (auto f : fallbacks) total_fallback += f;
  meta << "key,value\n"
       << "version," << kVersion << "\nmodel," << to_string(model) << "\nbase_seed," << s.seed
       << "\nreplicates," << s.replicates << "\nreplicate_seeds," << s.seed << ".."
       << s.seed + s.replicates - 1 << "\nrng," << StreamRng::kName << "\npd_tie_break,\""
       << kPdTieBreak << "\"\np_value," << (s.two_sided ? "two-sided" : "one-sided")
       << "\npapers," << net.size() << "\ncitations," << net.edge_count()
       << "\nfallback_total," << total_fallback << '\n';
  out.commit();
  std::size_t significant = 0;
  for (const auto& r : rows) significant += r.significant ? 1 : 0;
  log << fmt::format("{} rows, {} significant\n", rows.size(), significant);
}

void cmd_matchpairs(const Settings& s, const Header& h, std::ostream& log) {
  const Model model = model_of(s);
  std::vector<matching::Split> splits;
  std::vector<std::string> names = s.splits;
  if (names.empty()) names = {"gender_MM_vs_WW", "venue_type", "prominence", "ma_or_halves"};
  for (const auto& n : names) {
    auto sp = matching::parse_split(n);
    if (!sp) throw UsageError("unknown split '" + n + "'");
    splits.push_back(*sp);
  }
  auto loaded = load_network(s);
  const auto& net = *loaded.net;
  const CandidateIndex index(net);
  const auto ex = matching::paper_expectations(index, model, s.replicates, s.seed, s.workers);
  std::vector<matching::ComparisonRow> rows;
  for (auto sp : splits) {
    auto r = matching::compare_populations(
        net, ex, sp, {s.match_replicates, s.seed, s.prominence_percentile});
    rows.insert(rows.end(), r.begin(), r.end());
  }
  Outputs out(s.out, h);
  matching::write_comparison(out.add("matchpairs.csv"), rows);
  auto& meta = out.add("matchpairs_meta.csv");
  meta << "split,population,mean_pairs,mean_skipped\n";
  for (std::size_t k = 0; k < rows.size(); k += 4)
    meta << rows[k].split << ',' << rows[k].population << ','
         << fmt::format("{},{}", rows[k].mean_pairs, rows[k].mean_skipped) << '\n';
  out.commit();
  std::size_t rejected = 0;
  for (const auto& r : rows) rejected += (r.test && r.test->reject) ? 1 : 0;
  log << fmt::format("{} rows, {} rejections\n", rows.size(), rejected);
}

void cmd_synth(const Settings& s, const Header& h, std::ostream& log) {
  synth::SynthConfig config;
  config.seed = s.seed;
  for (const auto& p : s.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + p + "'");
    try {
      synth::set_option(config, trim(std::string_view(p).substr(0, eq)),
                        trim(std::string_view(p).substr(eq + 1)));
      synth::validate(config);
    } catch (const InputError& e) {
      throw UsageError(e.what());
    }
  }
  config.seed = s.seed;
  const auto corpus = synth::generate(config);
  Outputs out(s.out, h);
  write_papers(out.add("papers.jsonl"), corpus.papers);
  write_citations(out.add("citations.csv"), corpus.citations);
  write_authors(out.add("authors.jsonl"), corpus.authors);
  out.commit();
  log << fmt::format("{} papers, {} citations, {} authors\n", corpus.papers.size(),
                     corpus.citations.size(), corpus.authors.size());
}

struct Characteristic {
  const char* name;
  std::vector<std::optional<bool>> value;  // by paper index
};

void cmd_report(const Settings& s, const Header& h, std::ostream& log) {
  auto loaded = load_network(s);
  const auto& net = *loaded.net;
  Outputs out(s.out, h);

  // Corpus summary.
  auto& summary = out.add("corpus_summary.csv");
  std::array<std::size_t, 4> by_cat{};
  std::size_t conference = 0;
  for (const auto& p : net.papers()) {
    if (p.gender_category) ++by_cat[index_of(*p.gender_category)];
    if (p.venue_type == VenueType::Conference) ++conference;
  }
  std::set<AuthorTable::Index> network_authors;
  for (CitationNetwork::Index i = 0; i < net.size(); ++i)
    for (auto a : net.authors_of(i)) network_authors.insert(a);
  std::size_t women = 0, men = 0;
  for (auto a : network_authors) {
    const auto& g = net.authors().record(a).gender;
    if (g) (*g == Gender::Female ? women : men)++;
  }
  auto pct = [](std::size_t k, std::size_t n) { return n ? 100.0 * k / static_cast<double>(n) : 0.0; };
  summary << "metric,value,percent\n";
  summary << fmt::format("papers,{},\ncitations,{},\n", net.size(), net.edge_count());
  for (auto c : kGenderCategories)
    summary << fmt::format("papers_{},{},{:.1f}\n", to_string(c), by_cat[index_of(c)],
                           pct(by_cat[index_of(c)], net.size()));
  summary << fmt::format("conference_papers,{},{:.1f}\n", conference, pct(conference, net.size()));
  summary << fmt::format("journal_papers,{},{:.1f}\n", net.size() - conference,
                         pct(net.size() - conference, net.size()));
  summary << fmt::format("authors,{},\n", network_authors.size());
  summary << fmt::format("male_authors,{},{:.1f}\n", men, pct(men, men + women));
  summary << fmt::format("female_authors,{},{:.1f}\n", women, pct(women, men + women));

  // Pairwise independence of venue type, prominence and MA_or half.
  const double overall = matching::overall_male_fraction(net);
  const auto cutoffs = matching::prominence_cutoffs(net.authors().records(), s.prominence_percentile);
  auto& indep = out.add("independence.csv");
  indep << "category,x,y,n,chi2,p,reject\n";
  for (auto g : {GenderCategory::MM, GenderCategory::WW}) {
    std::vector<CitationNetwork::Index> papers;
    std::vector<double> ma;
    for (CitationNetwork::Index i = 0; i < net.size(); ++i)
      if (net.paper(i).gender_category == g && matching::match_key(net, i)) papers.push_back(i);
    std::vector<Characteristic> chars{{"venue_type", {}}, {"prominence", {}}, {"ma_or", {}}};
    std::vector<double> defined;
    for (auto i : papers) {
      chars[0].value.push_back(net.paper(i).venue_type == VenueType::Conference);
      chars[1].value.push_back(matching::prominent_flag(net, i, cutoffs));
      auto v = matching::ma_or(net, i, overall);
      ma.push_back(v ? *v : std::nan(""));
      if (v) defined.push_back(*v);
    }
    std::sort(defined.begin(), defined.end());
    const std::size_t n = defined.size();
    const double median =
        n == 0 ? 0.0 : (n % 2 ? defined[n / 2] : (defined[n / 2 - 1] + defined[n / 2]) / 2.0);
    for (double v : ma)
      chars[2].value.push_back(std::isnan(v) ? std::nullopt : std::optional<bool>(v > median));
    for (std::size_t x = 0; x < chars.size(); ++x)
      for (std::size_t y = x + 1; y < chars.size(); ++y) {
        stats::ContingencyTable2x2 t;
        for (std::size_t k = 0; k < papers.size(); ++k) {
          const auto& a = chars[x].value[k];
          const auto& b = chars[y].value[k];
          if (a && b) ++t.o[*a ? 0 : 1][*b ? 0 : 1];
        }
        indep << fmt::format("{},{},{},{},", to_string(g), chars[x].name, chars[y].name, t.total());
        try {
          const auto r = stats::yates_chi2(t);
          indep << fmt::format("{},{},{}\n", r.chi2, r.p, r.reject ? "true" : "false");
        } catch (const InputError&) {
          indep << "undefined,undefined,false\n";
        }
      }
  }

  // Share of each category per partition cell against its over/under-citation.
  if (!s.imbalance.empty()) {
    require_file(s.imbalance, "imbalance");
    std::ifstream in(s.imbalance);
    const auto rows = read_imbalance_report(in);
    auto& sp = out.add("spearman.csv");
    sp << "partition,category,n_cells,rho\n";
    // partition -> category -> cell -> over_under
    std::map<std::string, std::map<GenderCategory, std::map<std::string, double>>> cells;
    for (const auto& r : rows) {
      const auto colon = r.group.find(':');
      if (colon == std::string::npos || r.group.substr(0, colon) != "All" || !r.over_under) continue;
      const std::string rest = r.group.substr(colon + 1);
      const auto eq = rest.find('=');
      if (eq == std::string::npos) continue;
      cells[rest.substr(0, eq)][r.category][rest.substr(eq + 1)] = *r.over_under;
    }
    for (const auto& [pname, by_category] : cells) {
      const auto partition = parse_partition(pname);
      if (!partition) continue;
      std::map<std::string, std::array<std::size_t, 5>> share;  // 4 categories + total
      for (const auto& p : net.papers()) {
        if (!p.gender_category) continue;
        auto& c = share[partition_value(p, *partition)];
        ++c[index_of(*p.gender_category)];
        ++c[4];
      }
      for (const auto& [cat, values] : by_category) {
        std::vector<double> xs, ys;
        for (const auto& [cell, ou] : values) {
          auto it = share.find(cell);
          if (it == share.end() || it->second[4] == 0) continue;
          xs.push_back(static_cast<double>(it->second[index_of(cat)]) /
                       static_cast<double>(it->second[4]));
          ys.push_back(ou);
        }
        std::optional<double> rho;
        if (xs.size() >= 2) rho = spearman(xs, ys);
        sp << fmt::format("{},{},{},{}\n", pname, to_string(cat), xs.size(),
                          rho ? fmt::format("{}", *rho) : std::string("undefined"));
      }
    }
  }
  out.commit();
  log << fmt::format("report for {} papers\n", net.size());
}

// ---------------------------------------------------------------------------

void add_common(CLI::App* sub, Settings& s, bool with_seed = true) {
  sub->add_option("--out", s.out, "Output directory")->required();
  sub->add_option("--config", s.config, "Flat key = value settings file");
  if (with_seed) sub->add_option("--seed", s.seed, "Base seed");
}

void add_corpus(CLI::App* sub, Settings& s) {
  sub->add_option("--papers", s.papers, "Papers JSON Lines file")->required();
  sub->add_option("--citations", s.citations, "Citations CSV file")->required();
  sub->add_option("--authors", s.authors, "Authors JSON Lines file")->required();
  sub->add_flag("--keep-isolated", s.keep_isolated, "Keep papers without citations");
  sub->add_flag("--include-self-citations", s.include_self_citations,
                "Skip the shared-author and coauthor rules");
}

void add_model(CLI::App* sub, Settings& s) {
  sub->add_option("--model", s.model, "Reference model")
      ->check(CLI::IsMember({"rd", "hd", "pd", "RD", "HD", "PD"}));
  sub->add_option("--replicates", s.replicates, "Randomized networks")->check(CLI::PositiveNumber);
  sub->add_option("--workers", s.workers, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Citation imbalance analysis under randomized reference models", "citegap"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);

  auto* link = app.add_subcommand("link", "Link two raw bibliographic record sets");
  link->add_option("--a", s.a_path, "Source A records (JSON Lines)")->required();
  link->add_option("--b", s.b_path, "Source B records (JSON Lines)")->required();
  add_common(link, s);

  auto* build = app.add_subcommand("build", "Enrich and filter a corpus into a citation network");
  add_corpus(build, s);
  build->add_option("--gender-dict", s.gender_dict, "Name dictionary CSV for gender inference");
  build->add_option("--thresholds", s.thresholds, "Gender threshold table CSV");
  add_common(build, s);

  auto* randomize_cmd = app.add_subcommand("randomize", "Tabulate randomized replicates");
  add_corpus(randomize_cmd, s);
  add_model(randomize_cmd, s);
  randomize_cmd->add_flag("--trace", s.trace, "Write the per-draw trace");
  add_common(randomize_cmd, s);

  auto* analyze_cmd = app.add_subcommand("analyze", "Over/under-citation with z-scores");
  add_corpus(analyze_cmd, s);
  add_model(analyze_cmd, s);
  analyze_cmd->add_option("--partition", s.partition, "Cell partition")
      ->check(CLI::IsMember({"none", "subfield", "topic", "venue_rank", "venue_type", "year", "venue"}));
  analyze_cmd->add_flag("--two-sided", s.two_sided, "Report two-sided p-values");
  analyze_cmd->add_option("--from", s.from, "Citing-paper filter, e.g. gender_category=WW");
  analyze_cmd->add_option("--to", s.to, "Cited-paper filter");
  analyze_cmd->add_option("--group-name", s.group_name, "Name of the custom group");
  add_common(analyze_cmd, s);

  auto* match_cmd = app.add_subcommand("matchpairs", "Matched-pair comparisons");
  add_corpus(match_cmd, s);
  add_model(match_cmd, s);
  match_cmd->add_option("--split", s.splits, "Split(s); default: the four standard splits");
  match_cmd->add_option("--match-replicates", s.match_replicates, "Matched sets per comparison")
      ->check(CLI::Range(std::size_t{2}, std::size_t{1000000}));
  match_cmd->add_option("--prominence-percentile", s.prominence_percentile,
                        "Top share of each gender counted as prominent")
      ->check(CLI::Range(1e-9, 1.0));
  add_common(match_cmd, s);

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--param", s.params, "Generator setting key=value (repeatable)");
  add_common(synth_cmd, s);

  auto* report_cmd = app.add_subcommand("report", "Corpus summary and characteristic tests");
  add_corpus(report_cmd, s);
  report_cmd->add_option("--imbalance", s.imbalance, "Partitioned imbalance.csv for Spearman");
  report_cmd->add_option("--prominence-percentile", s.prominence_percentile,
                         "Top share of each gender counted as prominent")
      ->check(CLI::Range(1e-9, 1.0));
  add_common(report_cmd, s);

  std::vector<std::string> argv_vec;
  try {
    argv_vec = merge_config(app, args);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSchema;
  }

  try {
    std::vector<std::string> reversed(argv_vec.rbegin(), argv_vec.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Header header;
  header.command = sub->get_name();
  header.config_hash = fnv1a64(settings_text(*sub));
  header.seed = s.seed;
  if (sub == randomize_cmd || sub == analyze_cmd || sub == match_cmd)
    if (auto m = parse_model(s.model)) header.model = *m;

  try {
    if (sub == link) cmd_link(s, header, out);
    else if (sub == build) cmd_build(s, header, out);
    else if (sub == randomize_cmd) cmd_randomize(s, header, out);
    else if (sub == analyze_cmd) cmd_analyze(s, header, out);
    else if (sub == match_cmd) cmd_matchpairs(s, header, out);
    else if (sub == synth_cmd) cmd_synth(s, header, out);
    else if (sub == report_cmd) cmd_report(s, header, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const IngestError& e) {
    err << "error: " << e.what() << '\n';
    return kExitSchema;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace citegap::cli
