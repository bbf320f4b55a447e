#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citegap/corpus.hpp"
#include "citegap/nullmodels.hpp"
#include "citegap/types.hpp"

namespace citegap {

/// Conjunction of field tests over a PaperRecord.
///
/// Text form: "all", or `field=value` terms joined by '&'. Fields:
/// gender_category, venue_type, venue_rank, country, topic_id, subfield_id,
/// venue_id, year. A paper with no value for a field never matches a test on it.
class PaperPredicate {
 public:
  PaperPredicate() = default;  // all
  /// Throws InputError on unknown fields or invalid enum values.
  static PaperPredicate parse(std::string_view text);

  bool operator()(const PaperRecord& p) const;
  bool is_all() const { return terms_.empty(); }
  std::string to_string() const;

 private:
  struct Term {
    std::string field;
    std::string value;
  };
  std::vector<Term> terms_;
};

enum class Partition : std::uint8_t {
  None,
  BySubfield,
  ByTopic,
  ByVenueRank,
  ByVenueType,
  ByYear,  // year of the citing paper
  ByVenue,
};

std::string_view to_string(Partition p);
/// "none", "subfield", "topic", "venue_rank", "venue_type", "year", "venue".
std::optional<Partition> parse_partition(std::string_view s);

struct GroupSpec {
  std::string name;
  PaperPredicate from;
  PaperPredicate to;
  Partition partition = Partition::None;
};

/// All, MM, MW, WM, WW citing papers, any target, no partition.
std::vector<GroupSpec> standard_groups(Partition partition = Partition::None);

/// Cell value of a paper under a partition; empty for Partition::None.
std::string partition_value(const PaperRecord& p, Partition partition);

/// "name" for unpartitioned groups, "name:partition=value" otherwise.
std::string group_label(std::string_view name, Partition partition, std::string_view value);

struct CellKey {
  std::string group;  // group_label(...)
  GenderCategory category = GenderCategory::MM;

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

using CellCounts = std::map<CellKey, std::int64_t>;

/// Counts edges by (group cell, target gender category) for a fixed network.
/// Membership is precomputed once; tabulate() is safe to call concurrently.
class GroupTabulator {
 public:
  GroupTabulator(const CitationNetwork& net, std::span<const GroupSpec> groups);

  CellCounts tabulate(std::span<const CitationNetwork::Edge> edges) const;

 private:
  struct Compiled {
    Partition partition;
    std::vector<bool> from_ok;
    std::vector<std::int32_t> to_cell;    // target cell id, -1 if excluded
    std::vector<std::int32_t> from_cell;  // citing-year cell id for ByYear
  };
  const CitationNetwork* net_;
  std::vector<Compiled> groups_;
  std::vector<std::string> labels_;  // by cell id
  std::vector<std::int8_t> category_;  // target category index, -1 if none
};

/// Edges from papers matching spec.from to categorized papers matching spec.to.
/// An empty from-set yields an empty map.
CellCounts observed_counts(const CitationNetwork& net, const GroupSpec& spec);

/// (n_obs - mu) / mu, or nullopt when mu == 0.
std::optional<double> over_under(double n_obs, double mu);

inline constexpr double kZThreshold = 3.09;

struct ZResult {
  std::optional<double> z;
  std::optional<double> p;
  bool significant = false;  // |z| > kZThreshold
};

/// z = (n_obs - mu) / sigma. The p-value is the one-sided normal tail of |z|,
/// doubled when `two_sided`. sigma == 0 gives z = 0 when n_obs == mu and an
/// undefined result otherwise. Throws InputError on negative sigma.
ZResult z_and_p(double n_obs, double mu, double sigma, bool two_sided = false);

struct ImbalanceStat {
  std::string group;
  GenderCategory category = GenderCategory::MM;
  std::int64_t n_obs = 0;
  double mu = 0.0;
  double sigma = 0.0;  // population standard deviation over replicates
  std::optional<double> over_under;
  std::optional<double> z;
  std::optional<double> p;
  bool significant = false;

  /// +1 over-cited, -1 under-cited, 0 not significant.
  int direction() const { return significant ? (*z > 0 ? 1 : -1) : 0; }
};

/// Joins observed counts with replicate counts. Every group seen in either
/// input gets one row per category; rows are sorted by group then category.
std::vector<ImbalanceStat> summarize(const CellCounts& observed,
                                     std::span<const CellCounts> replicates,
                                     bool two_sided = false);

struct AnalyzeOptions {
  std::size_t n_replicates = 100;
  std::uint64_t base_seed = 0;
  unsigned workers = 1;
  bool two_sided = false;
};

std::vector<ImbalanceStat> analyze(const CandidateIndex& index, Model model,
                                   std::span<const GroupSpec> groups,
                                   const AnalyzeOptions& options);
std::vector<ImbalanceStat> analyze(const CitationNetwork& net, Model model,
                                   std::span<const GroupSpec> groups,
                                   const AnalyzeOptions& options);

/// Spearman rank correlation with average ranks for ties. nullopt when either
/// input is constant; throws InputError on length mismatch or fewer than 2 points.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

/// CSV `group,category,n_obs,mu,sigma,over_under_pct,z,p,significant`.
/// Undefined statistics are written as "undefined".
void write_imbalance_report(std::ostream& out, std::span<const ImbalanceStat> rows);
/// Reads the format above, skipping '#' lines. Throws ParseError.
std::vector<ImbalanceStat> read_imbalance_report(std::istream& in);

/// CSV `replicate,from_group,to_category,count`.
void write_replicate_summary(std::ostream& out, std::span<const CellCounts> replicates);

}  // namespace citegap
