#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "citegap/corpus.hpp"
#include "citegap/error.hpp"
#include "citegap/types.hpp"

namespace citegap::harvest {

// ---------------------------------------------------------------------------
// Record linkage
// ---------------------------------------------------------------------------

enum class Source : std::uint8_t { A, B };

struct RawRecord {
  Source source = Source::A;
  std::string record_id;
  std::string title;
  int year = 0;
  std::vector<std::string> author_full_names;
};

/// Maximum normalized title distance for two records to match.
inline constexpr double kTitleThreshold = 0.25;

/// NFC normalization followed by Unicode case folding, as code points.
std::u32string normalize_for_matching(std::string_view utf8);

/// Edit distance (unit-cost insert/delete/substitute) over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Levenshtein distance of the normalized strings divided by the longer
/// length; 0 when both are empty.
double normalized_levenshtein(std::string_view a, std::string_view b);

/// Last whitespace-delimited token. Throws InputError on a blank name.
std::string last_name(std::string_view full_name);

/// Same year, same ordered sequence of case-folded last names (equal length),
/// and normalized title distance <= kTitleThreshold.
bool records_match(const RawRecord& a, const RawRecord& b);

enum class LinkStatus : std::uint8_t { Matched, Ambiguous, Unmatched };
std::string_view to_string(LinkStatus s);

struct LinkRow {
  std::string a_id;
  std::string b_id;  // empty unless matched
  LinkStatus status = LinkStatus::Unmatched;
};

struct LinkResult {
  std::map<std::string, std::string> matches;  // A id -> B id
  std::vector<LinkRow> report;                 // one row per A record, input order
  std::size_t ambiguous = 0;
  std::size_t unmatched = 0;
};

/// Links A records to B records. An A record is kept only when it matches
/// exactly one B record and that B record matches no other A record; all
/// other A records with matches are reported as ambiguous.
LinkResult link_corpora(std::span<const RawRecord> a, std::span<const RawRecord> b);

/// JSON Lines: {"record_id", "title", "year", "author_full_names": [...]}.
std::vector<RawRecord> read_raw_records(std::istream& in, Source source);
std::vector<RawRecord> load_raw_records(const std::filesystem::path& path, Source source);

/// CSV `a_id,b_id,status` with a header row.
void write_link_report(std::ostream& out, const LinkResult& result);

// ---------------------------------------------------------------------------
// Gender assignment
// ---------------------------------------------------------------------------

/// First-name candidates. For CN, JP and KR names with k tokens the candidates
/// are the prefixes w1, w1 w2, ..., w1..w(k-1); otherwise the first token.
std::vector<std::string> first_name_candidates(std::string_view full_name,
                                               std::string_view country);

enum class GenderLabel : std::uint8_t { Female, Male, Unknown };
std::optional<GenderLabel> parse_gender_label(std::string_view s);

struct GenderLookupResult {
  GenderLabel label = GenderLabel::Unknown;
  double accuracy = 0.0;     // percent, [0, 100]
  std::int64_t samples = 0;
};

struct GenderQuery {
  std::string candidate;
  std::string country;
};

/// Lookup failure that names the candidate being resolved.
class ProviderError : public LookupError {
 public:
  ProviderError(std::string candidate, const std::string& what)
      : LookupError("gender lookup failed for candidate '" + candidate + "': " + what),
        candidate_(std::move(candidate)) {}
  const std::string& candidate() const { return candidate_; }

 private:
  std::string candidate_;
};

/// Synchronous, batched name-to-gender service. Implementations return one
/// result per query, in order, and throw ProviderError on failure.
class GenderProvider {
 public:
  virtual ~GenderProvider() = default;
  virtual std::vector<GenderLookupResult> lookup(std::span<const GenderQuery> queries) = 0;
  /// False when lookup() must not be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

/// Offline provider backed by CSV rows `first_name,country,label,accuracy,samples`.
/// Names are matched case-insensitively; an empty country column applies to
/// every country and is used when no country-specific row exists.
class DictionaryProvider : public GenderProvider {
 public:
  DictionaryProvider() = default;
  static DictionaryProvider read(std::istream& in);
  static DictionaryProvider load(const std::filesystem::path& path);

  void add(std::string_view first_name, std::string_view country, GenderLookupResult result);
  std::vector<GenderLookupResult> lookup(std::span<const GenderQuery> queries) override;
  bool concurrent() const override { return true; }

 private:
  std::map<std::pair<std::string, std::string>, GenderLookupResult> entries_;
};

struct Threshold {
  std::string country = "*";  // "*" matches every country
  int year_from = std::numeric_limits<int>::min();
  int year_to = std::numeric_limits<int>::max();
  double min_accuracy = 90.0;
  std::int64_t min_samples = 10;
};

/// Minimum accuracy and sample size per (country, first publication year).
/// Country-specific rows take precedence over "*" rows; within a tier the
/// first matching row wins.
class ThresholdTable {
 public:
  /// Single global row: accuracy >= 90, samples >= 10.
  ThresholdTable() : rows_{Threshold{}} {}
  explicit ThresholdTable(std::vector<Threshold> rows) : rows_(std::move(rows)) {}

  /// CSV `country,year_from,year_to,min_accuracy,min_samples`; empty years are open.
  static ThresholdTable read(std::istream& in);
  static ThresholdTable load(const std::filesystem::path& path);

  std::optional<Threshold> find(std::string_view country, int year) const;

 private:
  std::vector<Threshold> rows_;
};

/// Compares the best surviving female accuracy with the best surviving male
/// accuracy; the higher wins, ties and empty results give nullopt.
std::optional<Gender> assign_gender(std::span<const std::string> candidates,
                                    std::string_view country, int first_pub_year,
                                    GenderProvider& provider, const ThresholdTable& thresholds);

/// Re-infers the gender of every author with an assigned country.
/// Authors without a country get no gender.
void infer_author_genders(std::span<AuthorRecord> authors, GenderProvider& provider,
                          const ThresholdTable& thresholds);

}  // namespace citegap::harvest
