#include "citegap/harvest.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "citegap/csv.hpp"
#include "json.hpp"

namespace citegap::harvest {

namespace {

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string to_utf8(const std::u32string& s) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF32(reinterpret_cast<const UChar32*>(s.data()),
                                                       static_cast<int32_t>(s.size()));
  std::string out;
  u.toUTF8String(out);
  return out;
}

std::string fold_key(std::string_view s) { return to_utf8(normalize_for_matching(s)); }

}  // namespace

std::u32string normalize_for_matching(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  s = nfc->normalize(s, status);
  s.foldCase(U_FOLD_CASE_DEFAULT);
  s = nfc->normalize(s, status);
  if (U_FAILURE(status)) throw Error("Unicode normalization failed");
  std::u32string out;
  out.reserve(static_cast<std::size_t>(s.length()));
  for (int32_t i = 0; i < s.length(); i = s.moveIndex32(i, 1))
    out.push_back(static_cast<char32_t>(s.char32At(i)));
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

namespace {

double normalized_distance(const std::u32string& a, const std::u32string& b) {
  const std::size_t longer = std::max(a.size(), b.size());
  if (longer == 0) return 0.0;
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longer);
}

}  // namespace

double normalized_levenshtein(std::string_view a, std::string_view b) {
  return normalized_distance(normalize_for_matching(a), normalize_for_matching(b));
}

std::string last_name(std::string_view full_name) {
  auto t = tokens(full_name);
  if (t.empty()) throw InputError("empty author name");
  return std::string(t.back());
}

namespace {

// Year and folded last names joined with a unit separator.
std::string block_key(const RawRecord& r) {
  std::string key = std::to_string(r.year);
  for (const auto& name : r.author_full_names) {
    key.push_back('\x1f');
    key += fold_key(last_name(name));
  }
  return key;
}

}  // namespace

bool records_match(const RawRecord& a, const RawRecord& b) {
  if (a.year != b.year) return false;
  if (a.author_full_names.size() != b.author_full_names.size()) return false;
  if (block_key(a) != block_key(b)) return false;
  return normalized_levenshtein(a.title, b.title) <= kTitleThreshold;
}

std::string_view to_string(LinkStatus s) {
  switch (s) {
    case LinkStatus::Matched: return "matched";
    case LinkStatus::Ambiguous: return "ambiguous";
    case LinkStatus::Unmatched: return "unmatched";
  }
  return "?";
}

LinkResult link_corpora(std::span<const RawRecord> a, std::span<const RawRecord> b) {
  std::unordered_map<std::string, std::vector<std::size_t>> blocks;
  std::vector<std::u32string> b_titles(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) {
    blocks[block_key(b[j])].push_back(j);
    b_titles[j] = normalize_for_matching(b[j].title);
  }

  std::vector<std::vector<std::size_t>> hits(a.size());
  std::vector<std::size_t> claimed(b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto it = blocks.find(block_key(a[i]));
    if (it == blocks.end()) continue;
    const std::u32string title = normalize_for_matching(a[i].title);
    for (std::size_t j : it->second)
      if (normalized_distance(title, b_titles[j]) <= kTitleThreshold) {
        hits[i].push_back(j);
        ++claimed[j];
      }
  }

  LinkResult result;
  result.report.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    LinkRow row{a[i].record_id, {}, LinkStatus::Unmatched};
    if (hits[i].empty()) {
      ++result.unmatched;
    } else if (hits[i].size() == 1 && claimed[hits[i][0]] == 1) {
      row.status = LinkStatus::Matched;
      row.b_id = b[hits[i][0]].record_id;
      result.matches.emplace(row.a_id, row.b_id);
    } else {
      row.status = LinkStatus::Ambiguous;
      ++result.ambiguous;
    }
    result.report.push_back(std::move(row));
  }
  return result;
}

std::vector<RawRecord> read_raw_records(std::istream& in, Source source) {
  using nlohmann::json;
  std::vector<RawRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      RawRecord r;
      r.source = source;
      r.record_id = obj.at("record_id").get<std::string>();
      r.title = obj.at("title").get<std::string>();
      r.year = obj.at("year").get<int>();
      r.author_full_names = obj.at("author_full_names").get<std::vector<std::string>>();
      if (r.author_full_names.empty()) throw ParseError("empty author list", line_no);
      for (const auto& name : r.author_full_names)
        if (tokens(name).empty()) throw ParseError("blank author name", line_no);
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid record: ") + e.what(), line_no);
    }
  }
  return out;
}

std::vector<RawRecord> load_raw_records(const std::filesystem::path& path, Source source) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_raw_records(in, source);
}

void write_link_report(std::ostream& out, const LinkResult& result) {
  out << "a_id,b_id,status\n";
  for (const auto& row : result.report)
    out << csv::escape(row.a_id) << ',' << csv::escape(row.b_id) << ',' << to_string(row.status)
        << '\n';
}

// ---------------------------------------------------------------------------

std::vector<std::string> first_name_candidates(std::string_view full_name,
                                               std::string_view country) {
  auto t = tokens(full_name);
  if (t.empty()) return {};
  if (country != "CN" && country != "JP" && country != "KR") return {std::string(t.front())};
  std::vector<std::string> out;
  std::string prefix;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    if (k > 0) prefix.push_back(' ');
    prefix += t[k];
    out.push_back(prefix);
  }
  return out;
}

std::optional<GenderLabel> parse_gender_label(std::string_view s) {
  if (s == "female") return GenderLabel::Female;
  if (s == "male") return GenderLabel::Male;
  if (s == "unknown") return GenderLabel::Unknown;
  return std::nullopt;
}

namespace {

template <class T>
T parse_number(const std::string& s, std::size_t line_no, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(std::string("invalid ") + what + " '" + s + "'", line_no);
  return value;
}

}  // namespace

DictionaryProvider DictionaryProvider::read(std::istream& in) {
  DictionaryProvider dict;
  csv::Reader reader(in);
  bool first = true;
  while (auto row = reader.next()) {
    if (first && !row->empty() && (*row)[0] == "first_name") {
      first = false;
      continue;
    }
    first = false;
    if (row->size() != 5)
      throw ParseError("expected 'first_name,country,label,accuracy,samples'", reader.line());
    auto label = parse_gender_label((*row)[2]);
    if (!label) throw ParseError("invalid label '" + (*row)[2] + "'", reader.line());
    GenderLookupResult r{*label, parse_number<double>((*row)[3], reader.line(), "accuracy"),
                         parse_number<std::int64_t>((*row)[4], reader.line(), "samples")};
    if (r.accuracy < 0 || r.accuracy > 100)
      throw ParseError("accuracy out of [0, 100]", reader.line());
    if (r.samples < 0) throw ParseError("negative sample size", reader.line());
    dict.add((*row)[0], (*row)[1], r);
  }
  return dict;
}

DictionaryProvider DictionaryProvider::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read(in);
}

void DictionaryProvider::add(std::string_view first_name, std::string_view country,
                             GenderLookupResult result) {
  entries_[{fold_key(first_name), std::string(country)}] = result;
}

std::vector<GenderLookupResult> DictionaryProvider::lookup(std::span<const GenderQuery> queries) {
  std::vector<GenderLookupResult> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    const std::string key = fold_key(q.candidate);
    auto it = entries_.find({key, q.country});
    if (it == entries_.end()) it = entries_.find({key, std::string()});
    out.push_back(it == entries_.end() ? GenderLookupResult{} : it->second);
  }
  return out;
}

ThresholdTable ThresholdTable::read(std::istream& in) {
  std::vector<Threshold> rows;
  csv::Reader reader(in);
  bool first = true;
  while (auto row = reader.next()) {
    if (first && !row->empty() && (*row)[0] == "country") {
      first = false;
      continue;
    }
    first = false;
    if (row->size() != 5)
      throw ParseError("expected 'country,year_from,year_to,min_accuracy,min_samples'",
                       reader.line());
    Threshold t;
    t.country = (*row)[0].empty() ? "*" : (*row)[0];
    if (!(*row)[1].empty()) t.year_from = parse_number<int>((*row)[1], reader.line(), "year");
    if (!(*row)[2].empty()) t.year_to = parse_number<int>((*row)[2], reader.line(), "year");
    t.min_accuracy = parse_number<double>((*row)[3], reader.line(), "accuracy");
    t.min_samples = parse_number<std::int64_t>((*row)[4], reader.line(), "samples");
    rows.push_back(std::move(t));
  }
  if (rows.empty()) throw ParseError("threshold table has no rows");
  return ThresholdTable(std::move(rows));
}

ThresholdTable ThresholdTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read(in);
}

std::optional<Threshold> ThresholdTable::find(std::string_view country, int year) const {
  const Threshold* fallback = nullptr;
  for (const auto& row : rows_) {
    if (year < row.year_from || year > row.year_to) continue;
    if (row.country == country) return row;
    if (row.country == "*" && !fallback) fallback = &row;
  }
  if (fallback) return *fallback;
  return std::nullopt;
}

std::optional<Gender> assign_gender(std::span<const std::string> candidates,
                                    std::string_view country, int first_pub_year,
                                    GenderProvider& provider, const ThresholdTable& thresholds) {
  if (candidates.empty()) return std::nullopt;
  auto threshold = thresholds.find(country, first_pub_year);
  if (!threshold) return std::nullopt;

  std::vector<GenderQuery> queries;
  for (const auto& c : candidates) queries.push_back({c, std::string(country)});
  std::vector<GenderLookupResult> results;
  try {
    results = provider.lookup(queries);
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(candidates.front(), e.what());
  }
  if (results.size() != queries.size())
    throw ProviderError(candidates.front(), "provider returned a wrong number of results");

  std::optional<double> best_female, best_male;
  for (const auto& r : results) {
    if (r.label == GenderLabel::Unknown) continue;
    if (r.accuracy < threshold->min_accuracy || r.samples < threshold->min_samples) continue;
    auto& best = r.label == GenderLabel::Female ? best_female : best_male;
    if (!best || r.accuracy > *best) best = r.accuracy;
  }
  if (best_female && (!best_male || *best_female > *best_male)) return Gender::Female;
  if (best_male && (!best_female || *best_male > *best_female)) return Gender::Male;
  return std::nullopt;
}

void infer_author_genders(std::span<AuthorRecord> authors, GenderProvider& provider,
                          const ThresholdTable& thresholds) {
  for (auto& a : authors) {
    if (!a.country) {
      a.gender.reset();
      continue;
    }
    const auto candidates = first_name_candidates(a.full_name, *a.country);
    a.gender = assign_gender(candidates, *a.country, a.first_pub_year, provider, thresholds);
  }
}

}  // namespace citegap::harvest
