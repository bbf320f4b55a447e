#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "citegap/corpus.hpp"
#include "citegap/csv.hpp"
#include "citegap/error.hpp"
#include "json.hpp"

namespace citegap {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

json parse_object(const std::string& line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw ParseError("expected a JSON object", line_no);
  return obj;
}

void check_keys(const json& obj, const std::set<std::string_view>& allowed, std::size_t line_no) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key)) throw ParseError("unknown field '" + key + "'", line_no);
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null())
    throw ParseError(std::string("missing field '") + key + "'", line_no);
  return *it;
}

std::string get_string(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_string()) throw ParseError(std::string("field '") + key + "' must be a string", line_no);
  return v.get<std::string>();
}

std::optional<std::string> get_opt_string(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string())
    throw ParseError(std::string("field '") + key + "' must be a string or null", line_no);
  return it->get<std::string>();
}

std::vector<std::string> get_string_list(const json& obj, const char* key, std::size_t line_no,
                                         bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw ParseError(std::string("missing field '") + key + "'", line_no);
    return {};
  }
  if (!it->is_array())
    throw ParseError(std::string("field '") + key + "' must be an array", line_no);
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string())
      throw ParseError(std::string("field '") + key + "' must hold strings", line_no);
    out.push_back(v.get<std::string>());
  }
  return out;
}

Date parse_date_at(const std::string& s, std::size_t line_no) {
  try {
    return parse_date(s);
  } catch (const ParseError& e) {
    throw ParseError(e.what(), line_no);
  }
}

template <class T, class ParseFn>
std::optional<T> get_opt_enum(const json& obj, const char* key, std::size_t line_no, ParseFn parse) {
  auto s = get_opt_string(obj, key, line_no);
  if (!s) return std::nullopt;
  auto v = parse(*s);
  if (!v) throw ParseError(std::string("invalid value '") + *s + "' for '" + key + "'", line_no);
  return v;
}

template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    fn(line, line_no);
  }
}

const std::set<std::string_view> kPaperKeys{
    "paper_id", "title",       "pub_date",   "year",       "venue_id",         "venue_type",
    "venue_rank", "country",   "topic_id",   "subfield_id", "author_ids", "gender_category"};

const std::set<std::string_view> kAuthorKeys{"author_id",      "full_name",  "country",
                                             "gender",         "first_pub_year", "prominence",
                                             "coauthors",      "affiliation_countries"};

json opt_json(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

}  // namespace

std::vector<PaperRecord> read_papers(std::istream& in) {
  std::vector<PaperRecord> papers;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const json obj = parse_object(line, line_no);
    check_keys(obj, kPaperKeys, line_no);
    PaperRecord p;
    p.paper_id = get_string(obj, "paper_id", line_no);
    p.title = get_string(obj, "title", line_no);
    p.pub_date = parse_date_at(get_string(obj, "pub_date", line_no), line_no);
    p.year = year_of(p.pub_date);
    if (auto it = obj.find("year"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer()) throw ParseError("field 'year' must be an integer", line_no);
      if (it->get<int>() != p.year)
        throw ParseError("field 'year' disagrees with 'pub_date'", line_no);
    }
    p.venue_id = get_string(obj, "venue_id", line_no);
    auto vt = parse_venue_type(get_string(obj, "venue_type", line_no));
    if (!vt) throw ParseError("invalid value for 'venue_type'", line_no);
    p.venue_type = *vt;
    p.venue_rank = get_opt_enum<VenueRank>(obj, "venue_rank", line_no, parse_venue_rank);
    p.country = get_opt_string(obj, "country", line_no);
    p.topic_id = get_string(obj, "topic_id", line_no);
    p.subfield_id = get_string(obj, "subfield_id", line_no);
    p.author_ids = get_string_list(obj, "author_ids", line_no, true);
    if (p.author_ids.empty()) throw ParseError("'author_ids' must not be empty", line_no);
    p.gender_category =
        get_opt_enum<GenderCategory>(obj, "gender_category", line_no, parse_gender_category);

    auto [it, inserted] = seen.emplace(p.paper_id, line_no);
    if (!inserted)
      throw IngestError("duplicate paper_id '" + p.paper_id + "' on lines " +
                        std::to_string(it->second) + " and " + std::to_string(line_no));
    papers.push_back(std::move(p));
  });
  return papers;
}

std::vector<PaperRecord> load_papers(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_papers(in);
}

std::string paper_to_json(const PaperRecord& p) {
  json obj = json::object();
  obj["paper_id"] = p.paper_id;
  obj["title"] = p.title;
  obj["pub_date"] = format_date(p.pub_date);
  obj["year"] = p.year;
  obj["venue_id"] = p.venue_id;
  obj["venue_type"] = std::string(to_string(p.venue_type));
  obj["venue_rank"] = p.venue_rank ? json(std::string(to_string(*p.venue_rank))) : json(nullptr);
  obj["country"] = opt_json(p.country);
  obj["topic_id"] = p.topic_id;
  obj["subfield_id"] = p.subfield_id;
  obj["author_ids"] = p.author_ids;
  obj["gender_category"] =
      p.gender_category ? json(std::string(to_string(*p.gender_category))) : json(nullptr);
  return obj.dump();
}

void write_papers(std::ostream& out, std::span<const PaperRecord> papers) {
  for (const auto& p : papers) out << paper_to_json(p) << '\n';
}

std::vector<AuthorRecord> read_authors(std::istream& in) {
  std::vector<AuthorRecord> authors;
  std::unordered_map<std::string, std::size_t> seen;
  for_each_line(in, [&](const std::string& line, std::size_t line_no) {
    const json obj = parse_object(line, line_no);
    check_keys(obj, kAuthorKeys, line_no);
    AuthorRecord a;
    a.author_id = get_string(obj, "author_id", line_no);
    a.full_name = get_string(obj, "full_name", line_no);
    a.country = get_opt_string(obj, "country", line_no);
    a.gender = get_opt_enum<Gender>(obj, "gender", line_no, parse_gender);
    if (auto it = obj.find("first_pub_year"); it != obj.end() && !it->is_null()) {
      if (!it->is_number_integer())
        throw ParseError("field 'first_pub_year' must be an integer", line_no);
      a.first_pub_year = it->get<int>();
    }
    a.affiliation_countries = get_string_list(obj, "affiliation_countries", line_no, false);
    auto [it, inserted] = seen.emplace(a.author_id, line_no);
    if (!inserted)
      throw IngestError("duplicate author_id '" + a.author_id + "' on lines " +
                        std::to_string(it->second) + " and " + std::to_string(line_no));
    authors.push_back(std::move(a));
  });
  return authors;
}

std::vector<AuthorRecord> load_authors(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_authors(in);
}

std::string author_to_json(const AuthorRecord& a) {
  json obj = json::object();
  obj["author_id"] = a.author_id;
  obj["full_name"] = a.full_name;
  obj["country"] = opt_json(a.country);
  obj["gender"] = a.gender ? json(std::string(to_string(*a.gender))) : json(nullptr);
  obj["first_pub_year"] = a.first_pub_year;
  obj["prominence"] = a.prominence;
  return obj.dump();
}

void write_authors(std::ostream& out, std::span<const AuthorRecord> authors) {
  for (const auto& a : authors) out << author_to_json(a) << '\n';
}

std::vector<CitationEdge> read_citations(std::istream& in) {
  std::vector<CitationEdge> edges;
  csv::Reader reader(in);
  while (auto row = reader.next()) {
    if (row->size() != 2)
      throw ParseError("expected 'src_paper_id,dst_paper_id'", reader.line());
    if ((*row)[0].empty() || (*row)[1].empty())
      throw ParseError("empty paper id", reader.line());
    edges.push_back({std::move((*row)[0]), std::move((*row)[1])});
  }
  return edges;
}

std::vector<CitationEdge> load_citations(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_citations(in);
}

void write_citations(std::ostream& out, std::span<const CitationEdge> edges) {
  for (const auto& e : edges) out << csv::escape(e.src) << ',' << csv::escape(e.dst) << '\n';
}

AuthorMap make_author_map(std::vector<AuthorRecord> authors) {
  AuthorMap map;
  map.reserve(authors.size());
  for (auto& a : authors) {
    std::string id = a.author_id;
    if (!map.emplace(id, std::move(a)).second)
      throw IngestError("duplicate author_id '" + id + "'");
  }
  return map;
}

}  // namespace citegap
