#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citegap/types.hpp"

namespace citegap {

struct PaperRecord {
  std::string paper_id;
  std::string title;
  Date pub_date{};
  int year = 0;
  std::string venue_id;
  VenueType venue_type = VenueType::Conference;
  std::optional<VenueRank> venue_rank;
  std::optional<std::string> country;
  std::string topic_id;
  std::string subfield_id;
  std::vector<std::string> author_ids;
  std::optional<GenderCategory> gender_category;

  friend bool operator==(const PaperRecord&, const PaperRecord&) = default;
};

struct AuthorRecord {
  std::string author_id;
  std::string full_name;
  std::optional<std::string> country;
  std::optional<Gender> gender;
  int first_pub_year = 0;
  // Derived by compute_prominence_and_coauthors, never read from files.
  std::int64_t prominence = 0;
  std::vector<std::string> coauthors;  // sorted, unique, never contains author_id
  // Optional raw input for assign_country when `country` is absent.
  std::vector<std::string> affiliation_countries;

  friend bool operator==(const AuthorRecord&, const AuthorRecord&) = default;
};

struct CitationEdge {
  std::string src;
  std::string dst;

  friend bool operator==(const CitationEdge&, const CitationEdge&) = default;
  friend auto operator<=>(const CitationEdge&, const CitationEdge&) = default;
};

using AuthorMap = std::unordered_map<std::string, AuthorRecord>;

// ---------------------------------------------------------------------------
// File formats
//
// papers:    JSON Lines, one PaperRecord per line, dates as YYYY-MM-DD.
// authors:   JSON Lines with the scalar AuthorRecord fields.
// citations: headerless CSV `src_paper_id,dst_paper_id`.
// Blank lines and lines starting with '#' are skipped in all three.
//
// Readers throw ParseError (with line number) on malformed lines and
// IngestError on duplicate ids. load_* throw IoError when the file cannot be
// opened.
// ---------------------------------------------------------------------------

std::vector<PaperRecord> read_papers(std::istream& in);
std::vector<PaperRecord> load_papers(const std::filesystem::path& path);
std::string paper_to_json(const PaperRecord& paper);
void write_papers(std::ostream& out, std::span<const PaperRecord> papers);

std::vector<AuthorRecord> read_authors(std::istream& in);
std::vector<AuthorRecord> load_authors(const std::filesystem::path& path);
std::string author_to_json(const AuthorRecord& author);
void write_authors(std::ostream& out, std::span<const AuthorRecord> authors);

std::vector<CitationEdge> read_citations(std::istream& in);
std::vector<CitationEdge> load_citations(const std::filesystem::path& path);
void write_citations(std::ostream& out, std::span<const CitationEdge> edges);

/// Throws IngestError on duplicate author ids.
AuthorMap make_author_map(std::vector<AuthorRecord> authors);

// ---------------------------------------------------------------------------
// Enrichment
// ---------------------------------------------------------------------------

/// Strictly most frequent country; nullopt on ties or empty input.
std::optional<std::string> assign_country(std::span<const std::string> affiliation_countries);

/// Gender category from the first and last authors.
///
/// Sole author: needs an assigned country and gender (M -> MM, W -> WW).
/// Otherwise first and last author must both have a gender and share the same
/// assigned country. Throws LookupError when an author id is not in `authors`.
std::optional<GenderCategory> assign_gender_category(const PaperRecord& paper,
                                                     const AuthorMap& authors);

/// Country of the sole author, or the shared country of first and last author,
/// under the same conditions as assign_gender_category.
std::optional<std::string> assign_paper_country(const PaperRecord& paper,
                                                const AuthorMap& authors);

/// Recomputes prominence (total in-citations of the author's papers) and
/// coauthor sets over the whole linked corpus. Edges whose endpoints are not in
/// `papers`, self loops and duplicates are ignored. Authors referenced by a
/// paper but missing from `authors` are added without country or gender.
void compute_prominence_and_coauthors(std::span<const PaperRecord> papers,
                                      std::span<const CitationEdge> edges, AuthorMap& authors);

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

/// Dense, id-sorted view of the author corpus with resolved coauthor lists.
class AuthorTable {
 public:
  using Index = std::uint32_t;

  AuthorTable() = default;
  explicit AuthorTable(const AuthorMap& authors);

  std::size_t size() const { return records_.size(); }
  const AuthorRecord& record(Index a) const { return records_[a]; }
  std::span<const AuthorRecord> records() const { return records_; }
  std::optional<Index> find(std::string_view id) const;
  std::span<const Index> coauthors(Index a) const {
    return {coauthor_idx_.data() + coauthor_off_[a], coauthor_off_[a + 1] - coauthor_off_[a]};
  }
  AuthorMap to_map() const;

 private:
  std::vector<AuthorRecord> records_;
  std::unordered_map<std::string, Index> by_id_;
  std::vector<std::size_t> coauthor_off_{0};
  std::vector<Index> coauthor_idx_;
};

/// Immutable citation graph. Papers are indexed in paper_id order; edges are
/// unique and sorted by (src, dst), so the out-edges of a paper are contiguous.
/// Safe to share across threads.
class CitationNetwork {
 public:
  using Index = std::uint32_t;

  struct Edge {
    Index src;
    Index dst;
    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
  };

  /// `papers` need not be sorted. Throws IngestError on duplicate ids,
  /// LookupError on author ids missing from `authors`, InputError on self
  /// loops or out-of-range edges. Duplicate edges are collapsed.
  CitationNetwork(std::vector<PaperRecord> papers, std::vector<std::pair<std::string, std::string>> edges,
                  std::shared_ptr<const AuthorTable> authors, bool conflict_rules);

  std::size_t size() const { return papers_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const PaperRecord& paper(Index i) const { return papers_[i]; }
  std::span<const PaperRecord> papers() const { return papers_; }
  std::optional<Index> find(std::string_view paper_id) const;
  /// Throws LookupError for unknown ids.
  Index index_of(std::string_view paper_id) const;

  std::span<const Edge> edges() const { return edges_; }
  std::size_t first_edge(Index i) const { return edge_off_[i]; }
  std::span<const Edge> out_edges(Index i) const {
    return {edges_.data() + edge_off_[i], edge_off_[i + 1] - edge_off_[i]};
  }
  std::uint32_t out_degree(Index i) const {
    return static_cast<std::uint32_t>(edge_off_[i + 1] - edge_off_[i]);
  }
  std::uint32_t in_degree(Index i) const { return in_degree_[i]; }

  const AuthorTable& authors() const { return *authors_; }
  std::shared_ptr<const AuthorTable> shared_authors() const { return authors_; }
  std::span<const AuthorTable::Index> authors_of(Index i) const {
    return {paper_author_idx_.data() + paper_author_off_[i],
            paper_author_off_[i + 1] - paper_author_off_[i]};
  }

  /// Whether author/coauthor overlap rules (self-citation filtering) apply.
  bool conflict_rules() const { return conflict_rules_; }

  std::vector<CitationEdge> citation_edges() const;

 private:
  std::vector<PaperRecord> papers_;
  std::unordered_map<std::string, Index> by_id_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> edge_off_;
  std::vector<std::uint32_t> in_degree_;
  std::shared_ptr<const AuthorTable> authors_;
  std::vector<std::size_t> paper_author_off_;
  std::vector<AuthorTable::Index> paper_author_idx_;
  bool conflict_rules_ = true;
};

struct FilterOptions {
  bool keep_isolated = false;
  // Disables the shared-author and coauthor-overlap rules.
  bool include_self_citations = false;
};

/// Builds the analysis network.
///
/// Keeps papers with country, gender category and venue rank, and the edges
/// among them that survive these removal rules for a citation u -> v:
///   (i)   v was published more than ten calendar years before u;
///   (ii)  u and v share an author;
///   (iii) a coauthor of u's first or last author is an author of v;
///   (iv)  u was published before 1990.
/// Papers left without any edge are dropped unless `keep_isolated`.
/// Coauthor sets are taken from `authors` as given (full-corpus, static).
CitationNetwork filter_citations(std::span<const PaperRecord> papers,
                                 std::span<const CitationEdge> edges, const AuthorMap& authors,
                                 FilterOptions options = {});

inline constexpr int kCitationWindowYears = 10;
inline constexpr int kFirstCitingYear = 1990;

struct BuildReport {
  std::size_t papers_in = 0;
  std::size_t edges_in = 0;
  std::size_t authors_in = 0;
  std::size_t papers_categorized = 0;
  std::size_t papers_out = 0;
  std::size_t edges_out = 0;
};

/// Full ingest pipeline: assign author countries from affiliations where
/// missing, compute prominence and coauthors, assign paper country and gender
/// category (overwriting ingested values), then filter_citations.
CitationNetwork build_network(std::vector<PaperRecord> papers, std::span<const CitationEdge> edges,
                              std::vector<AuthorRecord> authors, FilterOptions options = {},
                              BuildReport* report = nullptr);

}  // namespace citegap
