#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace citegap {

// Gender of the (first author, last author) pair. Sole-authored papers are MM or WW.
enum class GenderCategory : std::uint8_t { MM = 0, MW = 1, WM = 2, WW = 3 };

inline constexpr std::array<GenderCategory, 4> kGenderCategories{
    GenderCategory::MM, GenderCategory::MW, GenderCategory::WM, GenderCategory::WW};

enum class Gender : std::uint8_t { Female, Male };

enum class VenueType : std::uint8_t { Conference, Journal };

// CORE tiers for conferences, SJR quartiles for journals.
enum class VenueRank : std::uint8_t { AStar, A, B, C, Q1, Q2, Q3, Q4 };

inline constexpr std::array<VenueRank, 8> kVenueRanks{VenueRank::AStar, VenueRank::A,
                                                      VenueRank::B,     VenueRank::C,
                                                      VenueRank::Q1,    VenueRank::Q2,
                                                      VenueRank::Q3,    VenueRank::Q4};

// Reference models: random draws, homophilic draws, preferential draws.
enum class Model : std::uint8_t { RD, HD, PD };

std::string_view to_string(GenderCategory c);
std::string_view to_string(Gender g);
std::string_view to_string(VenueType t);
std::string_view to_string(VenueRank r);
std::string_view to_string(Model m);

std::optional<GenderCategory> parse_gender_category(std::string_view s);
std::optional<Gender> parse_gender(std::string_view s);
std::optional<VenueType> parse_venue_type(std::string_view s);
std::optional<VenueRank> parse_venue_rank(std::string_view s);
/// Accepts "rd"/"hd"/"pd" in any case.
std::optional<Model> parse_model(std::string_view s);

/// Category from the genders of the first and last author.
constexpr GenderCategory make_category(Gender first, Gender last) {
  const int hi = first == Gender::Female ? 2 : 0;
  const int lo = last == Gender::Female ? 1 : 0;
  return static_cast<GenderCategory>(hi | lo);
}

constexpr std::size_t index_of(GenderCategory c) { return static_cast<std::size_t>(c); }

// Calendar dates. Partial dates ("YYYY", "YYYY-MM") are completed with January / day 1.
using Date = std::chrono::year_month_day;

/// Throws ParseError on malformed or impossible dates.
Date parse_date(std::string_view s);
std::string format_date(Date d);
inline int year_of(Date d) { return static_cast<int>(d.year()); }

/// Same month/day anchor, `years` earlier. The result may be an invalid day
/// (Feb 29 on a non-leap year); comparisons remain well defined.
inline Date years_before(Date d, int years) {
  return Date{d.year() - std::chrono::years{years}, d.month(), d.day()};
}

}  // namespace citegap
