#include "citegap/types.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "citegap/error.hpp"

namespace citegap {

std::string_view to_string(GenderCategory c) {
  switch (c) {
    case GenderCategory::MM: return "MM";
    case GenderCategory::MW: return "MW";
    case GenderCategory::WM: return "WM";
    case GenderCategory::WW: return "WW";
  }
  return "?";
}

std::string_view to_string(Gender g) { return g == Gender::Female ? "female" : "male"; }

std::string_view to_string(VenueType t) {
  return t == VenueType::Conference ? "conference" : "journal";
}

std::string_view to_string(VenueRank r) {
  switch (r) {
    case VenueRank::AStar: return "A*";
    case VenueRank::A: return "A";
    case VenueRank::B: return "B";
    case VenueRank::C: return "C";
    case VenueRank::Q1: return "Q1";
    case VenueRank::Q2: return "Q2";
    case VenueRank::Q3: return "Q3";
    case VenueRank::Q4: return "Q4";
  }
  return "?";
}

std::string_view to_string(Model m) {
  switch (m) {
    case Model::RD: return "RD";
    case Model::HD: return "HD";
    case Model::PD: return "PD";
  }
  return "?";
}

std::optional<GenderCategory> parse_gender_category(std::string_view s) {
  for (auto c : kGenderCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "female") return Gender::Female;
  if (s == "male") return Gender::Male;
  return std::nullopt;
}

std::optional<VenueType> parse_venue_type(std::string_view s) {
  if (s == "conference") return VenueType::Conference;
  if (s == "journal") return VenueType::Journal;
  return std::nullopt;
}

std::optional<VenueRank> parse_venue_rank(std::string_view s) {
  for (auto r : kVenueRanks)
    if (to_string(r) == s) return r;
  return std::nullopt;
}

std::optional<Model> parse_model(std::string_view s) {
  std::string up;
  for (char ch : s) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
  if (up == "RD") return Model::RD;
  if (up == "HD") return Model::HD;
  if (up == "PD") return Model::PD;
  return std::nullopt;
}

namespace {

int parse_fixed_int(std::string_view s, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError("invalid date '" + std::string(whole) + "'");
  return value;
}

}  // namespace

Date parse_date(std::string_view s) {
  int y = 0;
  unsigned m = 1, d = 1;
  if (s.size() == 4) {
    y = parse_fixed_int(s, s);
  } else if (s.size() == 7 && s[4] == '-') {
    y = parse_fixed_int(s.substr(0, 4), s);
    m = static_cast<unsigned>(parse_fixed_int(s.substr(5, 2), s));
  } else if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
    y = parse_fixed_int(s.substr(0, 4), s);
    m = static_cast<unsigned>(parse_fixed_int(s.substr(5, 2), s));
    d = static_cast<unsigned>(parse_fixed_int(s.substr(8, 2), s));
  } else {
    throw ParseError("invalid date '" + std::string(s) + "'");
  }
  Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw ParseError("invalid date '" + std::string(s) + "'");
  return date;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

}  // namespace citegap
