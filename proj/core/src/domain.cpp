#include "econoscope/domain.hpp"
#include "econoscope/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace econoscope {

namespace {

std::string normalize_token(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '_' || c == ' ' || c == '-') continue;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

}  // namespace

std::string_view to_string(Side side) noexcept {
    return side == Side::CT ? "CT" : "T";
}

std::string_view to_string(BuyType buy) noexcept {
    switch (buy) {
    case BuyType::Eco: return "Eco";
    case BuyType::LowBuy: return "LowBuy";
    case BuyType::HalfBuy: return "HalfBuy";
    case BuyType::HeroLowBuy: return "HeroLowBuy";
    case BuyType::HeroHalfBuy: return "HeroHalfBuy";
    case BuyType::FullBuy: return "FullBuy";
    }
    return "?";
}

std::string_view display_name(BuyType buy) noexcept {
    switch (buy) {
    case BuyType::Eco: return "Eco";
    case BuyType::LowBuy: return "Low Buy";
    case BuyType::HalfBuy: return "Half Buy";
    case BuyType::HeroLowBuy: return "Hero Low Buy";
    case BuyType::HeroHalfBuy: return "Hero Half Buy";
    case BuyType::FullBuy: return "Full Buy";
    }
    return "?";
}

std::string_view to_string(GameOutcome outcome) noexcept {
    switch (outcome) {
    case GameOutcome::CtWin: return "CtWin";
    case GameOutcome::TWin: return "TWin";
    case GameOutcome::Draw: return "Draw";
    }
    return "?";
}

std::optional<Side> parse_side(std::string_view text) noexcept {
    const auto token = normalize_token(text);
    if (token == "ct") return Side::CT;
    if (token == "t") return Side::T;
    return std::nullopt;
}

std::optional<BuyType> parse_buy_type(std::string_view text) noexcept {
    const auto token = normalize_token(text);
    for (BuyType buy : kAllBuyTypes) {
        if (token == normalize_token(to_string(buy))) return buy;
    }
    return std::nullopt;
}

std::optional<std::size_t> map_pool_index(std::string_view map_name) noexcept {
    const auto it = std::find(kDefaultMapPool.begin(), kDefaultMapPool.end(), map_name);
    if (it == kDefaultMapPool.end()) return std::nullopt;
    return static_cast<std::size_t>(it - kDefaultMapPool.begin());
}

std::optional<Date> try_parse_date(std::string_view text) noexcept {
    // Accept a bare date or the date part of a full timestamp.
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (text.size() > 10 && text[10] != 'T' && text[10] != ' ') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse = [&](std::size_t pos, std::size_t len, auto& out) {
        const char* first = text.data() + pos;
        const auto res = std::from_chars(first, first + len, out);
        return res.ec == std::errc{} && res.ptr == first + len;
    };
    if (!parse(0, 4, y) || !parse(5, 2, m) || !parse(8, 2, d)) return std::nullopt;
    const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) return std::nullopt;
    return date;
}

Date parse_date(std::string_view text) {
    if (auto date = try_parse_date(text)) return *date;
    throw std::invalid_argument("invalid ISO-8601 date: '" + std::string(text) + "'");
}

std::string format_date(Date date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::optional<Side> RoundState::side_of(std::string_view team) const noexcept {
    if (team == ct_team) return Side::CT;
    if (team == t_team) return Side::T;
    return std::nullopt;
}

double OutcomeDistribution::probability(GameOutcome outcome) const noexcept {
    switch (outcome) {
    case GameOutcome::CtWin: return p_ct_win;
    case GameOutcome::TWin: return p_t_win;
    case GameOutcome::Draw: return p_draw;
    }
    return 0.0;
}

bool OutcomeDistribution::is_valid(double tolerance) const noexcept {
    for (double p : {p_ct_win, p_t_win, p_draw}) {
        if (!(p >= 0.0 && p <= 1.0)) return false;
    }
    return std::abs(p_ct_win + p_t_win + p_draw - 1.0) <= tolerance;
}

ValidationError::ValidationError(std::string file, std::size_t line, std::string field,
                                 const std::string& message)
    : DataError(file + ":" + std::to_string(line) + ": field '" + field + "': " + message),
      file_(std::move(file)),
      line_(line),
      field_(std::move(field)) {}

ModelVersionError::ModelVersionError(int found, int supported)
    : DataError("unsupported model format version " + std::to_string(found) +
                " (this build reads version " + std::to_string(supported) + ")"),
      found_(found),
      supported_(supported) {}

}  // namespace econoscope
