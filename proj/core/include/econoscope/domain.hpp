#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace econoscope {

/// Team-level dollar amounts (sums over the five players of a side).
using Dollars = std::int64_t;
using Date = std::chrono::year_month_day;

enum class Side : std::uint8_t { CT = 0, T = 1 };

inline constexpr std::array<Side, 2> kAllSides{Side::CT, Side::T};

constexpr Side opposite(Side side) noexcept {
    return side == Side::CT ? Side::T : Side::CT;
}

/// Round spending strategy. Rows of the buy-type table, in table order.
enum class BuyType : std::uint8_t {
    Eco = 0,
    LowBuy = 1,
    HalfBuy = 2,
    HeroLowBuy = 3,
    HeroHalfBuy = 4,
    FullBuy = 5,
};

inline constexpr std::size_t kNumBuyTypes = 6;
inline constexpr std::array<BuyType, kNumBuyTypes> kAllBuyTypes{
    BuyType::Eco,        BuyType::LowBuy,      BuyType::HalfBuy,
    BuyType::HeroLowBuy, BuyType::HeroHalfBuy, BuyType::FullBuy,
};

constexpr std::size_t index_of(BuyType buy) noexcept {
    return static_cast<std::size_t>(buy);
}

constexpr bool is_hero(BuyType buy) noexcept {
    return buy == BuyType::HeroLowBuy || buy == BuyType::HeroHalfBuy;
}

/// Game result relative to the sides of the round it labels.
enum class GameOutcome : std::uint8_t { CtWin = 0, TWin = 1, Draw = 2 };

inline constexpr std::size_t kNumOutcomes = 3;

constexpr std::size_t index_of(GameOutcome outcome) noexcept {
    return static_cast<std::size_t>(outcome);
}

/// Same game result seen from the other half (sides swapped).
constexpr GameOutcome flip(GameOutcome outcome) noexcept {
    switch (outcome) {
    case GameOutcome::CtWin: return GameOutcome::TWin;
    case GameOutcome::TWin: return GameOutcome::CtWin;
    case GameOutcome::Draw: return GameOutcome::Draw;
    }
    return outcome;
}

std::string_view to_string(Side side) noexcept;
std::string_view to_string(BuyType buy) noexcept;
std::string_view to_string(GameOutcome outcome) noexcept;
/// Human-readable buy name for tables ("Hero Low Buy").
std::string_view display_name(BuyType buy) noexcept;

/// Accepts "CT"/"T" (case-insensitive).
std::optional<Side> parse_side(std::string_view text) noexcept;
/// Accepts canonical names ("HeroLowBuy"), display names and snake_case.
std::optional<BuyType> parse_buy_type(std::string_view text) noexcept;

/// Active-duty map pool used for per-map routing and map one-hot encoding.
inline constexpr std::array<std::string_view, 7> kDefaultMapPool{
    "dust2", "inferno", "mirage", "nuke", "overpass", "train", "vertigo",
};

std::optional<std::size_t> map_pool_index(std::string_view map_name) noexcept;

/// ISO-8601 calendar date (YYYY-MM-DD).
Date parse_date(std::string_view text);
std::optional<Date> try_parse_date(std::string_view text) noexcept;
std::string format_date(Date date);

/// Everything known at the start of a round, before the round is played.
struct RoundState {
    std::string game_id;
    std::string map_name;
    int round_number = 1;
    int ct_score = 0;
    int t_score = 0;
    Dollars ct_equip_start = 0;
    Dollars t_equip_start = 0;
    Dollars ct_money = 0;
    Dollars t_money = 0;
    Dollars ct_spend = 0;
    Dollars t_spend = 0;
    BuyType ct_buy = BuyType::Eco;
    BuyType t_buy = BuyType::Eco;
    std::string ct_team;
    std::string t_team;
    Date match_date{};

    int score(Side side) const noexcept { return side == Side::CT ? ct_score : t_score; }
    Dollars equip_start(Side side) const noexcept {
        return side == Side::CT ? ct_equip_start : t_equip_start;
    }
    Dollars money(Side side) const noexcept { return side == Side::CT ? ct_money : t_money; }
    Dollars spend(Side side) const noexcept { return side == Side::CT ? ct_spend : t_spend; }
    BuyType buy(Side side) const noexcept { return side == Side::CT ? ct_buy : t_buy; }
    const std::string& team(Side side) const noexcept { return side == Side::CT ? ct_team : t_team; }

    void set_buy(Side side, BuyType buy) noexcept { (side == Side::CT ? ct_buy : t_buy) = buy; }
    void set_spend(Side side, Dollars spend) noexcept {
        (side == Side::CT ? ct_spend : t_spend) = spend;
    }

    /// Side played by `team` in this round, if it played at all.
    std::optional<Side> side_of(std::string_view team) const noexcept;

    bool operator==(const RoundState&) const = default;
};

/// Three-way game outcome probabilities.
struct OutcomeDistribution {
    double p_ct_win = 1.0 / 3.0;
    double p_t_win = 1.0 / 3.0;
    double p_draw = 1.0 / 3.0;

    double probability(GameOutcome outcome) const noexcept;
    /// Game-win probability of `side`; draw mass is never credited.
    double win_probability(Side side) const noexcept {
        return side == Side::CT ? p_ct_win : p_t_win;
    }
    /// Components in [0,1] and sum within `tolerance` of one.
    bool is_valid(double tolerance = 1e-9) const noexcept;

    bool operator==(const OutcomeDistribution&) const = default;
};

struct LabeledRound {
    RoundState state;
    GameOutcome outcome = GameOutcome::Draw;
    /// Winner of this round only. Used for win-rate reports, never as a target.
    Side round_winner = Side::CT;
};

}  // namespace econoscope
