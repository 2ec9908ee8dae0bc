#pragma once

#include "econoscope/domain.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace econoscope {

/// Boundaries of the buy-type table. All intervals are half-open [lo, hi);
/// the full-buy test (equipment + spend >= full_total) takes precedence.
struct BuyThresholds {
    Dollars hero_equip = 3000;
    Dollars eco_spend = 2000;
    Dollars low_spend = 7500;
    Dollars full_total = 20000;
};

/// Round economy rules. Rewards and ladder values are per player.
struct EconomyConfig {
    Dollars win_reward = 3250;
    Dollars bomb_detonation_reward = 3500;
    /// Indexed by consecutive losses - 1; the last entry repeats.
    std::vector<Dollars> loss_bonus_ladder{1400, 1900, 2400, 2900, 3400};
    Dollars max_money = 16000;
    /// Team equipment + spend at which a buy counts as a full buy.
    Dollars full_buy_threshold = 20000;
    int players_per_team = 5;

    /// Throws std::invalid_argument on a non-monotone ladder or negative values.
    void validate() const;
    BuyThresholds thresholds() const;
    Dollars team_money_cap() const { return max_money * players_per_team; }
};

/// Small set of buy types, iterated in table order.
class BuySet {
public:
    constexpr BuySet() = default;

    constexpr void insert(BuyType buy) noexcept { bits_ |= bit(buy); }
    constexpr bool contains(BuyType buy) const noexcept { return (bits_ & bit(buy)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    std::size_t size() const noexcept;
    std::vector<BuyType> to_vector() const;
    constexpr bool is_subset_of(BuySet other) const noexcept { return (bits_ & ~other.bits_) == 0; }

    constexpr bool operator==(const BuySet&) const = default;

private:
    static constexpr std::uint8_t bit(BuyType buy) noexcept {
        return static_cast<std::uint8_t>(1u << index_of(buy));
    }
    std::uint8_t bits_ = 0;
};

/// Table row for a team with `equip_start` carried-in equipment spending `spend`.
/// Throws std::invalid_argument on negative inputs.
BuyType classify_buy(Dollars equip_start, Dollars spend, const BuyThresholds& thresholds = {});

/// Per-player payout for the n-th consecutive loss since the last win (n >= 1).
Dollars loss_bonus(int consecutive_losses, const EconomyConfig& config = {});

/// Per-player payout for winning a round. Only T can win by detonation.
Dollars round_reward(Side winner, bool win_by_detonation, const EconomyConfig& config = {});

/// Spends [lo, hi) that realize `buy` at this equipment level, ignoring money.
/// `hi` is nullopt when unbounded (full buy). nullopt overall if no spend works.
struct SpendInterval {
    Dollars lo = 0;
    std::optional<Dollars> hi;
};
std::optional<SpendInterval> spend_interval(BuyType buy, Dollars equip_start,
                                            const BuyThresholds& thresholds = {});

/// Buy types reachable with some spend in [0, money]. Equipment tier is fixed.
BuySet feasible_buys(Dollars equip_start, Dollars money, const BuyThresholds& thresholds = {});

/// Extra spend above the full-buy threshold used as the canonical full-buy spend.
inline constexpr Dollars kFullBuyMargin = 2000;

/// A concrete spend that realizes `buy`: midpoint of the feasible spend
/// interval (floored to whole dollars); for full buys,
/// min(money, max(0, full_total - equip) + kFullBuyMargin).
/// Throws std::invalid_argument if `buy` is not feasible.
Dollars representative_spend(BuyType buy, Dollars equip_start, Dollars money,
                             const BuyThresholds& thresholds = {});

/// Spending tier within an equipment tier: Eco/HeroLow cheapest, FullBuy highest.
int spend_rank(BuyType buy) noexcept;

BuyType most_expensive(BuySet buys);
BuyType cheapest(BuySet buys);

}  // namespace econoscope
