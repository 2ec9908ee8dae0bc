#include "econoscope/economy.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace econoscope {

void EconomyConfig::validate() const {
    if (win_reward < 0 || bomb_detonation_reward < 0 || max_money < 0) {
        throw std::invalid_argument("economy rewards and money cap must be >= 0");
    }
    if (full_buy_threshold <= 0) {
        throw std::invalid_argument("full_buy_threshold must be > 0");
    }
    if (players_per_team <= 0) {
        throw std::invalid_argument("players_per_team must be > 0");
    }
    if (loss_bonus_ladder.empty()) {
        throw std::invalid_argument("loss_bonus_ladder must not be empty");
    }
    for (std::size_t i = 0; i < loss_bonus_ladder.size(); ++i) {
        if (loss_bonus_ladder[i] < 0) {
            throw std::invalid_argument("loss_bonus_ladder values must be >= 0");
        }
        if (i > 0 && loss_bonus_ladder[i] < loss_bonus_ladder[i - 1]) {
            throw std::invalid_argument("loss_bonus_ladder must be non-decreasing");
        }
    }
}

BuyThresholds EconomyConfig::thresholds() const {
    BuyThresholds t;
    t.full_total = full_buy_threshold;
    return t;
}

std::size_t BuySet::size() const noexcept {
    return static_cast<std::size_t>(std::popcount(bits_));
}

std::vector<BuyType> BuySet::to_vector() const {
    std::vector<BuyType> out;
    for (BuyType buy : kAllBuyTypes) {
        if (contains(buy)) out.push_back(buy);
    }
    return out;
}

BuyType classify_buy(Dollars equip_start, Dollars spend, const BuyThresholds& t) {
    if (equip_start < 0 || spend < 0) {
        throw std::invalid_argument("classify_buy: equipment and spend must be >= 0 (got " +
                                    std::to_string(equip_start) + ", " + std::to_string(spend) +
                                    ")");
    }
    if (equip_start + spend >= t.full_total) return BuyType::FullBuy;
    if (equip_start < t.hero_equip) {
        if (spend < t.eco_spend) return BuyType::Eco;
        if (spend < t.low_spend) return BuyType::LowBuy;
        return BuyType::HalfBuy;
    }
    return spend < t.low_spend ? BuyType::HeroLowBuy : BuyType::HeroHalfBuy;
}

Dollars loss_bonus(int consecutive_losses, const EconomyConfig& config) {
    if (consecutive_losses < 1) {
        throw std::invalid_argument("loss_bonus: consecutive_losses must be >= 1 (winners take "
                                    "the win reward)");
    }
    const auto& ladder = config.loss_bonus_ladder;
    if (ladder.empty()) throw std::invalid_argument("loss_bonus: empty ladder");
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(consecutive_losses), ladder.size()) - 1;
    return ladder[idx];
}

Dollars round_reward(Side winner, bool win_by_detonation, const EconomyConfig& config) {
    if (win_by_detonation && winner != Side::T) {
        throw std::invalid_argument("round_reward: only the T side can win by bomb detonation");
    }
    return win_by_detonation ? config.bomb_detonation_reward : config.win_reward;
}

std::optional<SpendInterval> spend_interval(BuyType buy, Dollars equip_start, const BuyThresholds& t) {
    if (equip_start < 0) throw std::invalid_argument("spend_interval: equipment must be >= 0");
    const Dollars to_full = std::max<Dollars>(0, t.full_total - equip_start);
    if (buy == BuyType::FullBuy) return SpendInterval{to_full, std::nullopt};

    const bool hero_tier = equip_start >= t.hero_equip;
    if (equip_start >= t.full_total || hero_tier != is_hero(buy)) return std::nullopt;

    Dollars lo = 0;
    Dollars hi = 0;
    switch (buy) {
    case BuyType::Eco: lo = 0; hi = t.eco_spend; break;
    case BuyType::LowBuy: lo = t.eco_spend; hi = t.low_spend; break;
    case BuyType::HalfBuy: lo = t.low_spend; hi = to_full; break;
    case BuyType::HeroLowBuy: lo = 0; hi = t.low_spend; break;
    case BuyType::HeroHalfBuy: lo = t.low_spend; hi = to_full; break;
    case BuyType::FullBuy: break;
    }
    hi = std::min(hi, to_full);
    if (lo >= hi) return std::nullopt;
    return SpendInterval{lo, hi};
}

BuySet feasible_buys(Dollars equip_start, Dollars money, const BuyThresholds& t) {
    if (equip_start < 0 || money < 0) {
        throw std::invalid_argument("feasible_buys: equipment and money must be >= 0");
    }
    BuySet out;
    for (BuyType buy : kAllBuyTypes) {
        const auto interval = spend_interval(buy, equip_start, t);
        if (interval && interval->lo <= money) out.insert(buy);
    }
    return out;
}

Dollars representative_spend(BuyType buy, Dollars equip_start, Dollars money, const BuyThresholds& t) {
    const auto interval = spend_interval(buy, equip_start, t);
    if (money < 0 || !interval || interval->lo > money) {
        throw std::invalid_argument("representative_spend: " + std::string(to_string(buy)) +
                                    " is not feasible with equipment " + std::to_string(equip_start) +
                                    " and money " + std::to_string(money));
    }
    if (buy == BuyType::FullBuy) return std::min(money, interval->lo + kFullBuyMargin);
    // Floor of the midpoint stays strictly below an exclusive hi since lo < hi.
    const Dollars upper = std::min(*interval->hi, money);
    return interval->lo + (upper - interval->lo) / 2;
}

int spend_rank(BuyType buy) noexcept {
    switch (buy) {
    case BuyType::Eco:
    case BuyType::HeroLowBuy: return 0;
    case BuyType::LowBuy: return 1;
    case BuyType::HalfBuy:
    case BuyType::HeroHalfBuy: return 2;
    case BuyType::FullBuy: return 3;
    }
    return 0;
}

BuyType most_expensive(BuySet buys) {
    const auto list = buys.to_vector();
    if (list.empty()) throw std::invalid_argument("most_expensive: empty buy set");
    return *std::max_element(list.begin(), list.end(),
                             [](BuyType a, BuyType b) { return spend_rank(a) < spend_rank(b); });
}

BuyType cheapest(BuySet buys) {
    const auto list = buys.to_vector();
    if (list.empty()) throw std::invalid_argument("cheapest: empty buy set");
    return *std::min_element(list.begin(), list.end(),
                             [](BuyType a, BuyType b) { return spend_rank(a) < spend_rank(b); });
}

}  // namespace econoscope
