#include "econoscope/counterfactual.hpp"

#include "econoscope/parallel.hpp"
#include "econoscope/text_table.hpp"

#include <algorithm>
#include <stdexcept>

namespace econoscope {

std::optional<double> BuyEvaluation::option(BuyType buy) const noexcept {
    for (const auto& o : options) {
        if (o.buy == buy) return o.win_probability;
    }
    return std::nullopt;
}

BuyEvaluation evaluate_buy_options(const Predictor& model, const RoundState& state, Side side,
                                   const BuyThresholds& thresholds) {
    const Dollars equip = state.equip_start(side);
    const Dollars money = state.money(side);
    const BuySet feasible = feasible_buys(equip, money, thresholds);
    const BuyType actual = state.buy(side);
    if (!feasible.contains(actual)) {
        throw std::invalid_argument("evaluate_buy_options: actual buy " + std::string(to_string(actual)) +
                                    " is not feasible for " + std::string(to_string(side)) + " in game " +
                                    state.game_id + " round " + std::to_string(state.round_number));
    }

    BuyEvaluation ev;
    ev.game_id = state.game_id;
    ev.round_number = state.round_number;
    ev.team = state.team(side);
    ev.side = side;
    ev.team_score = state.score(side);
    ev.opponent_score = state.score(opposite(side));
    ev.actual_buy = actual;

    RoundState counterfactual = state;
    for (BuyType buy : feasible.to_vector()) {
        counterfactual.set_buy(side, buy);
        ev.options.push_back({buy, model.predict(counterfactual).win_probability(side)});
    }

    // Visit options cheapest first so that only a strictly better option
    // displaces the current best.
    std::vector<std::pair<Dollars, const BuyOption*>> by_cost;
    for (const auto& o : ev.options) {
        by_cost.emplace_back(representative_spend(o.buy, equip, money, thresholds), &o);
    }
    std::stable_sort(by_cost.begin(), by_cost.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const BuyOption* best = by_cost.front().second;
    for (const auto& [cost, o] : by_cost) {
        if (o->win_probability > best->win_probability) best = o;
    }
    ev.optimal_buy = best->buy;
    ev.o_optimal = best->win_probability;
    ev.w_actual = *ev.option(actual);
    return ev;
}

double lost_probability(const BuyEvaluation& evaluation) noexcept {
    return evaluation.o_optimal - evaluation.w_actual;
}

std::vector<BuyEvaluation> evaluate_rounds(const Predictor& model, std::span<const LabeledRound> rounds,
                                           std::span<const Side> sides, int jobs,
                                           const BuyThresholds& thresholds) {
    std::vector<BuyEvaluation> out(rounds.size() * sides.size());
    parallel_for(rounds.size(), jobs, [&](std::size_t i) {
        for (std::size_t s = 0; s < sides.size(); ++s) {
            out[i * sides.size() + s] = evaluate_buy_options(model, rounds[i].state, sides[s], thresholds);
        }
    });
    return out;
}

long ConfusionMatrix::total() const noexcept {
    long sum = 0;
    for (const auto& row : counts) {
        for (long c : row) sum += c;
    }
    return sum;
}

std::string ConfusionMatrix::to_text() const {
    std::vector<std::string> header{"optimal \\ actual (" + std::string(to_string(side)) + ")"};
    for (BuyType b : kAllBuyTypes) header.emplace_back(display_name(b));
    TextTable table(std::move(header));
    for (BuyType o : kAllBuyTypes) {
        std::vector<std::string> row{std::string(display_name(o))};
        for (BuyType a : kAllBuyTypes) row.push_back(std::to_string(at(o, a)));
        table.add_row(std::move(row));
    }
    return table.render();
}

ConfusionMatrix confusion_matrix(std::span<const BuyEvaluation> evaluations, Side side) {
    ConfusionMatrix m;
    m.side = side;
    for (const auto& ev : evaluations) {
        if (ev.side != side) continue;
        ++m.counts[index_of(ev.optimal_buy)][index_of(ev.actual_buy)];
    }
    return m;
}

ConfusionMatrix confusion_matrix(const Predictor& model, std::span<const LabeledRound> rounds, Side side,
                                 int jobs) {
    const Side sides[] = {side};
    const auto evaluations = evaluate_rounds(model, rounds, sides, jobs);
    return confusion_matrix(evaluations, side);
}

double SecondRoundReport::Row::actual_rate(BuyType buy) const noexcept {
    return rounds ? static_cast<double>(actual[index_of(buy)]) / static_cast<double>(rounds) : 0.0;
}

double SecondRoundReport::Row::optimal_rate(BuyType buy) const noexcept {
    return rounds ? static_cast<double>(optimal[index_of(buy)]) / static_cast<double>(rounds) : 0.0;
}

namespace {

bool lost_pistol(const RoundState& s, Side side) {
    return s.round_number == 2 && s.score(side) == 0 && s.score(opposite(side)) == 1;
}

}  // namespace

SecondRoundReport second_round_report(std::span<const BuyEvaluation> evaluations) {
    SecondRoundReport report;
    report.rows[0].side = Side::CT;
    report.rows[1].side = Side::T;
    for (const auto& ev : evaluations) {
        if (ev.round_number != 2 || ev.team_score != 0 || ev.opponent_score != 1) continue;
        auto& row = report.rows[static_cast<std::size_t>(ev.side)];
        ++row.rounds;
        ++row.actual[index_of(ev.actual_buy)];
        ++row.optimal[index_of(ev.optimal_buy)];
    }
    return report;
}

SecondRoundReport second_round_report(const Predictor& model, std::span<const LabeledRound> rounds) {
    std::vector<BuyEvaluation> evaluations;
    for (const auto& r : rounds) {
        for (Side side : kAllSides) {
            if (lost_pistol(r.state, side)) evaluations.push_back(evaluate_buy_options(model, r.state, side));
        }
    }
    return second_round_report(evaluations);
}

std::string SecondRoundReport::to_text() const {
    std::vector<std::string> header{"", "side", "rounds"};
    std::vector<BuyType> columns{BuyType::Eco, BuyType::LowBuy, BuyType::HalfBuy};
    // Other buy types only show up when present; they flag data problems.
    for (BuyType b : {BuyType::HeroLowBuy, BuyType::HeroHalfBuy, BuyType::FullBuy}) {
        for (const auto& row : rows) {
            if ((row.actual[index_of(b)] || row.optimal[index_of(b)]) &&
                std::find(columns.begin(), columns.end(), b) == columns.end()) {
                columns.push_back(b);
            }
        }
    }
    for (BuyType b : columns) header.emplace_back(display_name(b));
    TextTable table(std::move(header));
    for (bool optimal : {false, true}) {
        if (optimal) table.add_rule();
        for (Side side : {Side::T, Side::CT}) {
            const auto& row = rows[static_cast<std::size_t>(side)];
            std::vector<std::string> cells{optimal ? "Optimal" : "Actual", std::string(to_string(side)),
                                           std::to_string(row.rounds)};
            for (BuyType b : columns) cells.push_back(percent(optimal ? row.optimal_rate(b) : row.actual_rate(b)));
            table.add_row(std::move(cells));
        }
    }
    return table.render();
}

EcoLossSummary eco_loss_summary(std::span<const BuyEvaluation> evaluations, Side side) {
    EcoLossSummary s;
    s.side = side;
    double sum_all = 0.0;
    double sum_affected = 0.0;
    for (const auto& ev : evaluations) {
        if (ev.side != side || ev.actual_buy != BuyType::Eco) continue;
        ++s.eco_rounds;
        const double lost = lost_probability(ev);
        sum_all += lost;
        if (ev.optimal_buy == BuyType::LowBuy || ev.optimal_buy == BuyType::HalfBuy) {
            ++s.affected_rounds;
            sum_affected += lost;
        }
    }
    if (s.eco_rounds) {
        s.affected_share = static_cast<double>(s.affected_rounds) / static_cast<double>(s.eco_rounds);
        s.mean_loss_all_eco = sum_all / static_cast<double>(s.eco_rounds);
    }
    if (s.affected_rounds) s.mean_loss_affected = sum_affected / static_cast<double>(s.affected_rounds);
    return s;
}

}  // namespace econoscope
