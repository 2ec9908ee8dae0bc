#include "econoscope/ose.hpp"

#include "econoscope/errors.hpp"
#include "econoscope/text_table.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace econoscope {

std::vector<TeamOseReport> ose_by_team(std::span<const BuyEvaluation> evaluations,
                                       std::span<const LabeledRound> rounds) {
    if (evaluations.size() != rounds.size() * 2) {
        throw std::invalid_argument("ose_by_team: expected two evaluations per round");
    }
    struct Acc {
        double sum[2] = {0.0, 0.0};
        long n[2] = {0, 0};
        long won = 0;
    };
    std::map<std::string, Acc> acc;
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        for (Side side : kAllSides) {
            const auto s = static_cast<std::size_t>(side);
            const BuyEvaluation& ev = evaluations[i * 2 + s];
            if (ev.side != side) throw std::invalid_argument("ose_by_team: evaluations are not in (CT, T) order");
            const double gap = ev.w_actual - ev.o_optimal;
            Acc& a = acc[rounds[i].state.team(side)];
            a.sum[s] += gap * gap;
            ++a.n[s];
            if (rounds[i].round_winner == side) ++a.won;
        }
    }
    std::vector<TeamOseReport> out;
    for (const auto& [team, a] : acc) {
        TeamOseReport r;
        r.team = team;
        r.ct_rounds = a.n[0];
        r.t_rounds = a.n[1];
        r.rounds_played = a.n[0] + a.n[1];
        r.rounds_won = a.won;
        r.ct_ose = a.n[0] ? a.sum[0] / static_cast<double>(a.n[0]) : 0.0;
        r.t_ose = a.n[1] ? a.sum[1] / static_cast<double>(a.n[1]) : 0.0;
        r.average_ose = (a.sum[0] + a.sum[1]) / static_cast<double>(r.rounds_played);
        r.round_win_rate = static_cast<double>(a.won) / static_cast<double>(r.rounds_played);
        out.push_back(r);
    }
    return out;
}

std::vector<TeamOseReport> ose_by_team(const Predictor& model, std::span<const LabeledRound> rounds, int jobs) {
    const auto evaluations = evaluate_rounds(model, rounds, kAllSides, jobs);
    return ose_by_team(evaluations, rounds);
}

TeamOseReport team_ose(const Predictor& model, std::span<const LabeledRound> rounds, const std::string& team,
                       int jobs) {
    std::vector<LabeledRound> own;
    for (const auto& r : rounds) {
        if (r.state.ct_team == team || r.state.t_team == team) own.push_back(r);
    }
    if (own.empty()) throw DataError("team '" + team + "' plays no round in the data");
    for (const auto& report : ose_by_team(model, own, jobs)) {
        if (report.team == team) return report;
    }
    throw DataError("team '" + team + "' plays no round in the data");
}

std::vector<TeamOseReport> rank_teams(std::vector<TeamOseReport> reports, long min_rounds) {
    std::erase_if(reports, [&](const TeamOseReport& r) { return r.rounds_played < min_rounds; });
    std::sort(reports.begin(), reports.end(), [](const TeamOseReport& a, const TeamOseReport& b) {
        return a.average_ose != b.average_ose ? a.average_ose < b.average_ose : a.team < b.team;
    });
    return reports;
}

std::vector<TeamOseReport> rank_teams(const Predictor& model, std::span<const LabeledRound> rounds, long min_rounds,
                                      int jobs) {
    return rank_teams(ose_by_team(model, rounds, jobs), min_rounds);
}

double ose_winrate_correlation(std::span<const TeamOseReport> reports) {
    if (reports.size() < 3) throw DataError("OSE correlation needs at least three teams");
    const double n = static_cast<double>(reports.size());
    double mx = 0.0, my = 0.0;
    for (const auto& r : reports) {
        mx += r.average_ose;
        my += r.round_win_rate;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& r : reports) {
        const double dx = r.average_ose - mx;
        const double dy = r.round_win_rate - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const auto constant = [&](auto field) {
        return std::all_of(reports.begin(), reports.end(),
                           [&](const TeamOseReport& r) { return field(r) == field(reports.front()); });
    };
    if (!(sxx > 0.0) || constant([](const TeamOseReport& r) { return r.average_ose; })) {
        throw DataError("OSE correlation undefined: average_ose is constant across teams");
    }
    if (!(syy > 0.0) || constant([](const TeamOseReport& r) { return r.round_win_rate; })) {
        throw DataError("OSE correlation undefined: round_win_rate is constant across teams");
    }
    return sxy / std::sqrt(sxx * syy);
}

std::string ose_scatter_csv(std::span<const TeamOseReport> reports) {
    std::ostringstream out;
    out << "team,average_ose,ct_ose,t_ose,rounds_played,round_win_rate\n";
    for (const auto& r : reports) {
        out << r.team << ',' << fixed(r.average_ose, 8) << ',' << fixed(r.ct_ose, 8) << ',' << fixed(r.t_ose, 8)
            << ',' << r.rounds_played << ',' << fixed(r.round_win_rate, 6) << '\n';
    }
    return out.str();
}

nlohmann::ordered_json OseRanking::to_json() const {
    nlohmann::ordered_json j;
    j["generated_at"] = generated_at;
    j["min_rounds"] = min_rounds;
    j["correlation"] = correlation ? nlohmann::ordered_json(*correlation) : nlohmann::ordered_json();
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& t : teams) {
        nlohmann::ordered_json o;
        o["team"] = t.team;
        o["average_ose"] = t.average_ose;
        o["ct_ose"] = t.ct_ose;
        o["t_ose"] = t.t_ose;
        o["rounds_played"] = t.rounds_played;
        o["round_win_rate"] = t.round_win_rate;
        arr.push_back(o);
    }
    j["teams"] = arr;
    j["notes"] = notes;
    return j;
}

std::string OseRanking::to_text() const {
    TextTable table({"Rank", "Team", "Average OSE", "CT OSE", "T OSE", "Rounds", "Round win %"});
    for (std::size_t i = 0; i < teams.size(); ++i) {
        const auto& t = teams[i];
        table.add_row({std::to_string(i + 1), t.team, fixed(t.average_ose, 5), fixed(t.ct_ose, 5), fixed(t.t_ose, 5),
                       std::to_string(t.rounds_played), percent(t.round_win_rate)});
    }
    std::ostringstream out;
    out << "# generated_at: " << generated_at << "\n";
    out << "Teams with at least " << min_rounds << " rounds, by average OSE\n\n" << table.render();
    if (correlation) out << "\nPearson r (average OSE vs round win rate): " << fixed(*correlation, 3) << "\n";
    for (const auto& n : notes) out << "\n* " << n;
    if (!notes.empty()) out << "\n";
    return out.str();
}

}  // namespace econoscope
