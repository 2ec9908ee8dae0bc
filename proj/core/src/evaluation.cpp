#include "econoscope/evaluation.hpp"

#include "econoscope/counterfactual.hpp"
#include "econoscope/errors.hpp"
#include "econoscope/hash.hpp"
#include "econoscope/models/common.hpp"
#include "econoscope/parallel.hpp"
#include "econoscope/text_table.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace econoscope {

double log_loss(std::span<const OutcomeDistribution> predictions, std::span<const GameOutcome> labels) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("log_loss: " + std::to_string(predictions.size()) + " predictions but " +
                                    std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw std::invalid_argument("log_loss: no predictions");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const auto& p = predictions[i];
        sum += clipped_log_loss({p.p_ct_win, p.p_t_win, p.p_draw}, index_of(labels[i]));
    }
    return sum / static_cast<double>(predictions.size());
}

double model_log_loss(const Predictor& model, std::span<const LabeledRound> rounds, int jobs) {
    std::vector<OutcomeDistribution> predictions(rounds.size());
    std::vector<GameOutcome> labels(rounds.size());
    parallel_for(rounds.size(), jobs, [&](std::size_t i) {
        predictions[i] = model.predict(rounds[i].state);
        labels[i] = rounds[i].outcome;
    });
    return log_loss(predictions, labels);
}

namespace {

constexpr ModelFamily kFamilies[] = {ModelFamily::Logistic, ModelFamily::Gbtree, ModelFamily::Neural};

std::string family_title(ModelFamily f) {
    switch (f) {
    case ModelFamily::Logistic: return "Logistic";
    case ModelFamily::Gbtree: return "Gradient boosting";
    case ModelFamily::Neural: return "Neural net";
    }
    return "?";
}

// Pool maps in pool order, then any others alphabetically.
std::vector<std::string> ordered_maps(std::span<const LabeledRound> rounds) {
    std::vector<std::string> maps;
    for (const auto& r : rounds) {
        if (std::find(maps.begin(), maps.end(), r.state.map_name) == maps.end()) maps.push_back(r.state.map_name);
    }
    std::sort(maps.begin(), maps.end(), [](const std::string& a, const std::string& b) {
        const auto ia = map_pool_index(a).value_or(kDefaultMapPool.size());
        const auto ib = map_pool_index(b).value_or(kDefaultMapPool.size());
        return ia != ib ? ia < ib : a < b;
    });
    return maps;
}

std::vector<LabeledRound> rounds_on(std::span<const LabeledRound> rounds, const std::string& map, bool keep) {
    std::vector<LabeledRound> out;
    for (const auto& r : rounds) {
        if ((r.state.map_name == map) == keep) out.push_back(r);
    }
    return out;
}

nlohmann::ordered_json row_json(const EvalReport::Row& row) {
    nlohmann::ordered_json j;
    j["label"] = row.label;
    j["n_rounds"] = row.n_rounds;
    nlohmann::ordered_json losses = nlohmann::ordered_json::object();
    for (auto f : kFamilies) {
        const auto it = row.loss.find(f);
        if (it != row.loss.end()) losses[std::string(to_string(f))] = it->second;
    }
    j["loss"] = losses;
    return j;
}

std::string optional_cell(const std::map<ModelFamily, double>& m, ModelFamily f) {
    const auto it = m.find(f);
    return it == m.end() ? "-" : fixed(it->second, 3);
}

}  // namespace

EvalReport evaluate_suite(std::span<const TrainedModel* const> models, const DatasetSplit& split, int jobs,
                          std::string generated_at) {
    if (split.test.empty()) throw DataError("evaluation: the test partition is empty");
    if (models.empty()) throw std::invalid_argument("evaluation: no models to evaluate");

    EvalReport report;
    report.generated_at = std::move(generated_at);
    report.data_hash = make_dataset(split.test, FeatureLayout::Base).fingerprint();

    const auto maps = ordered_maps(split.test);
    std::vector<std::vector<LabeledRound>> by_map;
    for (const auto& map : maps) by_map.push_back(rounds_on(split.test, map, true));

    for (auto f : kFamilies) {
        if (std::any_of(models.begin(), models.end(), [&](const TrainedModel* m) { return m->family() == f; })) {
            report.families.push_back(f);
        }
    }

    for (std::size_t k = 0; k < maps.size(); ++k) {
        report.maps.push_back({maps[k], static_cast<long>(by_map[k].size()), {}});
    }
    for (const TrainedModel* model : models) {
        if (model->mode() == EncodingMode::OheMap) {
            if (report.ohe_model_ids.count(model->family())) continue;
            if (!report.ohe_map) report.ohe_map = EvalReport::Row{"OHE Map", static_cast<long>(split.test.size()), {}};
            report.ohe_map->loss[model->family()] = model_log_loss(*model, split.test, jobs);
            report.ohe_model_ids[model->family()] = model->model_id();
            continue;
        }
        if (report.per_map_model_ids.count(model->family())) continue;
        report.per_map_model_ids[model->family()] = model->model_id();
        for (std::size_t k = 0; k < maps.size(); ++k) {
            report.maps[k].loss[model->family()] = model_log_loss(*model, by_map[k], jobs);
        }
    }

    report.weighted_average.label = "Weighted Average";
    report.weighted_average.n_rounds = static_cast<long>(split.test.size());
    for (const auto& [family, id] : report.per_map_model_ids) {
        double num = 0.0;
        double den = 0.0;
        for (const auto& row : report.maps) {
            num += static_cast<double>(row.n_rounds) * row.loss.at(family);
            den += static_cast<double>(row.n_rounds);
        }
        report.weighted_average.loss[family] = num / den;
    }

    report.notes.push_back("Weighted Average weights each map by its number of test rounds.");
    report.notes.push_back("Log-loss clips probabilities to [1e-15, 1 - 1e-15].");
    return report;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json j;
    j["generated_at"] = generated_at;
    j["data_hash"] = data_hash;
    nlohmann::ordered_json fams = nlohmann::ordered_json::array();
    for (auto f : families) fams.push_back(to_string(f));
    j["families"] = fams;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : maps) rows.push_back(row_json(row));
    j["maps"] = rows;
    j["weighted_average"] = row_json(weighted_average);
    j["ohe_map"] = ohe_map ? row_json(*ohe_map) : nlohmann::ordered_json();
    nlohmann::ordered_json ids = nlohmann::ordered_json::object();
    for (const auto& [f, id] : per_map_model_ids) ids[std::string(to_string(f))] = id;
    j["per_map_model_ids"] = ids;
    nlohmann::ordered_json ohe_ids = nlohmann::ordered_json::object();
    for (const auto& [f, id] : ohe_model_ids) ohe_ids[std::string(to_string(f))] = id;
    j["ohe_model_ids"] = ohe_ids;
    j["notes"] = notes;
    return j;
}

std::string EvalReport::to_text() const {
    std::vector<std::string> header{"Map", "Rounds"};
    for (auto f : families) header.push_back(family_title(f));
    TextTable table(std::move(header));
    auto add = [&](const Row& row) {
        std::vector<std::string> cells{row.label, std::to_string(row.n_rounds)};
        for (auto f : families) cells.push_back(optional_cell(row.loss, f));
        table.add_row(std::move(cells));
    };
    for (const auto& row : maps) add(row);
    table.add_rule();
    add(weighted_average);
    if (ohe_map) add(*ohe_map);
    std::ostringstream out;
    out << "# generated_at: " << generated_at << "\n";
    out << "Test log-loss by map (data " << data_hash << ")\n\n" << table.render();
    for (const auto& note : notes) out << "\n* " << note;
    out << "\n";
    return out.str();
}

BuyWinRateReport buy_winrate_report(std::span<const LabeledRound> rounds) {
    BuyWinRateReport report;
    for (const auto& r : rounds) {
        for (Side side : kAllSides) {
            auto& cell = report.cells[static_cast<std::size_t>(side)][index_of(r.state.buy(side))];
            ++cell.rounds;
            if (r.round_winner == side) ++cell.wins;
        }
    }
    return report;
}

nlohmann::ordered_json BuyWinRateReport::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (Side side : kAllSides) {
        nlohmann::ordered_json s = nlohmann::ordered_json::object();
        for (BuyType b : kAllBuyTypes) {
            const Cell& c = at(side, b);
            if (!c.rounds) continue;
            s[std::string(to_string(b))] = {{"rounds", c.rounds}, {"wins", c.wins}, {"win_rate", *c.rate()}};
        }
        j[std::string(to_string(side))] = s;
    }
    return j;
}

std::string BuyWinRateReport::to_text() const {
    TextTable table({"Buy type", "CT rounds", "CT win %", "T rounds", "T win %"});
    for (BuyType b : kAllBuyTypes) {
        std::vector<std::string> row{std::string(display_name(b))};
        for (Side side : kAllSides) {
            const Cell& c = at(side, b);
            row.push_back(std::to_string(c.rounds));
            row.push_back(c.rate() ? percent(*c.rate()) : "-");
        }
        table.add_row(std::move(row));
    }
    return table.render();
}

NeuralParams TransferOptions::default_base() {
    NeuralParams p;
    p.hidden1 = 96;
    p.hidden2 = 32;
    p.dropout = 0.1;
    p.learning_rate = 1e-4;
    return p;
}

TransferReport transfer_study(const DatasetSplit& split, const TransferOptions& options, std::string generated_at) {
    TransferReport report;
    report.generated_at = std::move(generated_at);
    std::vector<LabeledRound> all = split.train;
    all.insert(all.end(), split.validation.begin(), split.validation.end());
    all.insert(all.end(), split.test.begin(), split.test.end());
    const auto corpus_maps = ordered_maps(all);
    if (corpus_maps.size() < 2) throw DataError("transfer study needs at least two maps in the corpus");
    const auto maps = options.maps.empty() ? corpus_maps : options.maps;

    std::vector<std::optional<TransferReport::Row>> rows(maps.size());
    std::vector<std::string> warnings(maps.size());
    parallel_for(maps.size(), options.jobs, [&](std::size_t k) {
        const std::string& map = maps[k];
        const auto own_train = rounds_on(split.train, map, true);
        const auto own_val = rounds_on(split.validation, map, true);
        const auto own_test = rounds_on(split.test, map, true);
        const auto other_train = rounds_on(split.train, map, false);
        const auto other_val = rounds_on(split.validation, map, false);
        if (own_train.empty() || own_val.empty() || own_test.empty() || other_train.empty() || other_val.empty()) {
            warnings[k] = "skipped held-out map '" + map + "': a train, validation or test partition is empty";
            return;
        }
        TrainOptions opts;
        opts.family = ModelFamily::Neural;
        opts.mode = EncodingMode::NoMap;
        opts.neural = options.base;
        const TrainedModel initial = train_model(other_train, other_val, opts);
        const TrainedModel tuned =
            fine_tune_neural(initial, own_train, own_val, options.finetune_learning_rate, options.base);

        TransferReport::Row row;
        row.map = map;
        row.n_test = static_cast<long>(own_test.size());
        if (const auto it = options.previous_best.find(map); it != options.previous_best.end()) {
            row.previous_best = it->second;
        }
        row.initial = model_log_loss(initial, own_test);
        row.fine_tuned = model_log_loss(tuned, own_test);
        row.initial_epoch = initial.metadata().at("stopping_iteration").at("all").get<int>();
        row.fine_tune_epoch = tuned.metadata().at("fine_tune").at("stopping_iteration").get<int>();
        rows[k] = row;
    });
    for (std::size_t k = 0; k < maps.size(); ++k) {
        if (rows[k]) report.rows.push_back(*rows[k]);
        if (!warnings[k].empty()) report.warnings.push_back(warnings[k]);
    }
    return report;
}

nlohmann::ordered_json TransferReport::to_json() const {
    nlohmann::ordered_json j;
    j["generated_at"] = generated_at;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["map"] = r.map;
        o["n_test"] = r.n_test;
        o["previous_best"] = r.previous_best ? nlohmann::ordered_json(*r.previous_best) : nlohmann::ordered_json();
        o["initial"] = r.initial;
        o["fine_tuned"] = r.fine_tuned;
        o["initial_epoch"] = r.initial_epoch;
        o["fine_tune_epoch"] = r.fine_tune_epoch;
        arr.push_back(o);
    }
    j["rows"] = arr;
    j["warnings"] = warnings;
    return j;
}

std::string TransferReport::to_text() const {
    TextTable table({"Held out map", "Test rounds", "Previous best NN", "Initial model", "Fine tuned"});
    for (const auto& r : rows) {
        table.add_row({r.map, std::to_string(r.n_test), r.previous_best ? fixed(*r.previous_best, 3) : "-",
                       fixed(r.initial, 3), fixed(r.fine_tuned, 3)});
    }
    std::ostringstream out;
    out << "# generated_at: " << generated_at << "\n" << table.render();
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return out.str();
}

std::string score_grid_csv(const Predictor& model, const RoundState& base, int rounds_to_win) {
    std::ostringstream out;
    out << "ct_score,t_score,p_ct_win,p_t_win,p_draw\n";
    const int last = rounds_to_win - 1;
    for (int ct = 0; ct <= last; ++ct) {
        for (int t = 0; t <= last; ++t) {
            if (ct == last && t == last) continue;  // no round is played at a tied final score
            RoundState s = base;
            s.ct_score = ct;
            s.t_score = t;
            s.round_number = ct + t + 1;
            const auto p = model.predict(s);
            out << ct << ',' << t << ',' << fixed(p.p_ct_win, 6) << ',' << fixed(p.p_t_win, 6) << ','
                << fixed(p.p_draw, 6) << '\n';
        }
    }
    return out.str();
}

std::string trace_csv(const Predictor& model, std::span<const LabeledRound> game_rounds) {
    std::vector<const LabeledRound*> ordered;
    for (const auto& r : game_rounds) ordered.push_back(&r);
    std::stable_sort(ordered.begin(), ordered.end(), [](const LabeledRound* a, const LabeledRound* b) {
        return a->state.round_number < b->state.round_number;
    });
    std::ostringstream out;
    out << "round_number,ct_team,t_team,ct_score,t_score,ct_buy,t_buy,p_ct_win,p_t_win,p_draw,"
           "ct_optimal_buy,ct_lost_probability,t_optimal_buy,t_lost_probability,round_winner\n";
    for (const LabeledRound* r : ordered) {
        const auto& s = r->state;
        const auto p = model.predict(s);
        const auto ct = evaluate_buy_options(model, s, Side::CT);
        const auto t = evaluate_buy_options(model, s, Side::T);
        out << s.round_number << ',' << s.ct_team << ',' << s.t_team << ',' << s.ct_score << ',' << s.t_score << ','
            << to_string(s.ct_buy) << ',' << to_string(s.t_buy) << ',' << fixed(p.p_ct_win, 6) << ','
            << fixed(p.p_t_win, 6) << ',' << fixed(p.p_draw, 6) << ',' << to_string(ct.optimal_buy) << ','
            << fixed(lost_probability(ct), 6) << ',' << to_string(t.optimal_buy) << ','
            << fixed(lost_probability(t), 6) << ',' << to_string(r->round_winner) << '\n';
    }
    return out.str();
}

}  // namespace econoscope
