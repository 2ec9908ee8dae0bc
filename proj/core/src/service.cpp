#include "econoscope/service.hpp"

#include "econoscope/counterfactual.hpp"
#include "econoscope/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>

namespace econoscope {

namespace {

using ordered_json = nlohmann::ordered_json;

// A request problem reported as 400 with the offending field.
struct BadRequest {
    std::string field;
    std::string message;
};

HttpResponse json_response(int status, const ordered_json& body) { return {status, body.dump() + "\n"}; }

HttpResponse error_response(int status, const std::string& message, const std::string& field = {}) {
    ordered_json body;
    body["error"] = message;
    if (!field.empty()) body["field"] = field;
    return json_response(status, body);
}

const nlohmann::json& require(const nlohmann::json& body, const std::string& field) {
    const auto it = body.find(field);
    if (it == body.end() || it->is_null()) throw BadRequest{field, "missing required field '" + field + "'"};
    return *it;
}

std::int64_t to_amount(const nlohmann::json& v, const std::string& field) {
    if (v.is_number_integer()) {
        const auto n = v.get<std::int64_t>();
        if (n < 0) throw BadRequest{field, "'" + field + "' must be non-negative"};
        return n;
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && d >= 0.0 && d < 9e15) return static_cast<std::int64_t>(d);
    }
    throw BadRequest{field, "'" + field + "' must be a non-negative integer"};
}

std::int64_t require_amount(const nlohmann::json& body, const std::string& field) {
    return to_amount(require(body, field), field);
}

std::optional<BuyType> optional_buy(const nlohmann::json& body, const std::string& field) {
    const auto it = body.find(field);
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw BadRequest{field, "'" + field + "' must be a buy type name"};
    const auto buy = parse_buy_type(it->get<std::string>());
    if (!buy) throw BadRequest{field, "unknown buy type '" + it->get<std::string>() + "'"};
    return buy;
}

// Fields shared by both endpoints: map, scores, equipment and money.
RoundState parse_base_state(const nlohmann::json& body, int rounds_to_win) {
    RoundState s;
    const auto& map = require(body, "map_name");
    if (!map.is_string() || map.get<std::string>().empty()) {
        throw BadRequest{"map_name", "'map_name' must be a non-empty string"};
    }
    s.map_name = map.get<std::string>();
    s.ct_score = static_cast<int>(std::min<std::int64_t>(require_amount(body, "ct_score"), 1000));
    s.t_score = static_cast<int>(std::min<std::int64_t>(require_amount(body, "t_score"), 1000));
    s.ct_equip_start = require_amount(body, "ct_equip_start");
    s.t_equip_start = require_amount(body, "t_equip_start");
    s.ct_money = require_amount(body, "ct_money");
    s.t_money = require_amount(body, "t_money");
    const int last = rounds_to_win - 1;
    if (s.ct_score >= rounds_to_win || s.t_score >= rounds_to_win) {
        throw BadRequest{s.ct_score >= rounds_to_win ? "ct_score" : "t_score",
                         "the game is over at " + std::to_string(rounds_to_win) + " rounds; not a round start"};
    }
    if (s.ct_score == last && s.t_score == last) {
        throw BadRequest{"ct_score", "the game is drawn at " + std::to_string(last) + "-" + std::to_string(last) +
                                         "; not a round start"};
    }
    s.round_number = s.ct_score + s.t_score + 1;
    s.game_id = "request";
    if (auto it = body.find("ct_team"); it != body.end() && it->is_string()) s.ct_team = it->get<std::string>();
    if (auto it = body.find("t_team"); it != body.end() && it->is_string()) s.t_team = it->get<std::string>();
    return s;
}

// Buy of one side from its spend and/or explicit buy type.
void parse_side_buy(const nlohmann::json& body, RoundState& s, Side side) {
    const std::string prefix = side == Side::CT ? "ct_" : "t_";
    const auto buy = optional_buy(body, prefix + "buy");
    const auto spend_it = body.find(prefix + "spend");
    const bool has_spend = spend_it != body.end() && !spend_it->is_null();
    if (!has_spend && !buy) throw BadRequest{prefix + "spend", "missing required field '" + prefix + "spend'"};
    if (has_spend) {
        const auto spend = to_amount(*spend_it, prefix + "spend");
        if (spend > s.money(side)) throw BadRequest{prefix + "spend", "'" + prefix + "spend' exceeds '" + prefix + "money'"};
        const BuyType derived = classify_buy(s.equip_start(side), spend);
        if (buy && *buy != derived) {
            throw BadRequest{prefix + "buy", "'" + prefix + "buy' disagrees with '" + prefix + "spend' (" +
                                                 std::string(to_string(derived)) + ")"};
        }
        s.set_spend(side, spend);
        s.set_buy(side, derived);
    } else {
        if (!feasible_buys(s.equip_start(side), s.money(side)).contains(*buy)) {
            throw BadRequest{prefix + "buy", "'" + prefix + "buy' is not affordable with the given money and equipment"};
        }
        s.set_buy(side, *buy);
        s.set_spend(side, representative_spend(*buy, s.equip_start(side), s.money(side)));
    }
}

nlohmann::json parse_body(std::string_view body) {
    try {
        auto j = nlohmann::json::parse(body);
        if (!j.is_object()) throw BadRequest{"", "request body must be a JSON object"};
        return j;
    } catch (const nlohmann::json::parse_error&) {
        throw BadRequest{"", "request body is not valid JSON"};
    }
}

}  // namespace

WhatIfService::WhatIfService(std::shared_ptr<const TrainedModel> model, int rounds_to_win)
    : model_(std::move(model)), rounds_to_win_(rounds_to_win) {}

HttpResponse WhatIfService::predict(std::string_view text) const {
    if (!model_) return error_response(503, "no model loaded");
    try {
        const auto body = parse_body(text);
        RoundState s = parse_base_state(body, rounds_to_win_);
        parse_side_buy(body, s, Side::CT);
        parse_side_buy(body, s, Side::T);
        if (!model_->accepts_map(s.map_name)) {
            return error_response(422, "model " + model_->model_id() + " has no encoding for map '" + s.map_name + "'",
                                  "map_name");
        }
        const auto p = model_->predict(s);
        ordered_json out;
        out["p_ct_win"] = p.p_ct_win;
        out["p_t_win"] = p.p_t_win;
        out["p_draw"] = p.p_draw;
        out["model_id"] = model_->model_id();
        return json_response(200, out);
    } catch (const BadRequest& e) {
        return error_response(400, e.message, e.field);
    } catch (const UnknownMapError& e) {
        return error_response(422, e.what(), "map_name");
    } catch (const std::exception& e) {
        return error_response(500, std::string("internal error: ") + e.what());
    }
}

HttpResponse WhatIfService::whatif(std::string_view text) const {
    if (!model_) return error_response(503, "no model loaded");
    try {
        const auto body = parse_body(text);
        RoundState s = parse_base_state(body, rounds_to_win_);
        const auto& side_json = require(body, "side");
        const auto side = side_json.is_string() ? parse_side(side_json.get<std::string>()) : std::nullopt;
        if (!side) throw BadRequest{"side", "'side' must be \"CT\" or \"T\""};
        if (!model_->accepts_map(s.map_name)) {
            return error_response(422, "model " + model_->model_id() + " has no encoding for map '" + s.map_name + "'",
                                  "map_name");
        }
        const Side opp = opposite(*side);
        const BuySet own_feasible = feasible_buys(s.equip_start(*side), s.money(*side));
        const BuySet opp_feasible = feasible_buys(s.equip_start(opp), s.money(opp));
        if (own_feasible.empty() || opp_feasible.empty()) {
            return error_response(422, "no feasible buy for the given money and equipment");
        }
        const auto opp_buy = optional_buy(body, "opponent_buy").value_or(most_expensive(opp_feasible));
        if (!opp_feasible.contains(opp_buy)) {
            throw BadRequest{"opponent_buy", "'opponent_buy' is not affordable for the opponent"};
        }
        const auto actual = optional_buy(body, "actual_buy");
        if (actual && !own_feasible.contains(*actual)) {
            throw BadRequest{"actual_buy", "'actual_buy' is not affordable with the given money and equipment"};
        }
        s.set_buy(opp, opp_buy);
        s.set_spend(opp, representative_spend(opp_buy, s.equip_start(opp), s.money(opp)));
        const BuyType own = actual.value_or(cheapest(own_feasible));
        s.set_buy(*side, own);
        s.set_spend(*side, representative_spend(own, s.equip_start(*side), s.money(*side)));

        const BuyEvaluation ev = evaluate_buy_options(*model_, s, *side);
        ordered_json out;
        out["model_id"] = model_->model_id();
        out["map_name"] = s.map_name;
        out["side"] = to_string(*side);
        out["opponent_buy"] = to_string(opp_buy);
        ordered_json options = ordered_json::array();
        for (const auto& o : ev.options) {
            ordered_json item;
            item["buy"] = to_string(o.buy);
            item["win_probability"] = o.win_probability;
            item["delta_to_best"] = o.win_probability - ev.o_optimal;
            options.push_back(item);
        }
        out["options"] = options;
        out["optimal_buy"] = to_string(ev.optimal_buy);
        out["optimal_probability"] = ev.o_optimal;
        if (actual) {
            out["actual_buy"] = to_string(*actual);
            out["actual_probability"] = ev.w_actual;
            out["lost_probability"] = lost_probability(ev);
        }
        return json_response(200, out);
    } catch (const BadRequest& e) {
        return error_response(400, e.message, e.field);
    } catch (const UnknownMapError& e) {
        return error_response(422, e.what(), "map_name");
    } catch (const std::exception& e) {
        return error_response(500, std::string("internal error: ") + e.what());
    }
}

HttpResponse WhatIfService::meta() const {
    if (!model_) return error_response(503, "no model loaded");
    ordered_json out;
    out["model_id"] = model_->model_id();
    out["families"] = {to_string(model_->family())};
    out["encoding"] = to_string(model_->mode());
    auto maps = model_->maps();
    if (maps.empty()) maps.assign(kDefaultMapPool.begin(), kDefaultMapPool.end());
    out["maps"] = maps;
    out["schema_version"] = kModelFormatVersion;
    out["feature_layout"] = to_string(model_->layout());
    out["buy_types"] = ordered_json::array();
    for (BuyType b : kAllBuyTypes) out["buy_types"].push_back(to_string(b));
    return json_response(200, out);
}

HttpResponse WhatIfService::health() const {
    if (!model_) return error_response(503, "no model loaded");
    ordered_json out;
    out["status"] = "ok";
    out["model_id"] = model_->model_id();
    return json_response(200, out);
}

HttpResponse WhatIfService::handle(std::string_view method, std::string_view path, std::string_view body) const {
    if (path == "/v1/predict" && method == "POST") return predict(body);
    if (path == "/v1/whatif" && method == "POST") return whatif(body);
    if (path == "/v1/meta" && method == "GET") return meta();
    if (path == "/v1/health" && method == "GET") return health();
    if (path == "/v1/predict" || path == "/v1/whatif" || path == "/v1/meta" || path == "/v1/health") {
        return error_response(405, "method not allowed");
    }
    return error_response(404, "not found");
}

std::pair<std::string, int> parse_listen_address(std::string_view address) {
    const auto colon = address.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("listen address must be host:port");
    std::string host(address.substr(0, colon));
    if (host.empty()) host = "0.0.0.0";
    const auto port_text = address.substr(colon + 1);
    int port = 0;
    const auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
    if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535) {
        throw std::invalid_argument("invalid port in listen address '" + std::string(address) + "'");
    }
    return {host, port};
}

}  // namespace econoscope
