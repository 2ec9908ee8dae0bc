#include "econoscope/config.hpp"

#include "econoscope/errors.hpp"

#include <charconv>
#include <fstream>

namespace econoscope {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& in, const std::string& source) {
    ConfigFile cfg;
    cfg.source_ = source;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#' || text[0] == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) {
                throw ValidationError(source, line_no, "section", "malformed section header '" + text + "'");
            }
            section = trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw ValidationError(source, line_no, "", "expected 'key = value'");
        const std::string key = trim(std::string_view(text).substr(0, eq));
        if (key.empty()) throw ValidationError(source, line_no, "", "empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full)) {
            throw ValidationError(source, line_no, full, "duplicate key (first set on line " +
                                                             std::to_string(cfg.lines_[full]) + ")");
        }
        cfg.values_[full] = trim(std::string_view(text).substr(eq + 1));
        cfg.lines_[full] = line_no;
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file '" + path.string() + "'");
    return parse(in, path.string());
}

std::optional<std::string> ConfigFile::get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    used_.insert(key);
    return it->second;
}

namespace {

[[noreturn]] void bad_value(const std::string& source, const std::map<std::string, std::size_t>& lines,
                            const std::string& key, const std::string& what) {
    const auto it = lines.find(key);
    throw ValidationError(source, it == lines.end() ? 0 : it->second, key, what);
}

}  // namespace

std::optional<long long> ConfigFile::get_int(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
    if (ec != std::errc() || ptr != v->data() + v->size()) bad_value(source_, lines_, key, "expected an integer");
    return out;
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    try {
        std::size_t pos = 0;
        const double out = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        bad_value(source_, lines_, key, "expected a number");
    }
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
    bad_value(source_, lines_, key, "expected true or false");
}

std::optional<std::vector<std::string>> ConfigFile::get_list(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= v->size()) {
        const auto comma = v->find(',', start);
        const auto end = comma == std::string::npos ? v->size() : comma;
        const auto item = trim(std::string_view(*v).substr(start, end - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<std::string> ConfigFile::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        if (!used_.count(key)) out.push_back(key);
    }
    return out;
}

void apply_config(const ConfigFile& f, SimConfig& c) {
    auto& e = c.economy;
    if (auto v = f.get_int("economy.win_reward")) e.win_reward = *v;
    if (auto v = f.get_int("economy.bomb_detonation_reward")) e.bomb_detonation_reward = *v;
    if (auto v = f.get_int("economy.max_money")) e.max_money = *v;
    if (auto v = f.get_int("economy.full_buy_threshold")) e.full_buy_threshold = *v;
    if (auto v = f.get_int("economy.players_per_team")) e.players_per_team = static_cast<int>(*v);
    if (auto v = f.get_list("economy.loss_bonus_ladder")) {
        e.loss_bonus_ladder.clear();
        for (const auto& item : *v) {
            Dollars amount = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), amount);
            if (ec != std::errc() || ptr != item.data() + item.size()) {
                throw ValidationError("<config>", 0, "economy.loss_bonus_ladder", "expected integers");
            }
            e.loss_bonus_ladder.push_back(amount);
        }
    }
    if (auto v = f.get_double("sim.equip_advantage_coeff")) c.equip_advantage_coeff = *v;
    if (auto v = f.get_int("sim.rounds_to_win")) c.rounds_to_win = static_cast<int>(*v);
    if (auto v = f.get_int("sim.half_length")) c.half_length = static_cast<int>(*v);
    if (auto v = f.get_int("sim.seed")) c.rng_seed = static_cast<std::uint64_t>(*v);
    if (auto v = f.get_double("sim.winner_carryover")) c.winner_carryover = *v;
    if (auto v = f.get_double("sim.loser_carryover")) c.loser_carryover = *v;
    if (auto v = f.get_int("sim.start_money")) c.start_money = *v;
    if (auto v = f.get_int("sim.start_equip")) c.start_equip = *v;
    if (auto v = f.get_double("sim.detonation_share")) c.detonation_share = *v;
    if (auto v = f.get("sim.map")) c.map_name = *v;
    for (const auto& [key, value] : f.values()) {
        static const std::string prefix = "sim.side_bias.";
        if (key.rfind(prefix, 0) == 0) c.map_side_bias[key.substr(prefix.size())] = *f.get_double(key);
    }
    for (const char* side : {"ct", "t"}) {
        const std::string key = std::string("sim.policy_") + side;
        if (auto v = f.get(key)) {
            const auto policy = SpendingPolicy::parse(*v);
            if (!policy) throw ValidationError("<config>", 0, key, "unknown spending policy '" + *v + "'");
            (std::string(side) == "ct" ? c.policy_ct : c.policy_t) = *policy;
        }
    }
    c.validate();
}

void apply_config(const ConfigFile& f, CorpusConfig& c) {
    apply_config(f, c.sim);
    if (auto v = f.get_int("corpus.games")) c.n_games = static_cast<int>(*v);
    if (auto v = f.get_list("corpus.maps")) c.maps = *v;
    if (auto v = f.get("corpus.first_date")) c.first_date = parse_date(*v);
    if (auto v = f.get("corpus.last_date")) c.last_date = parse_date(*v);
    if (auto v = f.get_int("corpus.teams")) c.teams = CorpusConfig::default_teams(static_cast<int>(*v));
    if (auto v = f.get_list("corpus.policies")) {
        // Policies cycle over the teams in order.
        std::vector<SpendingPolicy> policies;
        for (const auto& name : *v) {
            const auto p = SpendingPolicy::parse(name);
            if (!p) throw ValidationError("<config>", 0, "corpus.policies", "unknown spending policy '" + name + "'");
            policies.push_back(*p);
        }
        if (policies.empty()) throw ValidationError("<config>", 0, "corpus.policies", "empty policy list");
        for (std::size_t i = 0; i < c.teams.size(); ++i) c.teams[i].policy = policies[i % policies.size()];
    }
}

void apply_config(const ConfigFile& f, SplitBoundaries& b) {
    if (auto v = f.get("split.train_end")) b.train_end = parse_date(*v);
    if (auto v = f.get("split.val_end")) b.val_end = parse_date(*v);
    if (auto v = f.get("split.test_end")) b.test_end = parse_date(*v);
}

}  // namespace econoscope
