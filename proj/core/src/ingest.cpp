#include "econoscope/ingest.hpp"

#include "econoscope/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace econoscope {

using nlohmann::json;

std::optional<RecordFormat> parse_record_format(std::string_view text) noexcept {
    if (text == "jsonl" || text == "json") return RecordFormat::Jsonl;
    if (text == "csv") return RecordFormat::Csv;
    return std::nullopt;
}

RecordFormat format_from_extension(const std::filesystem::path& path) noexcept {
    return path.extension() == ".csv" ? RecordFormat::Csv : RecordFormat::Jsonl;
}

std::string IngestWarning::to_string() const {
    return file + ":" + std::to_string(line) + ": " + message;
}

namespace {

// Splits one CSV line. Supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

class RecordReader {
public:
    RecordReader(const json& obj, const std::string& file, std::size_t line)
        : obj_(obj), file_(file), line_(line) {}

    [[noreturn]] void fail(const std::string& field, const std::string& message) const {
        throw ValidationError(file_, line_, field, message);
    }

    const json& require(const char* field) const {
        const auto it = obj_.find(field);
        if (it == obj_.end() || it->is_null()) fail(field, "missing required field");
        return *it;
    }

    std::string text(const char* field) const {
        const json& v = require(field);
        if (v.is_string()) {
            auto s = v.get<std::string>();
            if (s.empty()) fail(field, "must not be empty");
            return s;
        }
        if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
        fail(field, "expected a string");
    }

    std::int64_t integer(const char* field) const {
        const json& v = require(field);
        std::int64_t out = 0;
        if (v.is_number_integer()) {
            out = v.get<std::int64_t>();
        } else if (v.is_number_float()) {
            const double d = v.get<double>();
            if (d != static_cast<double>(static_cast<std::int64_t>(d))) fail(field, "expected an integer");
            out = static_cast<std::int64_t>(d);
        } else if (v.is_string()) {
            const auto& s = v.get_ref<const std::string&>();
            const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
                fail(field, "expected an integer, got '" + s + "'");
            }
        } else {
            fail(field, "expected an integer");
        }
        return out;
    }

    std::int64_t non_negative(const char* field) const {
        const auto v = integer(field);
        if (v < 0) fail(field, "must be >= 0 (got " + std::to_string(v) + ")");
        return v;
    }

    std::optional<std::string> optional_text(const char* field) const {
        const auto it = obj_.find(field);
        if (it == obj_.end() || it->is_null()) return std::nullopt;
        if (it->is_string() && it->get_ref<const std::string&>().empty()) return std::nullopt;
        if (!it->is_string()) fail(field, "expected a string");
        return it->get<std::string>();
    }

private:
    const json& obj_;
    const std::string& file_;
    std::size_t line_;
};

RoundRecord read_record(const json& obj, const std::string& file, std::size_t line,
                        const IngestOptions& options, std::vector<IngestWarning>& warnings) {
    if (!obj.is_object()) throw ValidationError(file, line, "<record>", "expected a JSON object");
    RecordReader r(obj, file, line);
    RoundRecord rec;
    RoundState& s = rec.state;

    s.game_id = r.text("game_id");
    s.map_name = r.text("map_name");
    if (!options.allow_new_maps && !map_pool_index(s.map_name)) {
        r.fail("map_name", "unknown map '" + s.map_name + "' (not in the active map pool; pass "
                           "--allow-new-maps to accept it)");
    }
    const auto round_number = r.integer("round_number");
    if (round_number < 1) r.fail("round_number", "must be >= 1");
    s.round_number = static_cast<int>(round_number);
    const auto date_text = r.text("match_date");
    const auto date = try_parse_date(date_text);
    if (!date) r.fail("match_date", "not an ISO-8601 date: '" + date_text + "'");
    s.match_date = *date;
    s.ct_team = r.text("ct_team");
    s.t_team = r.text("t_team");
    if (s.ct_team == s.t_team) r.fail("t_team", "both sides are played by '" + s.ct_team + "'");
    s.ct_score = static_cast<int>(r.non_negative("ct_score"));
    s.t_score = static_cast<int>(r.non_negative("t_score"));
    if (s.round_number != s.ct_score + s.t_score + 1) {
        r.fail("round_number", "round " + std::to_string(s.round_number) + " does not follow score " +
                                   std::to_string(s.ct_score) + "-" + std::to_string(s.t_score));
    }
    s.ct_equip_start = r.non_negative("ct_equip_start");
    s.t_equip_start = r.non_negative("t_equip_start");
    s.ct_money = r.non_negative("ct_money");
    s.t_money = r.non_negative("t_money");
    s.ct_spend = r.non_negative("ct_spend");
    s.t_spend = r.non_negative("t_spend");
    if (s.ct_spend > s.ct_money) {
        r.fail("ct_spend", "spend " + std::to_string(s.ct_spend) + " exceeds money " + std::to_string(s.ct_money));
    }
    if (s.t_spend > s.t_money) {
        r.fail("t_spend", "spend " + std::to_string(s.t_spend) + " exceeds money " + std::to_string(s.t_money));
    }
    s.ct_buy = classify_buy(s.ct_equip_start, s.ct_spend, options.thresholds);
    s.t_buy = classify_buy(s.t_equip_start, s.t_spend, options.thresholds);

    for (auto [field, side] : {std::pair{"ct_buy", Side::CT}, std::pair{"t_buy", Side::T}}) {
        if (const auto stored = r.optional_text(field)) {
            const auto parsed = parse_buy_type(*stored);
            if (!parsed || *parsed != s.buy(side)) {
                warnings.push_back({file, line,
                                    std::string(field) + " '" + *stored + "' disagrees with equipment/spend; "
                                    "relabelled " + std::string(to_string(s.buy(side)))});
            }
        }
    }

    const auto winner = r.text("round_winner");
    const auto side = parse_side(winner);
    if (!side) r.fail("round_winner", "expected CT or T, got '" + winner + "'");
    rec.round_winner = *side;

    rec.game_winner = r.text("game_winner");
    if (rec.game_winner != kDrawMarker && rec.game_winner != s.ct_team && rec.game_winner != s.t_team) {
        r.fail("game_winner", "'" + rec.game_winner + "' is neither team of the round nor " +
                                  std::string(kDrawMarker));
    }
    return rec;
}

}  // namespace

LoadResult parse_rounds(std::istream& in, RecordFormat format, const std::string& source,
                        const IngestOptions& options) {
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;

    if (format == RecordFormat::Jsonl) {
        while (std::getline(in, line)) {
            ++line_no;
            strip_cr(line);
            if (line.find_first_not_of(" \t") == std::string::npos) continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ValidationError(source, line_no, "<record>", std::string("invalid JSON: ") + e.what());
            }
            result.records.push_back(read_record(obj, source, line_no, options, result.warnings));
        }
        return result;
    }

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (header.empty()) {
            header = std::move(fields);
            continue;
        }
        if (fields.size() != header.size()) {
            throw ValidationError(source, line_no, "<record>",
                                  "expected " + std::to_string(header.size()) + " columns, got " +
                                      std::to_string(fields.size()));
        }
        json obj = json::object();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (!fields[i].empty()) obj[header[i]] = fields[i];
        }
        result.records.push_back(read_record(obj, source, line_no, options, result.warnings));
    }
    if (header.empty()) throw ValidationError(source, 1, "<header>", "CSV file has no header row");
    return result;
}

LoadResult load_rounds(const std::filesystem::path& path, RecordFormat format, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open round file '" + path.string() + "'");
    return parse_rounds(in, format, path.string(), options);
}

LoadResult load_corpus(std::span<const std::filesystem::path> paths, const IngestOptions& options) {
    LoadResult all;
    for (const auto& path : paths) {
        auto part = load_rounds(path, format_from_extension(path), options);
        all.records.insert(all.records.end(), std::make_move_iterator(part.records.begin()),
                           std::make_move_iterator(part.records.end()));
        all.warnings.insert(all.warnings.end(), part.warnings.begin(), part.warnings.end());
    }
    std::stable_sort(all.warnings.begin(), all.warnings.end(), [](const auto& a, const auto& b) {
        return std::tie(a.file, a.line) < std::tie(b.file, b.line);
    });
    return all;
}

void write_rounds(std::ostream& out, std::span<const RoundRecord> records, RecordFormat format) {
    auto values = [](const RoundRecord& rec) {
        const RoundState& s = rec.state;
        return std::array<std::string, kRoundRecordFields.size()>{
            s.game_id,
            s.map_name,
            std::to_string(s.round_number),
            format_date(s.match_date),
            s.ct_team,
            s.t_team,
            std::to_string(s.ct_score),
            std::to_string(s.t_score),
            std::to_string(s.ct_equip_start),
            std::to_string(s.t_equip_start),
            std::to_string(s.ct_money),
            std::to_string(s.t_money),
            std::to_string(s.ct_spend),
            std::to_string(s.t_spend),
            std::string(to_string(rec.round_winner)),
            rec.game_winner,
        };
    };

    if (format == RecordFormat::Csv) {
        for (std::size_t i = 0; i < kRoundRecordFields.size(); ++i) {
            out << (i ? "," : "") << kRoundRecordFields[i];
        }
        out << '\n';
        for (const auto& rec : records) {
            const auto row = values(rec);
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_escape(row[i]);
            out << '\n';
        }
        return;
    }

    for (const auto& rec : records) {
        const RoundState& s = rec.state;
        nlohmann::ordered_json obj;
        obj["game_id"] = s.game_id;
        obj["map_name"] = s.map_name;
        obj["round_number"] = s.round_number;
        obj["match_date"] = format_date(s.match_date);
        obj["ct_team"] = s.ct_team;
        obj["t_team"] = s.t_team;
        obj["ct_score"] = s.ct_score;
        obj["t_score"] = s.t_score;
        obj["ct_equip_start"] = s.ct_equip_start;
        obj["t_equip_start"] = s.t_equip_start;
        obj["ct_money"] = s.ct_money;
        obj["t_money"] = s.t_money;
        obj["ct_spend"] = s.ct_spend;
        obj["t_spend"] = s.t_spend;
        obj["round_winner"] = to_string(rec.round_winner);
        obj["game_winner"] = rec.game_winner;
        out << obj.dump() << '\n';
    }
}

GameResults collect_game_results(std::span<const RoundRecord> records) {
    GameResults results;
    for (const auto& rec : records) {
        auto [it, inserted] = results.emplace(rec.state.game_id, rec.game_winner);
        if (!inserted && it->second != rec.game_winner) {
            throw DataError("game '" + rec.state.game_id + "' has conflicting game_winner values '" +
                            it->second + "' and '" + rec.game_winner + "'");
        }
    }
    return results;
}

std::vector<LabeledRound> derive_labels(std::span<const RoundRecord> records, const GameResults& results) {
    std::set<std::string> missing;
    for (const auto& rec : records) {
        if (!results.contains(rec.state.game_id)) missing.insert(rec.state.game_id);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) list += (list.empty() ? "" : ", ") + id;
        throw DataError("no game result for game_id(s): " + list);
    }

    std::vector<LabeledRound> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        const auto& winner = results.at(rec.state.game_id);
        LabeledRound lr{rec.state, GameOutcome::Draw, rec.round_winner};
        if (winner == kDrawMarker) {
            lr.outcome = GameOutcome::Draw;
        } else if (winner == rec.state.ct_team) {
            lr.outcome = GameOutcome::CtWin;
        } else if (winner == rec.state.t_team) {
            lr.outcome = GameOutcome::TWin;
        } else {
            throw DataError("game '" + rec.state.game_id + "' winner '" + winner + "' did not play round " +
                            std::to_string(rec.state.round_number));
        }
        out.push_back(std::move(lr));
    }
    return out;
}

SplitBoundaries SplitBoundaries::defaults() {
    using namespace std::chrono;
    return {year{2020} / September / 30, year{2020} / November / 30, year{2021} / April / 20};
}

DatasetSplit split_by_date(std::span<const LabeledRound> rounds, const SplitBoundaries& b) {
    if (!(std::chrono::sys_days(b.train_end) < std::chrono::sys_days(b.val_end))) {
        throw std::invalid_argument("split_by_date: train_end must be before val_end");
    }

    // Group by game in order of first appearance.
    std::unordered_map<std::string, std::size_t> game_index;
    std::vector<std::vector<const LabeledRound*>> games;
    std::vector<Date> game_dates;
    for (const auto& r : rounds) {
        auto [it, inserted] = game_index.emplace(r.state.game_id, games.size());
        if (inserted) {
            games.emplace_back();
            game_dates.push_back(r.state.match_date);
        }
        games[it->second].push_back(&r);
        auto& d = game_dates[it->second];
        if (std::chrono::sys_days(r.state.match_date) < std::chrono::sys_days(d)) d = r.state.match_date;
    }

    DatasetSplit split;
    split.boundaries = b;
    std::size_t dropped = 0;
    for (std::size_t g = 0; g < games.size(); ++g) {
        auto& members = games[g];
        std::stable_sort(members.begin(), members.end(), [](const auto* a, const auto* c) {
            return a->state.round_number < c->state.round_number;
        });
        const auto day = std::chrono::sys_days(game_dates[g]);
        std::vector<LabeledRound>* target = nullptr;
        if (day <= std::chrono::sys_days(b.train_end)) {
            target = &split.train;
        } else if (day <= std::chrono::sys_days(b.val_end)) {
            target = &split.validation;
        } else if (!b.test_end || day <= std::chrono::sys_days(*b.test_end)) {
            target = &split.test;
        }
        if (!target) {
            ++dropped;
            continue;
        }
        for (const auto* r : members) target->push_back(*r);
    }

    if (dropped > 0) {
        split.warnings.push_back(std::to_string(dropped) + " game(s) dated after " + format_date(*b.test_end) +
                                 " dropped");
    }
    for (auto [name, part] : {std::pair{"train", &split.train}, std::pair{"validation", &split.validation},
                              std::pair{"test", &split.test}}) {
        if (part->empty()) split.warnings.push_back(std::string(name) + " partition is empty");
    }
    return split;
}

}  // namespace econoscope
