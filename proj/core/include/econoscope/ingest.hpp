#pragma once

#include "econoscope/domain.hpp"
#include "econoscope/economy.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace econoscope {

enum class RecordFormat { Jsonl, Csv };

std::optional<RecordFormat> parse_record_format(std::string_view text) noexcept;
/// ".csv" -> Csv, anything else -> Jsonl.
RecordFormat format_from_extension(const std::filesystem::path& path) noexcept;

/// Column names of the flat round-record schema, in canonical order.
inline constexpr std::array<std::string_view, 16> kRoundRecordFields{
    "game_id",        "map_name",      "round_number", "match_date",  "ct_team",  "t_team",
    "ct_score",       "t_score",       "ct_equip_start", "t_equip_start", "ct_money", "t_money",
    "ct_spend",       "t_spend",       "round_winner", "game_winner",
};

/// Marker used in the game_winner column for drawn games.
inline constexpr std::string_view kDrawMarker = "DRAW";

/// One row of the round-record schema.
struct RoundRecord {
    RoundState state;
    Side round_winner = Side::CT;
    /// Winning team id, or kDrawMarker.
    std::string game_winner;
};

struct IngestOptions {
    bool allow_new_maps = false;
    BuyThresholds thresholds{};
};

struct IngestWarning {
    std::string file;
    std::size_t line = 0;
    std::string message;

    std::string to_string() const;
};

struct LoadResult {
    std::vector<RoundRecord> records;
    std::vector<IngestWarning> warnings;
};

/// Reads and validates a round-record file. Buy labels are always recomputed
/// from (equipment, spend); an input ct_buy/t_buy column that disagrees is
/// overwritten with a warning. Throws ValidationError (with line and field)
/// on the first malformed record, DataError if the file cannot be read.
LoadResult load_rounds(const std::filesystem::path& path, RecordFormat format,
                       const IngestOptions& options = {});

/// Same as load_rounds on an in-memory stream; `source` names it in messages.
LoadResult parse_rounds(std::istream& in, RecordFormat format, const std::string& source,
                        const IngestOptions& options = {});

/// Loads several files; records keep file order, warnings are sorted by
/// (file, line).
LoadResult load_corpus(std::span<const std::filesystem::path> paths, const IngestOptions& options = {});

void write_rounds(std::ostream& out, std::span<const RoundRecord> records, RecordFormat format);

/// game_id -> winning team id or kDrawMarker.
using GameResults = std::map<std::string, std::string>;

/// Winner table from the game_winner column. Throws DataError when rounds of
/// one game disagree.
GameResults collect_game_results(std::span<const RoundRecord> records);

/// Labels each round relative to its own sides: CtWin when the game winner
/// plays CT in that round, TWin when it plays T, Draw for drawn games.
/// Throws DataError listing every game_id missing from `results`.
std::vector<LabeledRound> derive_labels(std::span<const RoundRecord> records, const GameResults& results);

struct SplitBoundaries {
    Date train_end;
    Date val_end;
    /// Games dated after this are dropped (with a warning) when set.
    std::optional<Date> test_end;

    /// Train through 2020-09-30, validation through 2020-11-30, test through 2021-04-20.
    static SplitBoundaries defaults();
};

struct DatasetSplit {
    std::vector<LabeledRound> train;
    std::vector<LabeledRound> validation;
    std::vector<LabeledRound> test;
    SplitBoundaries boundaries;
    std::vector<std::string> warnings;
};

/// Assigns whole games by date (the earliest match_date among a game's
/// rounds): <= train_end train, <= val_end validation, otherwise test.
/// Rounds inside a game are ordered by round_number. Empty partitions only
/// produce warnings. Throws std::invalid_argument unless train_end < val_end.
DatasetSplit split_by_date(std::span<const LabeledRound> rounds, const SplitBoundaries& boundaries);

}  // namespace econoscope
