#pragma once

#include "econoscope/domain.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace econoscope {

/// Column layout of a feature vector.
///   [0] ct_score  [1] t_score  [2] score_diff  [3] ct_equip_start  [4] t_equip_start
///   [5] ct_money  [6] t_money  [7..12] one-hot ct_buy  [13..18] one-hot t_buy
///   WithMap only: [19..25] one-hot map (default pool order)
enum class FeatureLayout : std::uint8_t { Base = 0, WithMap = 1 };

/// How a model consumes the map: one sub-model per map, a single model with
/// map one-hots, or a single model that ignores the map.
enum class EncodingMode : std::uint8_t { PerMap = 0, OheMap = 1, NoMap = 2 };

namespace feature {
inline constexpr std::size_t kCtScore = 0;
inline constexpr std::size_t kTScore = 1;
inline constexpr std::size_t kScoreDiff = 2;
inline constexpr std::size_t kCtEquip = 3;
inline constexpr std::size_t kTEquip = 4;
inline constexpr std::size_t kCtMoney = 5;
inline constexpr std::size_t kTMoney = 6;
inline constexpr std::size_t kCtBuyBegin = 7;
inline constexpr std::size_t kTBuyBegin = 13;
inline constexpr std::size_t kMapBegin = 19;
inline constexpr std::size_t kBaseWidth = 19;
inline constexpr std::size_t kWithMapWidth = 26;
}  // namespace feature

constexpr std::size_t width(FeatureLayout layout) noexcept {
    return layout == FeatureLayout::Base ? feature::kBaseWidth : feature::kWithMapWidth;
}

constexpr FeatureLayout layout_for(EncodingMode mode) noexcept {
    return mode == EncodingMode::OheMap ? FeatureLayout::WithMap : FeatureLayout::Base;
}

std::string_view to_string(FeatureLayout layout) noexcept;
std::string_view to_string(EncodingMode mode) noexcept;
std::optional<FeatureLayout> parse_feature_layout(std::string_view text) noexcept;
std::optional<EncodingMode> parse_encoding_mode(std::string_view text) noexcept;

std::vector<std::string> feature_names(FeatureLayout layout);

struct FeatureVector {
    FeatureLayout layout = FeatureLayout::Base;
    std::vector<double> values;
    /// Routing key for per-map models; not a feature in the Base layout.
    std::string map_name;
};

/// Throws SchemaMismatch when the OHE layout is requested for a map outside
/// the default pool.
FeatureVector featurize(const RoundState& state, EncodingMode mode);
FeatureVector featurize(const LabeledRound& round, EncodingMode mode);

/// Appends the encoding of `state` to `out` (no allocation per call).
void append_features(const RoundState& state, FeatureLayout layout, std::vector<double>& out);

/// Fields recoverable from a feature vector.
struct DecodedFeatures {
    int ct_score = 0;
    int t_score = 0;
    Dollars ct_equip_start = 0;
    Dollars t_equip_start = 0;
    Dollars ct_money = 0;
    Dollars t_money = 0;
    BuyType ct_buy = BuyType::Eco;
    BuyType t_buy = BuyType::Eco;
    std::optional<std::string> map_name;  // WithMap layout only

    bool operator==(const DecodedFeatures&) const = default;
};

/// Inverse of featurize on the encoded fields. Throws SchemaMismatch on a
/// malformed vector (wrong width, broken one-hot block, inconsistent diff).
DecodedFeatures decode_features(const FeatureVector& features);

/// Row-major design matrix with outcome labels, the training input of every
/// model family.
struct Dataset {
    FeatureLayout layout = FeatureLayout::Base;
    std::size_t n_features = feature::kBaseWidth;
    std::vector<double> x;
    std::vector<std::uint8_t> y;

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }
    std::span<const double> row(std::size_t i) const noexcept {
        return {x.data() + i * n_features, n_features};
    }
    void push_back(std::span<const double> features, GameOutcome label);
    /// Order-sensitive fingerprint of contents.
    std::string fingerprint() const;
};

Dataset make_dataset(std::span<const LabeledRound> rounds, FeatureLayout layout);

}  // namespace econoscope
