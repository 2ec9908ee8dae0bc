#include "econoscope/features.hpp"

#include "econoscope/errors.hpp"
#include "econoscope/hash.hpp"

#include <cmath>
#include <stdexcept>

namespace econoscope {

std::string_view to_string(FeatureLayout layout) noexcept {
    return layout == FeatureLayout::Base ? "base19" : "with_map26";
}

std::string_view to_string(EncodingMode mode) noexcept {
    switch (mode) {
    case EncodingMode::PerMap: return "per_map";
    case EncodingMode::OheMap: return "ohe_map";
    case EncodingMode::NoMap: return "no_map";
    }
    return "?";
}

std::optional<FeatureLayout> parse_feature_layout(std::string_view text) noexcept {
    if (text == "base19") return FeatureLayout::Base;
    if (text == "with_map26") return FeatureLayout::WithMap;
    return std::nullopt;
}

std::optional<EncodingMode> parse_encoding_mode(std::string_view text) noexcept {
    for (auto mode : {EncodingMode::PerMap, EncodingMode::OheMap, EncodingMode::NoMap}) {
        if (text == to_string(mode)) return mode;
    }
    return std::nullopt;
}

std::vector<std::string> feature_names(FeatureLayout layout) {
    std::vector<std::string> names{"ct_score", "t_score", "score_diff", "ct_equip_start",
                                   "t_equip_start", "ct_money", "t_money"};
    for (const char* side : {"ct", "t"}) {
        for (BuyType buy : kAllBuyTypes) {
            names.push_back(std::string(side) + "_buy_" + std::string(to_string(buy)));
        }
    }
    if (layout == FeatureLayout::WithMap) {
        for (auto map : kDefaultMapPool) names.push_back("map_" + std::string(map));
    }
    return names;
}

void append_features(const RoundState& s, FeatureLayout layout, std::vector<double>& out) {
    const auto base = out.size();
    out.resize(base + width(layout), 0.0);
    double* v = out.data() + base;
    v[feature::kCtScore] = s.ct_score;
    v[feature::kTScore] = s.t_score;
    v[feature::kScoreDiff] = s.ct_score - s.t_score;
    v[feature::kCtEquip] = static_cast<double>(s.ct_equip_start);
    v[feature::kTEquip] = static_cast<double>(s.t_equip_start);
    v[feature::kCtMoney] = static_cast<double>(s.ct_money);
    v[feature::kTMoney] = static_cast<double>(s.t_money);
    v[feature::kCtBuyBegin + index_of(s.ct_buy)] = 1.0;
    v[feature::kTBuyBegin + index_of(s.t_buy)] = 1.0;
    if (layout == FeatureLayout::WithMap) {
        const auto idx = map_pool_index(s.map_name);
        if (!idx) {
            out.resize(base);
            throw UnknownMapError("map '" + s.map_name +
                                 "' has no one-hot column; the map-feature layout covers the "
                                  "default pool only");
        }
        v[feature::kMapBegin + *idx] = 1.0;
    }
}

FeatureVector featurize(const RoundState& state, EncodingMode mode) {
    FeatureVector fv;
    fv.layout = layout_for(mode);
    fv.map_name = state.map_name;
    fv.values.reserve(width(fv.layout));
    append_features(state, fv.layout, fv.values);
    return fv;
}

FeatureVector featurize(const LabeledRound& round, EncodingMode mode) {
    return featurize(round.state, mode);
}

namespace {

std::size_t decode_one_hot(std::span<const double> block, const char* what) {
    std::size_t hot = block.size();
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (block[i] == 1.0) {
            if (hot != block.size()) throw SchemaMismatch(std::string(what) + " block has several ones");
            hot = i;
        } else if (block[i] != 0.0) {
            throw SchemaMismatch(std::string(what) + " block is not one-hot");
        }
    }
    if (hot == block.size()) throw SchemaMismatch(std::string(what) + " block is empty");
    return hot;
}

Dollars as_dollars(double v, const char* what) {
    if (!(v >= 0.0) || v != std::floor(v)) throw SchemaMismatch(std::string(what) + " is not a whole dollar amount");
    return static_cast<Dollars>(v);
}

}  // namespace

DecodedFeatures decode_features(const FeatureVector& fv) {
    if (fv.values.size() != width(fv.layout)) {
        throw SchemaMismatch("feature vector has " + std::to_string(fv.values.size()) +
                             " values, layout " + std::string(to_string(fv.layout)) + " needs " +
                             std::to_string(width(fv.layout)));
    }
    const std::span<const double> v(fv.values);
    DecodedFeatures d;
    d.ct_score = static_cast<int>(v[feature::kCtScore]);
    d.t_score = static_cast<int>(v[feature::kTScore]);
    if (v[feature::kScoreDiff] != v[feature::kCtScore] - v[feature::kTScore]) {
        throw SchemaMismatch("score_diff does not equal ct_score - t_score");
    }
    d.ct_equip_start = as_dollars(v[feature::kCtEquip], "ct_equip_start");
    d.t_equip_start = as_dollars(v[feature::kTEquip], "t_equip_start");
    d.ct_money = as_dollars(v[feature::kCtMoney], "ct_money");
    d.t_money = as_dollars(v[feature::kTMoney], "t_money");
    d.ct_buy = kAllBuyTypes[decode_one_hot(v.subspan(feature::kCtBuyBegin, kNumBuyTypes), "ct_buy")];
    d.t_buy = kAllBuyTypes[decode_one_hot(v.subspan(feature::kTBuyBegin, kNumBuyTypes), "t_buy")];
    if (fv.layout == FeatureLayout::WithMap) {
        const auto idx = decode_one_hot(v.subspan(feature::kMapBegin, kDefaultMapPool.size()), "map");
        d.map_name = std::string(kDefaultMapPool[idx]);
    }
    return d;
}

void Dataset::push_back(std::span<const double> features, GameOutcome label) {
    if (features.size() != n_features) {
        throw std::invalid_argument("Dataset::push_back: expected " + std::to_string(n_features) +
                                    " features, got " + std::to_string(features.size()));
    }
    x.insert(x.end(), features.begin(), features.end());
    y.push_back(static_cast<std::uint8_t>(index_of(label)));
}

std::string Dataset::fingerprint() const {
    Fnv1a h;
    h.update_value(n_features);
    for (double v : x) h.update_value(v);
    for (auto label : y) h.update_value(label);
    return h.hex();
}

Dataset make_dataset(std::span<const LabeledRound> rounds, FeatureLayout layout) {
    Dataset ds;
    ds.layout = layout;
    ds.n_features = width(layout);
    ds.x.reserve(rounds.size() * ds.n_features);
    ds.y.reserve(rounds.size());
    for (const auto& r : rounds) {
        append_features(r.state, layout, ds.x);
        ds.y.push_back(static_cast<std::uint8_t>(index_of(r.outcome)));
    }
    return ds;
}

}  // namespace econoscope
