#include "econoscope/models/model.hpp"

#include "econoscope/errors.hpp"
#include "econoscope/hash.hpp"
#include "econoscope/parallel.hpp"

#include <fstream>
#include <sstream>

namespace econoscope {

std::string_view to_string(ModelFamily family) noexcept {
    switch (family) {
    case ModelFamily::Logistic: return "logistic";
    case ModelFamily::Gbtree: return "gbtree";
    case ModelFamily::Neural: return "neural";
    }
    return "?";
}

std::optional<ModelFamily> parse_model_family(std::string_view text) noexcept {
    for (auto f : {ModelFamily::Logistic, ModelFamily::Gbtree, ModelFamily::Neural}) {
        if (text == to_string(f)) return f;
    }
    return std::nullopt;
}

Probabilities predict_row(const Classifier& classifier, std::span<const double> row) {
    return std::visit([&](const auto& c) { return c.predict(row); }, classifier);
}

namespace {

std::size_t classifier_width(const Classifier& c) {
    return std::visit([](const auto& m) { return m.n_features(); }, c);
}

ModelFamily family_of(const Classifier& c) { return static_cast<ModelFamily>(c.index()); }

nlohmann::json classifier_to_json(const Classifier& c) {
    return std::visit([](const auto& m) { return m.to_json(); }, c);
}

Classifier classifier_from_json(ModelFamily family, const nlohmann::json& j) {
    switch (family) {
    case ModelFamily::Logistic: return LogisticClassifier::from_json(j);
    case ModelFamily::Gbtree: return BoostedTrees::from_json(j);
    case ModelFamily::Neural: return NeuralNet::from_json(j);
    }
    throw CorruptModelError("unknown model family");
}

}  // namespace

TrainedModel::TrainedModel(ModelFamily family, EncodingMode mode, std::map<std::string, Classifier> sub_models,
                           nlohmann::json metadata)
    : family_(family), mode_(mode), sub_models_(std::move(sub_models)), metadata_(std::move(metadata)) {
    if (sub_models_.empty()) throw std::invalid_argument("TrainedModel: no classifiers");
    if (mode_ != EncodingMode::PerMap && (sub_models_.size() != 1 || !sub_models_.begin()->first.empty())) {
        throw std::invalid_argument("TrainedModel: single-model modes hold exactly one classifier under key \"\"");
    }
    for (const auto& [map, c] : sub_models_) {
        if (mode_ == EncodingMode::PerMap && map.empty()) throw std::invalid_argument("TrainedModel: empty map key");
        if (family_of(c) != family_) throw std::invalid_argument("TrainedModel: classifier family mismatch");
        if (classifier_width(c) != width(layout())) {
            throw SchemaMismatch("TrainedModel: classifier width " + std::to_string(classifier_width(c)) +
                                 " does not match layout " + std::string(to_string(layout())));
        }
    }
    model_id_ = std::string(to_string(family_)) + "-" + std::string(to_string(mode_)) + "-" +
                fnv1a_hex(payload().dump()).substr(0, 12);
}

const Classifier& TrainedModel::classifier(std::string_view map) const {
    const auto key = mode_ == EncodingMode::PerMap ? std::string(map) : std::string();
    const auto it = sub_models_.find(key);
    if (it == sub_models_.end()) {
        throw UnknownMapError("model " + model_id_ + " has no sub-model for map '" + std::string(map) + "'");
    }
    return it->second;
}

bool TrainedModel::accepts_map(std::string_view map) const {
    switch (mode_) {
    case EncodingMode::PerMap: return sub_models_.count(std::string(map)) > 0;
    case EncodingMode::OheMap: return map_pool_index(map).has_value();
    case EncodingMode::NoMap: return true;
    }
    return false;
}

std::vector<std::string> TrainedModel::maps() const {
    std::vector<std::string> out;
    if (mode_ == EncodingMode::PerMap) {
        for (const auto& [map, c] : sub_models_) out.push_back(map);
    } else if (mode_ == EncodingMode::OheMap) {
        out.assign(kDefaultMapPool.begin(), kDefaultMapPool.end());
    }
    return out;
}

Probabilities TrainedModel::predict_features(std::span<const double> features, std::string_view map_name) const {
    return predict_row(classifier(map_name), features);
}

OutcomeDistribution TrainedModel::predict(const RoundState& state) const {
    const Classifier& c = classifier(state.map_name);
    std::vector<double> row;
    row.reserve(width(layout()));
    append_features(state, layout(), row);
    return to_distribution(predict_row(c, row));
}

TrainedModel TrainedModel::with_classifier(std::string_view map, Classifier classifier) const {
    auto subs = sub_models_;
    const auto key = mode_ == EncodingMode::PerMap ? std::string(map) : std::string();
    subs[key] = std::move(classifier);
    return TrainedModel(family_, mode_, std::move(subs), metadata_);
}

nlohmann::json TrainedModel::payload() const {
    nlohmann::json subs = nlohmann::json::object();
    for (const auto& [map, c] : sub_models_) subs[map] = classifier_to_json(c);
    return {{"classifiers", subs}};
}

std::string TrainedModel::serialize() const {
    const nlohmann::json body = payload();
    const std::string body_text = body.dump();
    nlohmann::ordered_json doc;
    doc["format"] = "econoscope-model";
    doc["format_version"] = kModelFormatVersion;
    doc["family"] = to_string(family_);
    doc["encoding"] = to_string(mode_);
    doc["schema"] = {{"layout", to_string(layout())},
                     {"n_features", width(layout())},
                     {"feature_names", feature_names(layout())}};
    doc["model_id"] = model_id_;
    doc["metadata"] = metadata_;
    doc["payload_checksum"] = fnv1a_hex(body_text);
    doc["payload"] = body;
    return doc.dump(1) + "\n";
}

TrainedModel TrainedModel::deserialize(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorruptModelError(std::string("model file is not valid JSON (truncated?): ") + e.what());
    }
    try {
        if (!doc.is_object() || doc.value("format", std::string()) != "econoscope-model") {
            throw CorruptModelError("not an econoscope model file");
        }
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion) throw ModelVersionError(version, kModelFormatVersion);
        const auto family = parse_model_family(doc.at("family").get<std::string>());
        const auto mode = parse_encoding_mode(doc.at("encoding").get<std::string>());
        if (!family || !mode) throw CorruptModelError("model file names an unknown family or encoding");
        const auto& body = doc.at("payload");
        if (fnv1a_hex(body.dump()) != doc.at("payload_checksum").get<std::string>()) {
            throw CorruptModelError("model payload checksum mismatch");
        }
        if (doc.at("schema").at("n_features").get<std::size_t>() != width(layout_for(*mode))) {
            throw CorruptModelError("model schema width does not match its encoding");
        }
        std::map<std::string, Classifier> subs;
        for (const auto& [map, j] : body.at("classifiers").items()) subs.emplace(map, classifier_from_json(*family, j));
        return TrainedModel(*family, *mode, std::move(subs), doc.value("metadata", nlohmann::json::object()));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptModelError(std::string("malformed model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw CorruptModelError(std::string("inconsistent model file: ") + e.what());
    }
}

void TrainedModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file '" + path.string() + "'");
    out << serialize();
    if (!out) throw DataError("error while writing model file '" + path.string() + "'");
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

nlohmann::json TrainOptions::hyperparameters() const {
    switch (family) {
    case ModelFamily::Logistic:
        return {{"subset", to_string(logistic.subset)},
                {"l2", logistic.l2},
                {"gradient_tolerance", logistic.gradient_tolerance},
                {"max_iterations", logistic.max_iterations}};
    case ModelFamily::Gbtree: return gbtree.to_json();
    case ModelFamily::Neural: return neural.to_json();
    }
    return {};
}

namespace {

struct FitOutcome {
    Classifier classifier;
    int stopping_iteration = 0;
};

FitOutcome fit_one(const Dataset& train, const Dataset& val, const TrainOptions& options) {
    FitHistory history;
    switch (options.family) {
    case ModelFamily::Logistic: {
        auto m = LogisticClassifier::fit(train, options.logistic);
        const int it = m.iterations();
        return {std::move(m), it};
    }
    case ModelFamily::Gbtree: {
        auto m = BoostedTrees::fit(train, &val, options.gbtree, &history);
        return {std::move(m), history.best_iteration};
    }
    case ModelFamily::Neural: {
        auto m = NeuralNet::fit(train, val, options.neural, &history);
        return {std::move(m), history.best_iteration};
    }
    }
    throw std::invalid_argument("unknown model family");
}

}  // namespace

TrainedModel train_model(std::span<const LabeledRound> train, std::span<const LabeledRound> val,
                         const TrainOptions& options) {
    if (train.empty()) throw TrainingError("train_model: empty training partition");
    const FeatureLayout layout = layout_for(options.mode);
    const bool needs_val = options.family != ModelFamily::Logistic;
    if (needs_val && val.empty()) throw TrainingError("train_model: empty validation partition");

    std::map<std::string, std::pair<std::vector<LabeledRound>, std::vector<LabeledRound>>> groups;
    if (options.mode == EncodingMode::PerMap) {
        for (const auto& r : train) groups[r.state.map_name].first.push_back(r);
        for (const auto& r : val) {
            const auto it = groups.find(r.state.map_name);
            if (it != groups.end()) it->second.second.push_back(r);
        }
        for (const auto& [map, g] : groups) {
            if (needs_val && g.second.empty()) {
                throw TrainingError("train_model: map '" + map + "' has training rounds but no validation rounds");
            }
        }
    } else {
        auto& g = groups[""];
        g.first.assign(train.begin(), train.end());
        g.second.assign(val.begin(), val.end());
    }

    std::vector<std::string> keys;
    for (const auto& [map, g] : groups) keys.push_back(map);
    std::vector<std::optional<FitOutcome>> fits(keys.size());
    std::vector<std::string> train_hashes(keys.size()), val_hashes(keys.size());
    parallel_for(keys.size(), options.jobs, [&](std::size_t k) {
        const auto& g = groups.at(keys[k]);
        const Dataset tr = make_dataset(g.first, layout);
        const Dataset va = make_dataset(g.second, layout);
        train_hashes[k] = tr.fingerprint();
        val_hashes[k] = va.fingerprint();
        fits[k] = fit_one(tr, va, options);
    });

    std::map<std::string, Classifier> subs;
    nlohmann::json stopping = nlohmann::json::object();
    Fnv1a train_hash, val_hash;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        stopping[keys[k].empty() ? "all" : keys[k]] = fits[k]->stopping_iteration;
        train_hash.update(train_hashes[k]);
        val_hash.update(val_hashes[k]);
        subs.emplace(keys[k], std::move(fits[k]->classifier));
    }
    nlohmann::json meta = {{"hyperparameters", options.hyperparameters()},
                           {"stopping_iteration", stopping},
                           {"train_rounds", train.size()},
                           {"val_rounds", val.size()},
                           {"train_hash", train_hash.hex()},
                           {"val_hash", val_hash.hex()}};
    return TrainedModel(options.family, options.mode, std::move(subs), std::move(meta));
}

TrainedModel fine_tune_neural(const TrainedModel& model, std::span<const LabeledRound> train,
                              std::span<const LabeledRound> val, double learning_rate, const NeuralParams& params) {
    if (model.family() != ModelFamily::Neural) throw SchemaMismatch("fine_tune_neural: model is not a neural network");
    if (model.mode() != EncodingMode::NoMap) {
        throw SchemaMismatch("fine_tune_neural: model must use the map-agnostic feature layout");
    }
    const auto& net = std::get<NeuralNet>(model.classifier());
    NeuralParams p = params;
    p.learning_rate = learning_rate;
    const Dataset tr = make_dataset(train, FeatureLayout::Base);
    const Dataset va = make_dataset(val, FeatureLayout::Base);
    FitHistory history;
    NeuralNet tuned = net.fine_tune(tr, va, p, &history);
    nlohmann::json meta = model.metadata();
    meta["fine_tune"] = {{"learning_rate", learning_rate},
                         {"stopping_iteration", history.best_iteration},
                         {"train_rounds", train.size()},
                         {"train_hash", tr.fingerprint()},
                         {"val_hash", va.fingerprint()}};
    return TrainedModel(ModelFamily::Neural, EncodingMode::NoMap, {{"", Classifier(std::move(tuned))}}, std::move(meta));
}

}  // namespace econoscope
