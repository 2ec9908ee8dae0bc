#pragma once

#include "econoscope/models/gbtree.hpp"
#include "econoscope/models/logistic.hpp"
#include "econoscope/models/neural.hpp"
#include "econoscope/predictor.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>

namespace econoscope {

enum class ModelFamily : std::uint8_t { Logistic = 0, Gbtree = 1, Neural = 2 };

std::string_view to_string(ModelFamily family) noexcept;
std::optional<ModelFamily> parse_model_family(std::string_view text) noexcept;

using Classifier = std::variant<LogisticClassifier, BoostedTrees, NeuralNet>;

Probabilities predict_row(const Classifier& classifier, std::span<const double> row);

/// Current model file format version.
inline constexpr int kModelFormatVersion = 1;

/// A fitted model of one family and encoding mode. Per-map models route each
/// round to the sub-model of its map; the other modes hold one classifier.
class TrainedModel final : public Predictor {
public:
    TrainedModel(ModelFamily family, EncodingMode mode, std::map<std::string, Classifier> sub_models,
                 nlohmann::json metadata = nlohmann::json::object());

    /// Throws UnknownMapError when a per-map model has no sub-model for the
    /// round's map (or an OHE model gets a map outside the pool).
    OutcomeDistribution predict(const RoundState& state) const override;
    Probabilities predict_features(std::span<const double> features, std::string_view map_name) const;

    ModelFamily family() const noexcept { return family_; }
    EncodingMode mode() const noexcept { return mode_; }
    FeatureLayout layout() const noexcept { return layout_for(mode_); }
    /// Maps the model can score: sub-model keys, the pool for OHE models,
    /// empty (any map) for map-agnostic models.
    std::vector<std::string> maps() const;
    bool accepts_map(std::string_view map) const;

    /// Sub-model for `map` (per-map mode) or the single classifier.
    const Classifier& classifier(std::string_view map = {}) const;
    const std::map<std::string, Classifier>& sub_models() const noexcept { return sub_models_; }
    /// Copy with one classifier replaced.
    TrainedModel with_classifier(std::string_view map, Classifier classifier) const;

    const nlohmann::json& metadata() const noexcept { return metadata_; }
    /// Family, mode and a digest of the parameters.
    const std::string& model_id() const noexcept { return model_id_; }

    std::string serialize() const;
    static TrainedModel deserialize(std::string_view text);
    void save(const std::filesystem::path& path) const;
    /// Throws CorruptModelError or ModelVersionError.
    static TrainedModel load(const std::filesystem::path& path);

private:
    nlohmann::json payload() const;

    ModelFamily family_;
    EncodingMode mode_;
    std::map<std::string, Classifier> sub_models_;  // key "" for single-model modes
    nlohmann::json metadata_;
    std::string model_id_;
};

struct TrainOptions {
    ModelFamily family = ModelFamily::Gbtree;
    EncodingMode mode = EncodingMode::OheMap;
    LogisticOptions logistic{};
    GbtreeParams gbtree{};
    NeuralParams neural{};
    int jobs = 1;

    /// Hyperparameters of the selected family.
    nlohmann::json hyperparameters() const;
};

/// Trains one model. Per-map mode fits an independent classifier for every
/// map present in `train` and requires validation rounds for each such map
/// (gbtree, neural). Metadata records hyperparameters, stopping iterations
/// and data fingerprints.
TrainedModel train_model(std::span<const LabeledRound> train, std::span<const LabeledRound> val,
                         const TrainOptions& options);

/// Continues training a map-agnostic neural model on new data; the input
/// model is not modified. Throws SchemaMismatch for other families or modes.
TrainedModel fine_tune_neural(const TrainedModel& model, std::span<const LabeledRound> train,
                              std::span<const LabeledRound> val, double learning_rate,
                              const NeuralParams& params = {});

}  // namespace econoscope
