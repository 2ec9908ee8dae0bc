#pragma once

#include "econoscope/models/common.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>

namespace econoscope {

struct NeuralParams {
    int hidden1 = 64;
    int hidden2 = 32;
    double dropout = 0.2;
    double learning_rate = 1e-3;
    int batch_size = 512;
    int max_epochs = 500;
    /// Epochs without validation improvement before stopping.
    int patience = 10;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static NeuralParams from_json(const nlohmann::json& j);
};

/// input -> dense+ReLU+dropout -> dense+ReLU+dropout -> dense(3)+softmax,
/// on inputs standardized with training-set statistics.
class NeuralNet {
public:
    NeuralNet() = default;
    /// He-initialized network with an identity standardizer.
    NeuralNet(std::size_t n_features, int hidden1, int hidden2, std::uint64_t seed);

    /// Adam on mini-batches with early stopping on `val`; the returned
    /// weights are those of the best validation epoch (epoch 0 being the
    /// initial weights). Throws TrainingError on a non-finite loss.
    static NeuralNet fit(const Dataset& train, const Dataset& val, const NeuralParams& params,
                         FitHistory* history = nullptr);

    /// Continues training a copy from the current weights and standardizer
    /// with a fresh optimizer state. params.hidden1/hidden2 are ignored.
    NeuralNet fine_tune(const Dataset& train, const Dataset& val, const NeuralParams& params,
                        FitHistory* history = nullptr) const;

    Probabilities predict(std::span<const double> row) const;

    /// Mean cross-entropy without dropout; writes the gradient with respect
    /// to parameters() when `gradient` is non-null.
    double loss(const Dataset& data, std::vector<double>* gradient = nullptr) const;

    /// W1, b1, W2, b2, W3, b3 flattened (weights row-major, output x input).
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> params);

    std::size_t n_features() const noexcept { return n_features_; }
    int hidden1() const noexcept { return hidden1_; }
    int hidden2() const noexcept { return hidden2_; }
    const Standardizer& standardizer() const noexcept { return standardizer_; }

    nlohmann::json to_json() const;
    static NeuralNet from_json(const nlohmann::json& j);

private:
    NeuralNet train_from(const Dataset& train, const Dataset& val, const NeuralParams& params,
                         FitHistory* history) const;

    std::size_t n_features_ = 0;
    int hidden1_ = 0;
    int hidden2_ = 0;
    Standardizer standardizer_;
    std::vector<double> params_;
};

}  // namespace econoscope
