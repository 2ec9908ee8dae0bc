#include "econoscope/models/neural.hpp"

#include "econoscope/errors.hpp"
#include "econoscope/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace econoscope {

void NeuralParams::validate() const {
    if (hidden1 < 1 || hidden2 < 1) throw std::invalid_argument("neural: hidden sizes must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("neural: dropout must lie in [0, 1)");
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("neural: learning_rate must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("neural: batch_size must be >= 1");
    if (max_epochs < 0) throw std::invalid_argument("neural: max_epochs must be >= 0");
    if (patience < 1) throw std::invalid_argument("neural: patience must be >= 1");
}

nlohmann::json NeuralParams::to_json() const {
    return {{"hidden1", hidden1},     {"hidden2", hidden2},       {"dropout", dropout},
            {"learning_rate", learning_rate}, {"batch_size", batch_size}, {"max_epochs", max_epochs},
            {"patience", patience},   {"beta1", beta1},           {"beta2", beta2},
            {"epsilon", epsilon},     {"seed", seed}};
}

NeuralParams NeuralParams::from_json(const nlohmann::json& j) {
    NeuralParams p;
    p.hidden1 = j.value("hidden1", p.hidden1);
    p.hidden2 = j.value("hidden2", p.hidden2);
    p.dropout = j.value("dropout", p.dropout);
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.batch_size = j.value("batch_size", p.batch_size);
    p.max_epochs = j.value("max_epochs", p.max_epochs);
    p.patience = j.value("patience", p.patience);
    p.beta1 = j.value("beta1", p.beta1);
    p.beta2 = j.value("beta2", p.beta2);
    p.epsilon = j.value("epsilon", p.epsilon);
    p.seed = j.value("seed", p.seed);
    return p;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

struct Shape {
    Eigen::Index d, h1, h2;

    std::size_t w1() const { return 0; }
    std::size_t b1() const { return w1() + static_cast<std::size_t>(h1 * d); }
    std::size_t w2() const { return b1() + static_cast<std::size_t>(h1); }
    std::size_t b2() const { return w2() + static_cast<std::size_t>(h2 * h1); }
    std::size_t w3() const { return b2() + static_cast<std::size_t>(h2); }
    std::size_t b3() const { return w3() + static_cast<std::size_t>(kNumOutcomes * h2); }
    std::size_t total() const { return b3() + kNumOutcomes; }
};

// Dropout keep-masks (already divided by the keep probability), or empty
// for inference.
struct Masks {
    RowMatrix m1, m2;
};

struct Forward {
    RowMatrix z1, a1, z2, a2, p;
    double loss = 0.0;  // mean cross-entropy
};

Forward forward(const Shape& s, const std::vector<double>& w, const RowMatrix& x, const std::uint8_t* y,
                const Masks* masks) {
    const double* base = w.data();
    const ConstMatrixMap w1(base + s.w1(), s.h1, s.d);
    const ConstVectorMap b1(base + s.b1(), s.h1);
    const ConstMatrixMap w2(base + s.w2(), s.h2, s.h1);
    const ConstVectorMap b2(base + s.b2(), s.h2);
    const ConstMatrixMap w3(base + s.w3(), kNumOutcomes, s.h2);
    const ConstVectorMap b3(base + s.b3(), kNumOutcomes);

    Forward f;
    f.z1.noalias() = x * w1.transpose();
    f.z1.rowwise() += b1.transpose();
    f.a1 = f.z1.cwiseMax(0.0);
    if (masks) f.a1.array() *= masks->m1.array();
    f.z2.noalias() = f.a1 * w2.transpose();
    f.z2.rowwise() += b2.transpose();
    f.a2 = f.z2.cwiseMax(0.0);
    if (masks) f.a2.array() *= masks->m2.array();
    f.p.noalias() = f.a2 * w3.transpose();
    f.p.rowwise() += b3.transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < f.p.rows(); ++i) {
        const double m = f.p.row(i).maxCoeff();
        const double label_logit = y ? f.p(i, y[i]) - m : 0.0;
        auto row = f.p.row(i);
        row.array() = (row.array() - m).exp();
        const double sum = row.sum();
        if (y) loss += std::log(sum) - label_logit;
        row /= sum;
    }
    f.loss = f.p.rows() ? loss / static_cast<double>(f.p.rows()) : 0.0;
    return f;
}

void backward(const Shape& s, const std::vector<double>& w, const RowMatrix& x, const std::uint8_t* y,
              const Masks* masks, const Forward& f, std::vector<double>& grad) {
    const double* base = w.data();
    const ConstMatrixMap w2(base + s.w2(), s.h2, s.h1);
    const ConstMatrixMap w3(base + s.w3(), kNumOutcomes, s.h2);
    grad.assign(s.total(), 0.0);
    double* g = grad.data();
    MatrixMap gw1(g + s.w1(), s.h1, s.d);
    VectorMap gb1(g + s.b1(), s.h1);
    MatrixMap gw2(g + s.w2(), s.h2, s.h1);
    VectorMap gb2(g + s.b2(), s.h2);
    MatrixMap gw3(g + s.w3(), kNumOutcomes, s.h2);
    VectorMap gb3(g + s.b3(), kNumOutcomes);

    const double inv_n = 1.0 / static_cast<double>(x.rows());
    RowMatrix dz3 = f.p;
    for (Eigen::Index i = 0; i < dz3.rows(); ++i) dz3(i, y[i]) -= 1.0;
    dz3 *= inv_n;
    gw3.noalias() = dz3.transpose() * f.a2;
    gb3 = dz3.colwise().sum().transpose();

    RowMatrix dz2 = dz3 * w3;
    dz2.array() *= (f.z2.array() > 0.0).cast<double>();
    if (masks) dz2.array() *= masks->m2.array();
    gw2.noalias() = dz2.transpose() * f.a1;
    gb2 = dz2.colwise().sum().transpose();

    RowMatrix dz1 = dz2 * w2;
    dz1.array() *= (f.z1.array() > 0.0).cast<double>();
    if (masks) dz1.array() *= masks->m1.array();
    gw1.noalias() = dz1.transpose() * x;
    gb1 = dz1.colwise().sum().transpose();
}

RowMatrix standardized(const Dataset& data, const Standardizer& s) {
    RowMatrix x(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(data.n_features));
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < data.n_features; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.apply(j, row[j]);
        }
    }
    return x;
}

double clipped_mean_loss(const RowMatrix& p, const std::vector<std::uint8_t>& y) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        sum += clipped_log_loss({p(i, 0), p(i, 1), p(i, 2)}, y[static_cast<std::size_t>(i)]);
    }
    return p.rows() ? sum / static_cast<double>(p.rows()) : 0.0;
}

void fill_mask(RowMatrix& m, Eigen::Index rows, Eigen::Index cols, double dropout, Rng& rng) {
    m.resize(rows, cols);
    const double keep = 1.0 - dropout;
    const double scale = 1.0 / keep;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform() < keep ? scale : 0.0;
    }
}

}  // namespace

NeuralNet::NeuralNet(std::size_t n_features, int hidden1, int hidden2, std::uint64_t seed)
    : n_features_(n_features), hidden1_(hidden1), hidden2_(hidden2),
      standardizer_(Standardizer::identity(n_features)) {
    if (n_features == 0 || hidden1 < 1 || hidden2 < 1) throw std::invalid_argument("NeuralNet: bad shape");
    const Shape s{static_cast<Eigen::Index>(n_features), hidden1, hidden2};
    params_.assign(s.total(), 0.0);
    Rng rng = Rng::derive(seed, 0x6e6e);
    auto init = [&](std::size_t offset, Eigen::Index rows, Eigen::Index fan_in) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
        for (Eigen::Index k = 0; k < rows * fan_in; ++k) {
            params_[offset + static_cast<std::size_t>(k)] = (2.0 * rng.uniform() - 1.0) * limit;
        }
    };
    init(s.w1(), s.h1, s.d);
    init(s.w2(), s.h2, s.h1);
    init(s.w3(), kNumOutcomes, s.h2);
}

NeuralNet NeuralNet::fit(const Dataset& train, const Dataset& val, const NeuralParams& params, FitHistory* history) {
    params.validate();
    if (train.empty() || val.empty()) throw TrainingError("neural: empty training or validation set");
    NeuralNet net(train.n_features, params.hidden1, params.hidden2, params.seed);
    std::vector<std::size_t> all(train.n_features);
    std::iota(all.begin(), all.end(), std::size_t{0});
    net.standardizer_ = Standardizer::fit(train, all);
    return net.train_from(train, val, params, history);
}

NeuralNet NeuralNet::fine_tune(const Dataset& train, const Dataset& val, const NeuralParams& params,
                               FitHistory* history) const {
    params.validate();
    if (train.empty() || val.empty()) throw TrainingError("neural fine-tune: empty training or validation set");
    return train_from(train, val, params, history);
}

NeuralNet NeuralNet::train_from(const Dataset& train, const Dataset& val, const NeuralParams& params,
                                FitHistory* history) const {
    if (train.n_features != n_features_ || val.n_features != n_features_) {
        throw SchemaMismatch("neural: network expects " + std::to_string(n_features_) + " features, data has " +
                             std::to_string(train.n_features));
    }
    const Shape s{static_cast<Eigen::Index>(n_features_), hidden1_, hidden2_};
    const RowMatrix x = standardized(train, standardizer_);
    const RowMatrix xv = standardized(val, standardizer_);

    NeuralNet best = *this;
    std::vector<double> w = params_;
    std::vector<double> m(w.size(), 0.0), v(w.size(), 0.0), grad;

    FitHistory local;
    FitHistory& hist = history ? *history : local;
    hist = {};
    hist.train_loss.push_back(forward(s, w, x, train.y.data(), nullptr).loss);
    double best_loss = clipped_mean_loss(forward(s, w, xv, nullptr, nullptr).p, val.y);
    hist.val_loss.push_back(best_loss);
    hist.best_iteration = 0;

    const auto n = static_cast<std::size_t>(x.rows());
    const auto batch = static_cast<std::size_t>(params.batch_size);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    RowMatrix xb;
    std::vector<std::uint8_t> yb;
    Masks masks;
    long step = 0;

    for (int epoch = 1; epoch <= params.max_epochs; ++epoch) {
        Rng rng = Rng::derive(params.seed, static_cast<std::uint64_t>(epoch));
        shuffle(std::span<std::uint32_t>(order), rng);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
            const std::size_t rows = std::min(batch, n - start);
            xb.resize(static_cast<Eigen::Index>(rows), s.d);
            yb.resize(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                xb.row(static_cast<Eigen::Index>(r)) = x.row(order[start + r]);
                yb[r] = train.y[order[start + r]];
            }
            const Masks* mp = nullptr;
            if (params.dropout > 0.0) {
                fill_mask(masks.m1, static_cast<Eigen::Index>(rows), s.h1, params.dropout, rng);
                fill_mask(masks.m2, static_cast<Eigen::Index>(rows), s.h2, params.dropout, rng);
                mp = &masks;
            }
            const Forward f = forward(s, w, xb, yb.data(), mp);
            if (!std::isfinite(f.loss)) {
                throw TrainingError("neural: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index));
            }
            epoch_loss += f.loss * static_cast<double>(rows);
            backward(s, w, xb, yb.data(), mp, f, grad);
            ++step;
            const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < w.size(); ++k) {
                m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * grad[k];
                v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * grad[k] * grad[k];
                w[k] -= params.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + params.epsilon);
            }
        }
        hist.train_loss.push_back(epoch_loss / static_cast<double>(n));
        const double vl = clipped_mean_loss(forward(s, w, xv, nullptr, nullptr).p, val.y);
        if (!std::isfinite(vl)) {
            throw TrainingError("neural: non-finite validation loss at epoch " + std::to_string(epoch));
        }
        hist.val_loss.push_back(vl);
        if (vl < best_loss) {
            best_loss = vl;
            best.params_ = w;
            hist.best_iteration = epoch;
        } else if (epoch - hist.best_iteration >= params.patience) {
            break;
        }
    }
    return best;
}

Probabilities NeuralNet::predict(std::span<const double> row) const {
    if (row.size() != n_features_) {
        throw SchemaMismatch("neural model expects " + std::to_string(n_features_) + " features, got " +
                             std::to_string(row.size()));
    }
    const Shape s{static_cast<Eigen::Index>(n_features_), hidden1_, hidden2_};
    RowMatrix x(1, s.d);
    for (std::size_t j = 0; j < n_features_; ++j) x(0, static_cast<Eigen::Index>(j)) = standardizer_.apply(j, row[j]);
    const Forward f = forward(s, params_, x, nullptr, nullptr);
    return {f.p(0, 0), f.p(0, 1), f.p(0, 2)};
}

double NeuralNet::loss(const Dataset& data, std::vector<double>* gradient) const {
    if (data.n_features != n_features_) throw SchemaMismatch("neural loss: feature width mismatch");
    if (data.empty()) throw std::invalid_argument("neural loss: empty dataset");
    const Shape s{static_cast<Eigen::Index>(n_features_), hidden1_, hidden2_};
    const RowMatrix x = standardized(data, standardizer_);
    const Forward f = forward(s, params_, x, data.y.data(), nullptr);
    if (gradient) backward(s, params_, x, data.y.data(), nullptr, f, *gradient);
    return f.loss;
}

std::vector<double> NeuralNet::parameters() const { return params_; }

void NeuralNet::set_parameters(std::span<const double> params) {
    if (params.size() != params_.size()) throw std::invalid_argument("NeuralNet::set_parameters: wrong parameter count");
    std::copy(params.begin(), params.end(), params_.begin());
}

nlohmann::json NeuralNet::to_json() const {
    return {{"n_features", n_features_}, {"hidden1", hidden1_},        {"hidden2", hidden2_},
            {"mean", standardizer_.mean}, {"scale", standardizer_.scale}, {"parameters", params_}};
}

NeuralNet NeuralNet::from_json(const nlohmann::json& j) {
    NeuralNet net;
    net.n_features_ = j.at("n_features").get<std::size_t>();
    net.hidden1_ = j.at("hidden1").get<int>();
    net.hidden2_ = j.at("hidden2").get<int>();
    net.standardizer_.mean = j.at("mean").get<std::vector<double>>();
    net.standardizer_.scale = j.at("scale").get<std::vector<double>>();
    net.params_ = j.at("parameters").get<std::vector<double>>();
    if (net.hidden1_ < 1 || net.hidden2_ < 1) throw CorruptModelError("neural payload: bad hidden sizes");
    const Shape s{static_cast<Eigen::Index>(net.n_features_), net.hidden1_, net.hidden2_};
    if (net.standardizer_.mean.size() != net.n_features_ || net.standardizer_.scale.size() != net.n_features_ ||
        net.params_.size() != s.total()) {
        throw CorruptModelError("neural payload: inconsistent parameter shapes");
    }
    return net;
}

}  // namespace econoscope
