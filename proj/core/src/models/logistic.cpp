#include "econoscope/models/logistic.hpp"

#include "econoscope/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace econoscope {

std::string_view to_string(FeatureSubset subset) noexcept {
    return subset == FeatureSubset::ScoresOnly ? "scores_only" : "full";
}

std::optional<FeatureSubset> parse_feature_subset(std::string_view text) noexcept {
    if (text == "scores_only" || text == "scores-only") return FeatureSubset::ScoresOnly;
    if (text == "full") return FeatureSubset::Full;
    return std::nullopt;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
constexpr Eigen::Index kClasses = kNumOutcomes;

std::vector<std::size_t> subset_columns(std::size_t n_features, FeatureSubset subset) {
    std::vector<std::size_t> cols;
    if (subset == FeatureSubset::ScoresOnly) {
        cols = {feature::kCtScore, feature::kTScore, feature::kScoreDiff};
    } else {
        for (std::size_t j = 0; j < n_features; ++j) cols.push_back(j);
    }
    return cols;
}

struct Problem {
    RowMatrix z;  // standardized design, N x k
    Eigen::MatrixXd y;  // one-hot labels, N x 3
    double l2 = 0.0;
};

Problem make_problem(const Dataset& data, const std::vector<std::size_t>& columns, const Standardizer& s,
                     double l2) {
    Problem p;
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto k = static_cast<Eigen::Index>(columns.size());
    p.z.resize(n, k);
    p.y = Eigen::MatrixXd::Zero(n, kNumOutcomes);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = data.row(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < k; ++j) {
            p.z(i, j) = s.apply(static_cast<std::size_t>(j), row[columns[static_cast<std::size_t>(j)]]);
        }
        p.y(i, data.y[static_cast<std::size_t>(i)]) = 1.0;
    }
    p.l2 = l2;
    return p;
}

double evaluate(const Problem& p, const Eigen::MatrixXd& w, const Eigen::Vector3d& b, Eigen::MatrixXd* gw,
                Eigen::Vector3d* gb) {
    const Eigen::Index n = p.z.rows();
    Eigen::MatrixXd logits = p.z * w.transpose();
    logits.rowwise() += b.transpose();
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double m = logits.row(i).maxCoeff();
        const Eigen::RowVector3d e = (logits.row(i).array() - m).exp();
        const double sum = e.sum();
        loss += m + std::log(sum) - logits.row(i).dot(p.y.row(i));
        logits.row(i) = e / sum;  // now probabilities
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss = loss * inv_n + 0.5 * p.l2 * w.squaredNorm();
    if (gw && gb) {
        const Eigen::MatrixXd g = (logits - p.y) * inv_n;
        *gw = g.transpose() * p.z + p.l2 * w;
        *gb = g.colwise().sum().transpose();
    }
    return loss;
}

}  // namespace

LogisticClassifier::LogisticClassifier(std::size_t n_features, FeatureSubset subset, double l2)
    : n_features_(n_features), subset_(subset), l2_(l2), columns_(subset_columns(n_features, subset)),
      standardizer_(Standardizer::identity(columns_.size())),
      weights_(kNumOutcomes * columns_.size(), 0.0) {
    if (n_features < feature::kBaseWidth) throw std::invalid_argument("LogisticClassifier: too few features");
}

LogisticClassifier LogisticClassifier::fit(const Dataset& train, const LogisticOptions& options) {
    if (train.empty()) throw TrainingError("logistic regression: empty training set");
    std::array<std::size_t, kNumOutcomes> counts{};
    for (auto label : train.y) ++counts[label];
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
        throw TrainingError("logistic regression: training set has a single outcome class");
    }

    LogisticClassifier model(train.n_features, options.subset, options.l2);
    model.standardizer_ = Standardizer::fit(train, model.columns_);
    const Problem problem = make_problem(train, model.columns_, model.standardizer_, options.l2);

    const auto k = static_cast<Eigen::Index>(model.columns_.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(kNumOutcomes, k);
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    Eigen::MatrixXd gw(kNumOutcomes, k);
    Eigen::Vector3d gb;
    double loss = evaluate(problem, w, b, &gw, &gb);
    double step = 1.0;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const double gmax = std::max(gw.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff());
        if (gmax < options.gradient_tolerance) {
            model.converged_ = true;
            break;
        }
        const double gnorm2 = gw.squaredNorm() + gb.squaredNorm();
        Eigen::MatrixXd w_next;
        Eigen::Vector3d b_next;
        double next = 0.0;
        while (true) {
            w_next = w - step * gw;
            b_next = b - step * gb;
            next = evaluate(problem, w_next, b_next, nullptr, nullptr);
            if (next <= loss - 0.5 * step * gnorm2 || step < 1e-20) break;
            step *= 0.5;
        }
        if (!std::isfinite(next)) throw TrainingError("logistic regression: non-finite loss at iteration " +
                                                      std::to_string(iter));
        w = std::move(w_next);
        b = b_next;
        loss = evaluate(problem, w, b, &gw, &gb);
        step = std::min(step * 2.0, 1e6);
    }
    model.iterations_ = iter;
    for (Eigen::Index c = 0; c < kClasses; ++c) {
        for (Eigen::Index j = 0; j < k; ++j) model.weights_[static_cast<std::size_t>(c * k + j)] = w(c, j);
        model.bias_[static_cast<std::size_t>(c)] = b(c);
    }
    return model;
}

Probabilities LogisticClassifier::predict(std::span<const double> row) const {
    if (row.size() != n_features_) {
        throw SchemaMismatch("logistic model expects " + std::to_string(n_features_) + " features, got " +
                             std::to_string(row.size()));
    }
    const std::size_t k = columns_.size();
    std::array<double, kNumOutcomes> logits = bias_;
    for (std::size_t j = 0; j < k; ++j) {
        const double z = standardizer_.apply(j, row[columns_[j]]);
        for (std::size_t c = 0; c < kNumOutcomes; ++c) logits[c] += weights_[c * k + j] * z;
    }
    return softmax(logits);
}

double LogisticClassifier::objective(const Dataset& data, std::vector<double>* gradient) const {
    if (data.n_features != n_features_) throw SchemaMismatch("logistic objective: feature width mismatch");
    if (data.empty()) throw std::invalid_argument("logistic objective: empty dataset");
    const Problem problem = make_problem(data, columns_, standardizer_, l2_);
    const auto k = static_cast<Eigen::Index>(columns_.size());
    Eigen::MatrixXd w(kNumOutcomes, k);
    Eigen::Vector3d b;
    for (Eigen::Index c = 0; c < kClasses; ++c) {
        for (Eigen::Index j = 0; j < k; ++j) w(c, j) = weights_[static_cast<std::size_t>(c * k + j)];
        b(c) = bias_[static_cast<std::size_t>(c)];
    }
    Eigen::MatrixXd gw(kNumOutcomes, k);
    Eigen::Vector3d gb;
    const double loss = evaluate(problem, w, b, gradient ? &gw : nullptr, gradient ? &gb : nullptr);
    if (gradient) {
        gradient->clear();
        for (Eigen::Index c = 0; c < kClasses; ++c) {
            for (Eigen::Index j = 0; j < k; ++j) gradient->push_back(gw(c, j));
        }
        for (Eigen::Index c = 0; c < kClasses; ++c) gradient->push_back(gb(c));
    }
    return loss;
}

std::vector<double> LogisticClassifier::parameters() const {
    std::vector<double> p = weights_;
    p.insert(p.end(), bias_.begin(), bias_.end());
    return p;
}

void LogisticClassifier::set_parameters(std::span<const double> params) {
    if (params.size() != weights_.size() + kNumOutcomes) {
        throw std::invalid_argument("LogisticClassifier::set_parameters: wrong parameter count");
    }
    std::copy(params.begin(), params.end() - kNumOutcomes, weights_.begin());
    std::copy(params.end() - kNumOutcomes, params.end(), bias_.begin());
}

nlohmann::json LogisticClassifier::to_json() const {
    return {{"n_features", n_features_},
            {"subset", to_string(subset_)},
            {"l2", l2_},
            {"columns", columns_},
            {"mean", standardizer_.mean},
            {"scale", standardizer_.scale},
            {"weights", weights_},
            {"bias", bias_},
            {"iterations", iterations_},
            {"converged", converged_}};
}

LogisticClassifier LogisticClassifier::from_json(const nlohmann::json& j) {
    LogisticClassifier m;
    m.n_features_ = j.at("n_features").get<std::size_t>();
    const auto subset = parse_feature_subset(j.at("subset").get<std::string>());
    if (!subset) throw CorruptModelError("logistic payload: unknown feature subset");
    m.subset_ = *subset;
    m.l2_ = j.at("l2").get<double>();
    m.columns_ = j.at("columns").get<std::vector<std::size_t>>();
    m.standardizer_.mean = j.at("mean").get<std::vector<double>>();
    m.standardizer_.scale = j.at("scale").get<std::vector<double>>();
    m.weights_ = j.at("weights").get<std::vector<double>>();
    m.bias_ = j.at("bias").get<std::array<double, kNumOutcomes>>();
    m.iterations_ = j.at("iterations").get<int>();
    m.converged_ = j.at("converged").get<bool>();
    const auto k = m.columns_.size();
    if (m.standardizer_.size() != k || m.standardizer_.scale.size() != k || m.weights_.size() != k * kNumOutcomes ||
        std::any_of(m.columns_.begin(), m.columns_.end(), [&](std::size_t c) { return c >= m.n_features_; })) {
        throw CorruptModelError("logistic payload: inconsistent parameter shapes");
    }
    return m;
}

}  // namespace econoscope
