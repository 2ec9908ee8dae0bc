#include "econoscope/models/gbtree.hpp"

#include "econoscope/errors.hpp"
#include "econoscope/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace econoscope {

void GbtreeParams::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("gbtree: learning_rate must be > 0");
    if (max_depth < 1) throw std::invalid_argument("gbtree: max_depth must be >= 1");
    if (!(min_child_weight >= 0.0)) throw std::invalid_argument("gbtree: min_child_weight must be >= 0");
    if (!(colsample_per_level > 0.0 && colsample_per_level <= 1.0)) {
        throw std::invalid_argument("gbtree: colsample_per_level must lie in (0, 1]");
    }
    if (!(lambda >= 0.0)) throw std::invalid_argument("gbtree: lambda must be >= 0");
    if (max_rounds < 1) throw std::invalid_argument("gbtree: max_rounds must be >= 1");
    if (early_stopping_rounds < 0) throw std::invalid_argument("gbtree: early_stopping_rounds must be >= 0");
}

nlohmann::json GbtreeParams::to_json() const {
    return {{"learning_rate", learning_rate},
            {"max_depth", max_depth},
            {"min_child_weight", min_child_weight},
            {"colsample_per_level", colsample_per_level},
            {"lambda", lambda},
            {"max_rounds", max_rounds},
            {"early_stopping_rounds", early_stopping_rounds},
            {"seed", seed}};
}

GbtreeParams GbtreeParams::from_json(const nlohmann::json& j) {
    GbtreeParams p;
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.max_depth = j.value("max_depth", p.max_depth);
    p.min_child_weight = j.value("min_child_weight", p.min_child_weight);
    p.colsample_per_level = j.value("colsample_per_level", p.colsample_per_level);
    p.lambda = j.value("lambda", p.lambda);
    p.max_rounds = j.value("max_rounds", p.max_rounds);
    p.early_stopping_rounds = j.value("early_stopping_rounds", p.early_stopping_rounds);
    p.seed = j.value("seed", p.seed);
    return p;
}

namespace {

double tree_value(const BoostedTrees::Tree& tree, std::span<const double> row) {
    int n = 0;
    while (tree[static_cast<std::size_t>(n)].feature >= 0) {
        const auto& node = tree[static_cast<std::size_t>(n)];
        n = row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
    }
    return tree[static_cast<std::size_t>(n)].value;
}

// Column-major copy of the training features with each column's row order
// sorted by value.
struct SortedColumns {
    std::size_t n_rows = 0;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::uint32_t>> order;

    explicit SortedColumns(const Dataset& data) : n_rows(data.size()) {
        values.resize(data.n_features);
        order.resize(data.n_features);
        for (std::size_t j = 0; j < data.n_features; ++j) {
            auto& col = values[j];
            col.resize(n_rows);
            for (std::size_t i = 0; i < n_rows; ++i) col[i] = data.x[i * data.n_features + j];
            auto& ord = order[j];
            ord.resize(n_rows);
            std::iota(ord.begin(), ord.end(), 0u);
            std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
        }
    }
};

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct TreeBuilder {
    const SortedColumns& cols;
    const GbtreeParams& params;
    std::vector<int> node_of_row;

    // Grows one tree on gradients g and hessians h; leaves node_of_row at
    // each row's leaf.
    BoostedTrees::Tree grow(std::span<const double> g, std::span<const double> h, Rng& rng) {
        const std::size_t n = cols.n_rows;
        const std::size_t n_features = cols.values.size();
        node_of_row.assign(n, 0);
        BoostedTrees::Tree tree(1);
        std::vector<double> node_g{0.0};
        std::vector<double> node_h{0.0};
        for (std::size_t i = 0; i < n; ++i) {
            node_g[0] += g[i];
            node_h[0] += h[i];
        }

        std::vector<int> frontier{0};
        std::vector<int> slot_of(1, 0);
        std::vector<std::size_t> features(n_features);
        const auto n_sample = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::floor(params.colsample_per_level * static_cast<double>(n_features))));

        for (int depth = 0; depth < params.max_depth && !frontier.empty(); ++depth) {
            std::iota(features.begin(), features.end(), std::size_t{0});
            if (n_sample < n_features) {
                for (std::size_t k = 0; k < n_sample; ++k) {
                    const auto r = k + static_cast<std::size_t>(rng.below(n_features - k));
                    std::swap(features[k], features[r]);
                }
                std::sort(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(n_sample));
            }

            const std::size_t slots = frontier.size();
            std::vector<SplitCandidate> best(slots);
            std::vector<double> gl(slots), hl(slots), last(slots);
            std::vector<char> seen(slots);
            for (std::size_t f = 0; f < n_sample; ++f) {
                const std::size_t j = features[f];
                const auto& col = cols.values[j];
                std::fill(gl.begin(), gl.end(), 0.0);
                std::fill(hl.begin(), hl.end(), 0.0);
                std::fill(seen.begin(), seen.end(), 0);
                for (std::uint32_t i : cols.order[j]) {
                    const int slot = slot_of[static_cast<std::size_t>(node_of_row[i])];
                    if (slot < 0) continue;
                    const auto s = static_cast<std::size_t>(slot);
                    const double v = col[i];
                    if (seen[s] && v != last[s]) {
                        const int node = frontier[s];
                        const double gt = node_g[static_cast<std::size_t>(node)];
                        const double ht = node_h[static_cast<std::size_t>(node)];
                        const double hr = ht - hl[s];
                        if (hl[s] >= params.min_child_weight && hr >= params.min_child_weight) {
                            const double gr = gt - gl[s];
                            const double gain = gl[s] * gl[s] / (hl[s] + params.lambda) +
                                                gr * gr / (hr + params.lambda) - gt * gt / (ht + params.lambda);
                            if (gain > best[s].gain) {
                                double thr = last[s] + (v - last[s]) * 0.5;
                                if (!(thr > last[s])) thr = v;
                                best[s] = {gain, static_cast<int>(j), thr};
                            }
                        }
                    }
                    seen[s] = 1;
                    last[s] = v;
                    gl[s] += g[i];
                    hl[s] += h[i];
                }
            }

            // Materialize the splits found at this level.
            std::vector<int> next_frontier;
            std::vector<std::pair<int, int>> children(slots, {-1, -1});
            for (std::size_t s = 0; s < slots; ++s) {
                const int node = frontier[s];
                slot_of[static_cast<std::size_t>(node)] = -1;
                if (best[s].feature < 0 || !(best[s].gain > 1e-12)) continue;
                const int left = static_cast<int>(tree.size());
                tree.push_back({});
                tree.push_back({});
                node_g.resize(tree.size(), 0.0);
                node_h.resize(tree.size(), 0.0);
                auto& parent = tree[static_cast<std::size_t>(node)];
                parent.feature = best[s].feature;
                parent.threshold = best[s].threshold;
                parent.left = left;
                parent.right = left + 1;
                children[s] = {left, left + 1};
                next_frontier.push_back(left);
                next_frontier.push_back(left + 1);
            }
            if (next_frontier.empty()) break;
            std::vector<int> split_slot(tree.size(), -1);
            for (std::size_t s = 0; s < slots; ++s) {
                if (children[s].first >= 0) split_slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
            }
            for (std::size_t i = 0; i < n; ++i) {
                const int node = node_of_row[i];
                if (static_cast<std::size_t>(node) >= split_slot.size() || split_slot[static_cast<std::size_t>(node)] < 0) {
                    continue;
                }
                const auto& parent = tree[static_cast<std::size_t>(node)];
                const int child = cols.values[static_cast<std::size_t>(parent.feature)][i] < parent.threshold
                                      ? parent.left
                                      : parent.right;
                node_of_row[i] = child;
                node_g[static_cast<std::size_t>(child)] += g[i];
                node_h[static_cast<std::size_t>(child)] += h[i];
            }
            frontier = std::move(next_frontier);
            slot_of.assign(tree.size(), -1);
            for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
        }

        for (std::size_t k = 0; k < tree.size(); ++k) {
            if (tree[k].feature < 0) {
                tree[k].value = -node_g[k] / (node_h[k] + params.lambda) * params.learning_rate;
            }
        }
        return tree;
    }
};

double mean_loss(const std::vector<double>& margins, const std::vector<std::uint8_t>& y) {
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const Probabilities p = softmax({margins[i * 3], margins[i * 3 + 1], margins[i * 3 + 2]});
        sum += clipped_log_loss(p, y[i]);
    }
    return y.empty() ? 0.0 : sum / static_cast<double>(y.size());
}

}  // namespace

BoostedTrees BoostedTrees::fit(const Dataset& train, const Dataset* val, const GbtreeParams& params,
                               FitHistory* history) {
    params.validate();
    if (train.empty()) throw TrainingError("gbtree: empty training set");
    if (val && val->n_features != train.n_features) throw SchemaMismatch("gbtree: train/validation width mismatch");
    if (val && val->empty()) throw TrainingError("gbtree: empty validation set");

    BoostedTrees model;
    model.n_features_ = train.n_features;
    model.params_ = params;

    const std::size_t n = train.size();
    const SortedColumns cols(train);
    TreeBuilder builder{cols, params, {}};
    std::vector<double> margins(n * kNumOutcomes, 0.0);
    std::vector<double> val_margins(val ? val->size() * kNumOutcomes : 0, 0.0);
    std::vector<double> g(n), h(n);

    FitHistory local;
    FitHistory& hist = history ? *history : local;
    hist = {};
    double best_loss = std::numeric_limits<double>::infinity();
    int best_round = -1;
    const bool early_stop = val && params.early_stopping_rounds > 0;

    for (int round = 0; round < params.max_rounds; ++round) {
        std::vector<Probabilities> probs(n);
        for (std::size_t i = 0; i < n; ++i) probs[i] = softmax({margins[i * 3], margins[i * 3 + 1], margins[i * 3 + 2]});
        for (std::size_t c = 0; c < kNumOutcomes; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs[i][c];
                g[i] = p - (train.y[i] == c ? 1.0 : 0.0);
                h[i] = std::max(2.0 * p * (1.0 - p), 1e-16);
            }
            Rng rng = Rng::derive(params.seed, static_cast<std::uint64_t>(round) * kNumOutcomes + c);
            Tree tree = builder.grow(g, h, rng);
            for (std::size_t i = 0; i < n; ++i) {
                margins[i * 3 + c] += tree[static_cast<std::size_t>(builder.node_of_row[i])].value;
            }
            if (val) {
                for (std::size_t i = 0; i < val->size(); ++i) val_margins[i * 3 + c] += tree_value(tree, val->row(i));
            }
            model.trees_.push_back(std::move(tree));
        }
        hist.train_loss.push_back(mean_loss(margins, train.y));
        if (val) {
            const double vl = mean_loss(val_margins, val->y);
            hist.val_loss.push_back(vl);
            if (vl < best_loss) {
                best_loss = vl;
                best_round = round;
            } else if (early_stop && round - best_round >= params.early_stopping_rounds) {
                break;
            }
        }
    }
    if (early_stop && best_round >= 0) {
        model.trees_.resize(static_cast<std::size_t>(best_round + 1) * kNumOutcomes);
        hist.best_iteration = best_round;
    } else {
        hist.best_iteration = model.rounds() - 1;
    }
    return model;
}

Probabilities BoostedTrees::predict(std::span<const double> row) const {
    if (row.size() != n_features_) {
        throw SchemaMismatch("gbtree model expects " + std::to_string(n_features_) + " features, got " +
                             std::to_string(row.size()));
    }
    std::array<double, kNumOutcomes> margins{};
    for (std::size_t t = 0; t < trees_.size(); ++t) margins[t % kNumOutcomes] += tree_value(trees_[t], row);
    return softmax(margins);
}

nlohmann::json BoostedTrees::to_json() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& tree : trees_) {
        nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                       left = nlohmann::json::array(), right = nlohmann::json::array(),
                       value = nlohmann::json::array();
        for (const auto& node : tree) {
            feature.push_back(node.feature);
            threshold.push_back(node.threshold);
            left.push_back(node.left);
            right.push_back(node.right);
            value.push_back(node.value);
        }
        trees.push_back({{"feature", feature}, {"threshold", threshold}, {"left", left}, {"right", right},
                         {"value", value}});
    }
    return {{"n_features", n_features_}, {"params", params_.to_json()}, {"trees", trees}};
}

BoostedTrees BoostedTrees::from_json(const nlohmann::json& j) {
    BoostedTrees m;
    m.n_features_ = j.at("n_features").get<std::size_t>();
    m.params_ = GbtreeParams::from_json(j.at("params"));
    for (const auto& t : j.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto value = t.at("value").get<std::vector<double>>();
        const std::size_t size = feature.size();
        if (size == 0 || threshold.size() != size || left.size() != size || right.size() != size ||
            value.size() != size) {
            throw CorruptModelError("gbtree payload: inconsistent tree arrays");
        }
        Tree tree(size);
        for (std::size_t k = 0; k < size; ++k) {
            tree[k] = {feature[k], threshold[k], left[k], right[k], value[k]};
            if (feature[k] >= 0) {
                const auto lo = static_cast<int>(k);
                const auto hi = static_cast<int>(size);
                if (static_cast<std::size_t>(feature[k]) >= m.n_features_ || left[k] <= lo || left[k] >= hi ||
                    right[k] <= lo || right[k] >= hi) {
                    throw CorruptModelError("gbtree payload: malformed node");
                }
            }
        }
        m.trees_.push_back(std::move(tree));
    }
    if (m.trees_.size() % kNumOutcomes != 0) throw CorruptModelError("gbtree payload: incomplete boosting round");
    return m;
}

}  // namespace econoscope
