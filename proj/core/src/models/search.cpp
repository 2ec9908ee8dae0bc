#include "econoscope/models/search.hpp"

#include "econoscope/evaluation.hpp"
#include "econoscope/parallel.hpp"
#include "econoscope/random.hpp"

#include <set>
#include <stdexcept>

namespace econoscope {

namespace {

template <typename T>
const T& pick(const std::vector<T>& values, std::size_t& index, const char* name) {
    if (values.empty()) throw std::invalid_argument(std::string("hyperparameter grid '") + name + "' is empty");
    const T& v = values[index % values.size()];
    index /= values.size();
    return v;
}

}  // namespace

std::size_t HyperparamSpace::size(ModelFamily family) const {
    switch (family) {
    case ModelFamily::Logistic: return 1;
    case ModelFamily::Gbtree:
        return gbtree_learning_rate.size() * gbtree_max_depth.size() * gbtree_min_child_weight.size() *
               gbtree_colsample_per_level.size();
    case ModelFamily::Neural:
        return neural_hidden1.size() * neural_hidden2.size() * neural_dropout.size() * neural_learning_rate.size();
    }
    return 0;
}

nlohmann::json HyperparamSpace::point(ModelFamily family, std::size_t index) const {
    const std::size_t n = size(family);
    if (n == 0) throw std::invalid_argument("hyperparameter grid is empty");
    if (index >= n) throw std::out_of_range("hyperparameter grid index out of range");
    switch (family) {
    case ModelFamily::Logistic: return nlohmann::json::object();
    case ModelFamily::Gbtree: {
        nlohmann::json p;
        p["learning_rate"] = pick(gbtree_learning_rate, index, "learning_rate");
        p["max_depth"] = pick(gbtree_max_depth, index, "max_depth");
        p["min_child_weight"] = pick(gbtree_min_child_weight, index, "min_child_weight");
        p["colsample_per_level"] = pick(gbtree_colsample_per_level, index, "colsample_per_level");
        return p;
    }
    case ModelFamily::Neural: {
        nlohmann::json p;
        p["hidden1"] = pick(neural_hidden1, index, "hidden1");
        p["hidden2"] = pick(neural_hidden2, index, "hidden2");
        p["dropout"] = pick(neural_dropout, index, "dropout");
        p["learning_rate"] = pick(neural_learning_rate, index, "learning_rate");
        return p;
    }
    }
    return {};
}

std::vector<std::size_t> sample_grid(std::size_t grid_size, int n_trials, std::uint64_t seed) {
    if (n_trials < 1) throw std::invalid_argument("random search needs n_trials >= 1");
    if (grid_size == 0) throw std::invalid_argument("random search over an empty grid");
    Rng rng = Rng::derive(seed, 0x5ea7c4);
    std::vector<std::size_t> out;
    std::set<std::size_t> used;
    for (int t = 0; t < n_trials; ++t) {
        if (used.size() == grid_size) used.clear();
        std::size_t idx = static_cast<std::size_t>(rng.below(grid_size));
        while (used.count(idx)) idx = static_cast<std::size_t>(rng.below(grid_size));
        used.insert(idx);
        out.push_back(idx);
    }
    return out;
}

TrainOptions with_point(TrainOptions base, const nlohmann::json& point) {
    switch (base.family) {
    case ModelFamily::Logistic: break;
    case ModelFamily::Gbtree:
        base.gbtree.learning_rate = point.value("learning_rate", base.gbtree.learning_rate);
        base.gbtree.max_depth = point.value("max_depth", base.gbtree.max_depth);
        base.gbtree.min_child_weight = point.value("min_child_weight", base.gbtree.min_child_weight);
        base.gbtree.colsample_per_level = point.value("colsample_per_level", base.gbtree.colsample_per_level);
        break;
    case ModelFamily::Neural:
        base.neural.hidden1 = point.value("hidden1", base.neural.hidden1);
        base.neural.hidden2 = point.value("hidden2", base.neural.hidden2);
        base.neural.dropout = point.value("dropout", base.neural.dropout);
        base.neural.learning_rate = point.value("learning_rate", base.neural.learning_rate);
        break;
    }
    return base;
}

nlohmann::json SearchResult::to_json() const {
    nlohmann::json trials_json = nlohmann::json::array();
    for (const auto& t : trials) {
        trials_json.push_back({{"trial", t.index},
                               {"grid_index", t.grid_index},
                               {"params", t.params},
                               {"val_loss", t.val_loss},
                               {"stopping_iteration", t.stopping_iteration}});
    }
    return {{"best_trial", best}, {"best_params", trials.empty() ? nlohmann::json() : trials[best].params},
            {"trials", trials_json}};
}

SearchResult random_search(const HyperparamSpace& space, int n_trials, std::span<const LabeledRound> train,
                           std::span<const LabeledRound> val, const SearchOptions& options) {
    const ModelFamily family = options.base.family;
    const auto indices = sample_grid(space.size(family), n_trials, options.seed);
    SearchResult result;
    result.trials.resize(indices.size());
    parallel_for(indices.size(), options.jobs, [&](std::size_t t) {
        Trial& trial = result.trials[t];
        trial.index = static_cast<int>(t);
        trial.grid_index = indices[t];
        trial.params = space.point(family, indices[t]);
        TrainOptions opts = with_point(options.base, trial.params);
        opts.gbtree.max_rounds = std::min(opts.gbtree.max_rounds, options.trial_max_rounds);
        opts.neural.max_epochs = std::min(opts.neural.max_epochs, options.trial_max_epochs);
        opts.jobs = options.jobs > 1 ? 1 : options.base.jobs;
        const TrainedModel model = train_model(train, val, opts);
        trial.val_loss = model_log_loss(model, val);
        trial.stopping_iteration = model.metadata().at("stopping_iteration");
    });
    for (std::size_t t = 1; t < result.trials.size(); ++t) {
        if (result.trials[t].val_loss < result.trials[result.best].val_loss) result.best = t;
    }
    return result;
}

}  // namespace econoscope
