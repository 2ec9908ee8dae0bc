#include "econoscope/ingest.hpp"
#include "econoscope/models/model.hpp"
#include "econoscope/simgen.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace econoscope;

const std::vector<LabeledRound>& corpus() {
    static const std::vector<LabeledRound> rounds = [] {
        CorpusConfig config;
        config.n_games = 300;
        config.sim.rng_seed = 5;
        const auto records = generate_corpus(config);
        return derive_labels(records, collect_game_results(records));
    }();
    return rounds;
}

std::span<const LabeledRound> train_part() { return std::span(corpus()).first(corpus().size() * 4 / 5); }
std::span<const LabeledRound> val_part() { return std::span(corpus()).subspan(corpus().size() * 4 / 5); }

const TrainedModel& fitted(ModelFamily family) {
    static std::map<ModelFamily, TrainedModel> cache;
    auto it = cache.find(family);
    if (it == cache.end()) {
        TrainOptions o;
        o.family = family;
        o.mode = EncodingMode::OheMap;
        o.gbtree.max_rounds = 100;
        o.neural.max_epochs = 20;
        it = cache.emplace(family, train_model(train_part(), val_part(), o)).first;
    }
    return it->second;
}

void BM_Predict(benchmark::State& state) {
    const auto family = static_cast<ModelFamily>(state.range(0));
    const TrainedModel& model = fitted(family);
    state.SetLabel(std::string(to_string(family)));
    const auto rounds = val_part();
    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.predict(rounds[i].state));
        i = (i + 1) % rounds.size();
    }
}
BENCHMARK(BM_Predict)
    ->Arg(static_cast<int>(ModelFamily::Logistic))
    ->Arg(static_cast<int>(ModelFamily::Gbtree))
    ->Arg(static_cast<int>(ModelFamily::Neural));

void BM_GbtreeFit(benchmark::State& state) {
    const Dataset train = make_dataset(train_part(), FeatureLayout::WithMap);
    GbtreeParams params;
    params.max_rounds = static_cast<int>(state.range(0));
    params.early_stopping_rounds = 0;
    params.max_depth = 6;
    for (auto _ : state) benchmark::DoNotOptimize(BoostedTrees::fit(train, nullptr, params));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(train.size()) * params.max_rounds);
}
BENCHMARK(BM_GbtreeFit)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_NeuralEpoch(benchmark::State& state) {
    const Dataset train = make_dataset(train_part(), FeatureLayout::WithMap);
    const Dataset val = make_dataset(val_part(), FeatureLayout::WithMap);
    NeuralParams params;
    params.max_epochs = 1;
    for (auto _ : state) benchmark::DoNotOptimize(NeuralNet::fit(train, val, params));
}
BENCHMARK(BM_NeuralEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
