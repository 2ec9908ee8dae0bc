#include "econoscope/config.hpp"
#include "econoscope/counterfactual.hpp"
#include "econoscope/errors.hpp"
#include "econoscope/evaluation.hpp"
#include "econoscope/features.hpp"
#include "econoscope/http_server.hpp"
#include "econoscope/ingest.hpp"
#include "econoscope/models/model.hpp"
#include "econoscope/models/search.hpp"
#include "econoscope/ose.hpp"
#include "econoscope/parallel.hpp"
#include "econoscope/service.hpp"
#include "econoscope/simgen.hpp"
#include "econoscope/text_table.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

namespace {

namespace fs = std::filesystem;
using namespace econoscope;
using ordered_json = nlohmann::ordered_json;

// Bad flag values or combinations; exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { Json, Text, Csv };

struct Common {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    fs::path out = ".";
    std::optional<std::string> format;
    int jobs = default_jobs();
};

struct SplitFlags {
    std::optional<std::string> train_end;
    std::optional<std::string> val_end;
    std::optional<std::string> test_end;
};

const std::set<std::string> kConfigSections{"economy", "sim",    "corpus", "split", "train", "gbtree",
                                            "neural",  "tune",   "transfer", "ose", "serve"};

std::string now_utc() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ConfigFile load_config(const Common& common) {
    if (!common.config) return {};
    auto cfg = ConfigFile::load(*common.config);
    for (const auto& [key, value] : cfg.values()) {
        const auto dot = key.find('.');
        if (dot == std::string::npos || !kConfigSections.count(key.substr(0, dot))) {
            std::cerr << "warning: " << *common.config << ": unknown key '" << key << "'\n";
        }
    }
    return cfg;
}

OutputFormat output_format(const Common& common, OutputFormat fallback, std::initializer_list<OutputFormat> allowed) {
    OutputFormat f = fallback;
    if (common.format) {
        if (*common.format == "json") f = OutputFormat::Json;
        else if (*common.format == "text") f = OutputFormat::Text;
        else f = OutputFormat::Csv;
    }
    if (std::find(allowed.begin(), allowed.end(), f) == allowed.end()) {
        throw UsageError("--format " + *common.format + " is not supported by this subcommand");
    }
    return f;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

template <typename T>
void set_int(const ConfigFile& cfg, const std::string& key, T& target) {
    if (auto v = cfg.get_int(key)) target = static_cast<T>(*v);
}

void set_double(const ConfigFile& cfg, const std::string& key, double& target) {
    if (auto v = cfg.get_double(key)) target = *v;
}

void print_warnings(const std::vector<std::string>& warnings) {
    constexpr std::size_t kShown = 20;
    for (std::size_t i = 0; i < warnings.size() && i < kShown; ++i) std::cerr << "warning: " << warnings[i] << "\n";
    if (warnings.size() > kShown) std::cerr << "warning: ... " << warnings.size() - kShown << " more\n";
}

std::vector<std::string> to_strings(const std::vector<IngestWarning>& warnings) {
    std::vector<std::string> out;
    for (const auto& w : warnings) out.push_back(w.to_string());
    return out;
}

Date flag_date(const std::string& flag, const std::string& text) {
    if (auto d = try_parse_date(text)) return *d;
    throw UsageError(flag + ": expected a YYYY-MM-DD date, got '" + text + "'");
}

// Manifest written by `ingest` next to its canonical rounds file.
const char* kManifestName = "split.json";

// A directory resolves to its canonical rounds file or a simulated corpus.
fs::path resolve_data(const fs::path& data) {
    if (!fs::is_directory(data)) {
        if (!fs::exists(data)) throw DataError("no such file: " + data.string());
        return data;
    }
    for (const char* name : {"rounds.jsonl", "rounds.csv", "corpus.jsonl", "corpus.csv"}) {
        if (fs::exists(data / name)) return data / name;
    }
    throw DataError(data.string() + " holds no rounds.jsonl, rounds.csv, corpus.jsonl or corpus.csv");
}

// Boundaries: defaults < config < ingest manifest beside the data < flags.
SplitBoundaries boundaries_for(const ConfigFile& cfg, const fs::path& data_file, const SplitFlags& flags) {
    SplitBoundaries b = SplitBoundaries::defaults();
    apply_config(cfg, b);
    const fs::path manifest = data_file.parent_path() / kManifestName;
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        nlohmann::json j;
        try {
            in >> j;
            const auto& jb = j.at("boundaries");
            b.train_end = parse_date(jb.at("train_end").get<std::string>());
            b.val_end = parse_date(jb.at("val_end").get<std::string>());
            b.test_end.reset();
            if (jb.contains("test_end") && !jb.at("test_end").is_null()) {
                b.test_end = parse_date(jb.at("test_end").get<std::string>());
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(manifest.string() + ": malformed split manifest: " + e.what());
        }
    }
    if (flags.train_end) b.train_end = flag_date("--train-end", *flags.train_end);
    if (flags.val_end) b.val_end = flag_date("--val-end", *flags.val_end);
    if (flags.test_end) b.test_end = flag_date("--test-end", *flags.test_end);
    return b;
}

struct LoadedData {
    fs::path file;
    DatasetSplit split;
};

LoadedData load_split(const fs::path& data, const ConfigFile& cfg, const SplitFlags& flags,
                      bool allow_new_maps = false) {
    LoadedData out;
    out.file = resolve_data(data);
    IngestOptions options;
    options.allow_new_maps = allow_new_maps;
    const auto loaded = load_rounds(out.file, format_from_extension(out.file), options);
    print_warnings(to_strings(loaded.warnings));
    const auto labeled = derive_labels(loaded.records, collect_game_results(loaded.records));
    out.split = split_by_date(labeled, boundaries_for(cfg, out.file, flags));
    print_warnings(out.split.warnings);
    return out;
}

std::span<const LabeledRound> partition(const DatasetSplit& split, const std::string& name) {
    if (name == "train") return split.train;
    if (name == "validation") return split.validation;
    return split.test;
}

std::vector<LabeledRound> partition_rounds(const DatasetSplit& split, const std::string& name) {
    if (name == "all") {
        std::vector<LabeledRound> all(split.train.begin(), split.train.end());
        all.insert(all.end(), split.validation.begin(), split.validation.end());
        all.insert(all.end(), split.test.begin(), split.test.end());
        return all;
    }
    const auto p = partition(split, name);
    return {p.begin(), p.end()};
}

std::shared_ptr<const TrainedModel> load_model(const fs::path& path) {
    return std::make_shared<const TrainedModel>(TrainedModel::load(path));
}

void add_common(CLI::App* sub, Common& common, bool with_out = true, bool with_format = true) {
    sub->add_option("--config", common.config, "INI settings file (flags override it)");
    sub->add_option("--seed", common.seed, "Random seed");
    if (with_out) sub->add_option("--out", common.out, "Output directory")->capture_default_str();
    if (with_format) {
        sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "text", "csv"}));
    }
    sub->add_option("--jobs", common.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

void add_split_flags(CLI::App* sub, SplitFlags& flags) {
    sub->add_option("--train-end", flags.train_end, "Last training date (YYYY-MM-DD)");
    sub->add_option("--val-end", flags.val_end, "Last validation date (YYYY-MM-DD)");
    sub->add_option("--test-end", flags.test_end, "Drop games after this date (YYYY-MM-DD)");
}

// ---- simulate ---------------------------------------------------------------

struct SimulateArgs {
    std::optional<int> games;
    std::optional<int> teams;
    std::vector<std::string> maps;
};

int run_simulate(const Common& common, const SimulateArgs& args) {
    const auto cfg = load_config(common);
    CorpusConfig corpus;
    apply_config(cfg, corpus);
    if (args.games) corpus.n_games = *args.games;
    if (args.teams) corpus.teams = CorpusConfig::default_teams(*args.teams);
    if (!args.maps.empty()) corpus.maps = args.maps;
    if (common.seed) corpus.sim.rng_seed = *common.seed;
    const auto format = output_format(common, OutputFormat::Json, {OutputFormat::Json, OutputFormat::Csv});
    const auto records = generate_corpus(corpus, common.jobs);
    std::ostringstream body;
    write_rounds(body, records, format == OutputFormat::Csv ? RecordFormat::Csv : RecordFormat::Jsonl);
    write_file(common.out / (format == OutputFormat::Csv ? "corpus.csv" : "corpus.jsonl"), body.str());
    return 0;
}

// ---- ingest -----------------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> inputs;
    bool allow_new_maps = false;
    SplitFlags split;
};

ordered_json partition_json(std::span<const LabeledRound> rounds) {
    std::set<std::string> games;
    std::map<std::string, long> maps;
    for (const auto& r : rounds) {
        games.insert(r.state.game_id);
        ++maps[r.state.map_name];
    }
    ordered_json j;
    j["rounds"] = rounds.size();
    j["games"] = games.size();
    j["rounds_by_map"] = maps;
    j["fingerprint"] = make_dataset(rounds, FeatureLayout::Base).fingerprint();
    j["game_ids"] = games;
    return j;
}

int run_ingest(const Common& common, const IngestArgs& args) {
    const auto cfg = load_config(common);
    const auto format = output_format(common, OutputFormat::Json, {OutputFormat::Json, OutputFormat::Csv});
    std::vector<fs::path> paths(args.inputs.begin(), args.inputs.end());
    IngestOptions options;
    options.allow_new_maps = args.allow_new_maps;
    const auto loaded = load_corpus(paths, options);
    print_warnings(to_strings(loaded.warnings));
    const auto labeled = derive_labels(loaded.records, collect_game_results(loaded.records));

    SplitBoundaries b = SplitBoundaries::defaults();
    apply_config(cfg, b);
    if (args.split.train_end) b.train_end = flag_date("--train-end", *args.split.train_end);
    if (args.split.val_end) b.val_end = flag_date("--val-end", *args.split.val_end);
    if (args.split.test_end) b.test_end = flag_date("--test-end", *args.split.test_end);
    const auto split = split_by_date(labeled, b);
    print_warnings(split.warnings);

    std::ostringstream rounds;
    write_rounds(rounds, loaded.records, format == OutputFormat::Csv ? RecordFormat::Csv : RecordFormat::Jsonl);
    write_file(common.out / (format == OutputFormat::Csv ? "rounds.csv" : "rounds.jsonl"), rounds.str());

    ordered_json manifest;
    manifest["records"] = loaded.records.size();
    ordered_json jb;
    jb["train_end"] = format_date(b.train_end);
    jb["val_end"] = format_date(b.val_end);
    jb["test_end"] = b.test_end ? ordered_json(format_date(*b.test_end)) : ordered_json();
    manifest["boundaries"] = jb;
    manifest["train"] = partition_json(split.train);
    manifest["validation"] = partition_json(split.validation);
    manifest["test"] = partition_json(split.test);
    manifest["warnings"] = split.warnings;
    manifest["ingest_warnings"] = loaded.warnings.size();
    write_file(common.out / kManifestName, json_text(manifest));
    return 0;
}

// ---- train / tune -----------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::optional<std::string> family;
    std::optional<std::string> mode;
    std::optional<std::string> logistic_features;
    SplitFlags split;
    // tune only
    std::optional<int> trials;
    std::optional<int> trial_max_rounds;
    std::optional<int> trial_max_epochs;
};

TrainOptions train_options(const ConfigFile& cfg, const Common& common, const TrainArgs& args, ModelFamily family) {
    TrainOptions o;
    o.family = family;
    o.jobs = common.jobs;
    const std::string mode = args.mode.value_or(cfg.get("train.mode").value_or("ohe_map"));
    const auto parsed_mode = parse_encoding_mode(mode);
    if (!parsed_mode) throw UsageError("unknown encoding mode '" + mode + "' (per_map, ohe_map, no_map)");
    o.mode = *parsed_mode;

    const std::string subset = args.logistic_features.value_or(cfg.get("train.logistic_features").value_or("scores_only"));
    const auto parsed_subset = parse_feature_subset(subset);
    if (!parsed_subset) throw UsageError("unknown logistic feature set '" + subset + "' (scores_only, full)");
    o.logistic.subset = *parsed_subset;
    set_double(cfg, "train.l2", o.logistic.l2);

    set_double(cfg, "gbtree.learning_rate", o.gbtree.learning_rate);
    set_int(cfg, "gbtree.max_depth", o.gbtree.max_depth);
    set_double(cfg, "gbtree.min_child_weight", o.gbtree.min_child_weight);
    set_double(cfg, "gbtree.colsample_per_level", o.gbtree.colsample_per_level);
    set_double(cfg, "gbtree.lambda", o.gbtree.lambda);
    set_int(cfg, "gbtree.max_rounds", o.gbtree.max_rounds);
    set_int(cfg, "gbtree.early_stopping_rounds", o.gbtree.early_stopping_rounds);

    set_int(cfg, "neural.hidden1", o.neural.hidden1);
    set_int(cfg, "neural.hidden2", o.neural.hidden2);
    set_double(cfg, "neural.dropout", o.neural.dropout);
    set_double(cfg, "neural.learning_rate", o.neural.learning_rate);
    set_int(cfg, "neural.batch_size", o.neural.batch_size);
    set_int(cfg, "neural.max_epochs", o.neural.max_epochs);
    set_int(cfg, "neural.patience", o.neural.patience);

    std::uint64_t seed = 0;
    set_int(cfg, "train.seed", seed);
    if (common.seed) seed = *common.seed;
    o.gbtree.seed = seed;
    o.neural.seed = seed;
    return o;
}

std::vector<ModelFamily> families_from(const ConfigFile& cfg, const TrainArgs& args, bool allow_all) {
    const std::string name = args.family.value_or(cfg.get("train.family").value_or("gbtree"));
    if (allow_all && name == "all") return {ModelFamily::Logistic, ModelFamily::Gbtree, ModelFamily::Neural};
    const auto f = parse_model_family(name);
    if (!f) throw UsageError("unknown model family '" + name + "'");
    return {*f};
}

fs::path model_path(const fs::path& out, const TrainOptions& o) {
    return out / ("model-" + std::string(to_string(o.family)) + "-" + std::string(to_string(o.mode)) + ".json");
}

int run_train(const Common& common, const TrainArgs& args) {
    const auto cfg = load_config(common);
    const auto data = load_split(args.data, cfg, args.split);
    for (ModelFamily family : families_from(cfg, args, true)) {
        const auto options = train_options(cfg, common, args, family);
        const auto model = train_model(data.split.train, data.split.validation, options);
        const auto path = model_path(common.out, options);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        model.save(path);
        std::cout << "wrote " << path.string() << " (" << model.model_id() << ")\n";
    }
    return 0;
}

int run_tune(const Common& common, const TrainArgs& args) {
    const auto cfg = load_config(common);
    const auto families = families_from(cfg, args, false);
    const auto data = load_split(args.data, cfg, args.split);
    SearchOptions search;
    search.base = train_options(cfg, common, args, families.front());
    search.seed = common.seed.value_or(0);
    search.jobs = common.jobs;
    set_int(cfg, "tune.trial_max_rounds", search.trial_max_rounds);
    set_int(cfg, "tune.trial_max_epochs", search.trial_max_epochs);
    if (args.trial_max_rounds) search.trial_max_rounds = *args.trial_max_rounds;
    if (args.trial_max_epochs) search.trial_max_epochs = *args.trial_max_epochs;
    int trials = 20;
    set_int(cfg, "tune.trials", trials);
    if (args.trials) trials = *args.trials;
    if (trials < 1) throw UsageError("--trials must be at least 1");

    const HyperparamSpace space;
    const auto result = random_search(space, trials, data.split.train, data.split.validation, search);
    const auto stem = std::string(to_string(search.base.family)) + "-" + std::string(to_string(search.base.mode));
    write_file(common.out / ("trials-" + stem + ".json"), result.to_json().dump(2) + "\n");

    const auto best = with_point(search.base, result.best_trial().params);
    const auto model = train_model(data.split.train, data.split.validation, best);
    const auto path = model_path(common.out, best);
    model.save(path);
    std::cout << "wrote " << path.string() << " (" << model.model_id() << ", trial " << result.best_trial().index
              << ", validation log-loss " << fixed(result.best_trial().val_loss, 5) << ")\n";
    return 0;
}

// ---- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
    std::string data;
    std::vector<std::string> models;
    SplitFlags split;
};

// Consistency checks recorded in the report; a failure is an internal error.
std::vector<std::string> evaluation_checks(const std::vector<std::shared_ptr<const TrainedModel>>& models,
                                           const EvalReport& report, const DatasetSplit& split, int jobs,
                                           bool& ok) {
    std::vector<std::string> out;
    const auto record = [&](bool pass, const std::string& what) {
        ok = ok && pass;
        out.push_back(std::string(pass ? "check passed: " : "CHECK FAILED: ") + what);
    };
    for (const auto& model : models) {
        std::vector<char> valid(split.test.size(), 0);
        parallel_for(split.test.size(), jobs, [&](std::size_t i) { valid[i] = model->predict(split.test[i].state).is_valid(); });
        const bool all_valid = std::all_of(valid.begin(), valid.end(), [](char v) { return v != 0; });
        record(all_valid, model->model_id() + " predicts a probability distribution on every test round");
    }
    for (const auto& [family, id] : report.per_map_model_ids) {
        const auto it = std::find_if(models.begin(), models.end(), [&](const auto& m) { return m->model_id() == id; });
        const double pooled = model_log_loss(**it, split.test, jobs);
        const double weighted = report.weighted_average.loss.at(family);
        record(std::abs(pooled - weighted) <= 1e-9 * std::max(1.0, pooled),
               id + " weighted average equals its pooled test log-loss");
    }
    return out;
}

int run_evaluate(const Common& common, const EvaluateArgs& args) {
    const auto cfg = load_config(common);
    const auto format = output_format(common, OutputFormat::Text, {OutputFormat::Json, OutputFormat::Text});
    const auto data = load_split(args.data, cfg, args.split);
    std::vector<std::shared_ptr<const TrainedModel>> models;
    std::vector<const TrainedModel*> ptrs;
    for (const auto& path : args.models) {
        models.push_back(load_model(path));
        ptrs.push_back(models.back().get());
    }
    auto report = evaluate_suite(ptrs, data.split, common.jobs, now_utc());
    bool ok = true;
    for (auto& note : evaluation_checks(models, report, data.split, common.jobs, ok)) report.notes.push_back(note);
    const auto winrate = buy_winrate_report(data.split.test);

    if (format == OutputFormat::Json) {
        write_file(common.out / "eval-report.json", json_text(report.to_json()));
        write_file(common.out / "buy-winrate.json", json_text(winrate.to_json()));
    } else {
        write_file(common.out / "eval-report.txt", report.to_text());
        write_file(common.out / "buy-winrate.txt", winrate.to_text());
        std::cout << "\n" << report.to_text();
    }
    if (!ok) {
        std::cerr << "error: evaluation consistency checks failed\n";
        return 3;
    }
    return 0;
}

// ---- transfer ---------------------------------------------------------------

struct TransferArgs {
    std::string data;
    std::vector<std::string> maps;
    std::optional<std::string> previous_model;
    SplitFlags split;
};

int run_transfer(const Common& common, const TransferArgs& args) {
    const auto cfg = load_config(common);
    const auto format = output_format(common, OutputFormat::Text, {OutputFormat::Json, OutputFormat::Text});
    const auto data = load_split(args.data, cfg, args.split);
    TransferOptions options;
    options.maps = args.maps;
    options.jobs = common.jobs;
    set_double(cfg, "transfer.finetune_learning_rate", options.finetune_learning_rate);
    set_int(cfg, "transfer.max_epochs", options.base.max_epochs);
    set_int(cfg, "transfer.patience", options.base.patience);
    set_int(cfg, "transfer.batch_size", options.base.batch_size);
    if (common.seed) options.base.seed = *common.seed;
    if (args.previous_model) {
        const auto previous = load_model(*args.previous_model);
        std::set<std::string> maps;
        for (const auto& r : data.split.test) maps.insert(r.state.map_name);
        for (const auto& map : maps) {
            if (!previous->accepts_map(map)) continue;
            std::vector<LabeledRound> rounds;
            for (const auto& r : data.split.test) {
                if (r.state.map_name == map) rounds.push_back(r);
            }
            options.previous_best[map] = model_log_loss(*previous, rounds, common.jobs);
        }
    }
    const auto report = transfer_study(data.split, options, now_utc());
    print_warnings(report.warnings);
    if (format == OutputFormat::Json) {
        write_file(common.out / "transfer-report.json", json_text(report.to_json()));
    } else {
        write_file(common.out / "transfer-report.txt", report.to_text());
        std::cout << "\n" << report.to_text();
    }
    return 0;
}

// ---- whatif -----------------------------------------------------------------

struct WhatIfArgs {
    std::optional<std::string> model;
    std::string map;
    int ct_score = 0;
    int t_score = 0;
    std::string side;
    long long money = 0;
    long long equip = 0;
    std::optional<long long> opp_money;
    std::optional<long long> opp_equip;
    std::optional<std::string> opp_buy;
    std::optional<std::string> actual_buy;
};

int run_whatif(const Common& common, const WhatIfArgs& args) {
    const auto cfg = load_config(common);
    const auto format = output_format(common, OutputFormat::Text, {OutputFormat::Json, OutputFormat::Text});
    const auto model_file = args.model ? args.model : cfg.get("serve.model");
    if (!model_file) throw UsageError("whatif needs --model (or ECONOSCOPE_MODEL)");
    const auto side = parse_side(args.side);
    if (!side) throw UsageError("--side must be CT or T");
    int rounds_to_win = 16;
    set_int(cfg, "sim.rounds_to_win", rounds_to_win);

    const std::string own = *side == Side::CT ? "ct_" : "t_";
    const std::string opp = *side == Side::CT ? "t_" : "ct_";
    nlohmann::json request;
    request["map_name"] = args.map;
    request["ct_score"] = args.ct_score;
    request["t_score"] = args.t_score;
    request["side"] = args.side;
    request[own + "money"] = args.money;
    request[own + "equip_start"] = args.equip;
    request[opp + "money"] = args.opp_money.value_or(args.money);
    request[opp + "equip_start"] = args.opp_equip.value_or(args.equip);
    if (args.opp_buy) request["opponent_buy"] = *args.opp_buy;
    if (args.actual_buy) request["actual_buy"] = *args.actual_buy;

    const WhatIfService service(load_model(*model_file), rounds_to_win);
    const auto response = service.whatif(request.dump());
    const auto body = nlohmann::json::parse(response.body);
    if (response.status != 200) {
        const auto message = body.value("error", std::string("request failed"));
        throw DataError(body.contains("field") ? body.at("field").get<std::string>() + ": " + message : message);
    }
    if (format == OutputFormat::Json) {
        std::cout << nlohmann::ordered_json::parse(response.body).dump(2) << "\n";
        return 0;
    }
    const auto optimal = body.at("optimal_buy").get<std::string>();
    std::cout << args.map << ", " << args.side << " to buy at " << args.ct_score << "-" << args.t_score
              << " (CT-T), opponent " << display_name(*parse_buy_type(body.at("opponent_buy").get<std::string>()))
              << "\n\n";
    TextTable table({"Buy", "Win probability", "Delta to best", ""});
    for (const auto& o : body.at("options")) {
        const auto buy = o.at("buy").get<std::string>();
        std::string marks = buy == optimal ? "optimal" : "";
        if (args.actual_buy && *parse_buy_type(*args.actual_buy) == *parse_buy_type(buy)) {
            marks += marks.empty() ? "actual" : ", actual";
        }
        table.add_row({std::string(display_name(*parse_buy_type(buy))), fixed(o.at("win_probability").get<double>(), 4),
                       fixed(o.at("delta_to_best").get<double>(), 4), marks});
    }
    std::cout << table.render();
    std::cout << "\n* optimal: " << display_name(*parse_buy_type(optimal)) << " at "
              << fixed(body.at("optimal_probability").get<double>(), 4) << "\n";
    if (body.contains("lost_probability")) {
        std::cout << "* lost by the actual buy: " << fixed(body.at("lost_probability").get<double>(), 4) << "\n";
    }
    return 0;
}

// ---- ose --------------------------------------------------------------------

struct AnalysisArgs {
    std::string data;
    std::string model;
    std::string partition = "test";
    std::optional<long> min_rounds;
    SplitFlags split;
};

int run_ose(const Common& common, const AnalysisArgs& args) {
    const auto cfg = load_config(common);
    const auto format =
        output_format(common, OutputFormat::Text, {OutputFormat::Json, OutputFormat::Text, OutputFormat::Csv});
    const auto data = load_split(args.data, cfg, args.split);
    const auto model = load_model(args.model);
    const auto rounds = partition_rounds(data.split, args.partition);
    if (rounds.empty()) throw DataError("the " + args.partition + " partition is empty");

    OseRanking ranking;
    ranking.generated_at = now_utc();
    ranking.min_rounds = 300;
    set_int(cfg, "ose.min_rounds", ranking.min_rounds);
    if (args.min_rounds) ranking.min_rounds = *args.min_rounds;
    const auto evaluations = evaluate_rounds(*model, rounds, kAllSides, common.jobs);
    const auto all_teams = ose_by_team(evaluations, rounds);
    ranking.teams = rank_teams(all_teams, ranking.min_rounds);
    try {
        ranking.correlation = ose_winrate_correlation(ranking.teams);
    } catch (const DataError& e) {
        ranking.notes.push_back(std::string("no correlation: ") + e.what());
    }
    ranking.notes.push_back("OSE is the mean of (W - O)^2 over a team's rounds on the " + args.partition +
                            " partition, scored by model " + model->model_id() + ".");
    ranking.notes.push_back(std::to_string(all_teams.size() - ranking.teams.size()) + " of " +
                            std::to_string(all_teams.size()) + " teams have fewer than " +
                            std::to_string(ranking.min_rounds) + " rounds.");

    switch (format) {
    case OutputFormat::Json: write_file(common.out / "ose-ranking.json", json_text(ranking.to_json())); break;
    case OutputFormat::Text:
        write_file(common.out / "ose-ranking.txt", ranking.to_text());
        std::cout << "\n" << ranking.to_text();
        break;
    case OutputFormat::Csv: write_file(common.out / "ose-ranking.csv", ose_scatter_csv(ranking.teams)); break;
    }
    write_file(common.out / "ose-scatter.csv", ose_scatter_csv(all_teams));
    return 0;
}

// ---- report -----------------------------------------------------------------

ordered_json confusion_json(const ConfusionMatrix& m) {
    ordered_json j;
    j["side"] = to_string(m.side);
    j["rows"] = "optimal";
    j["columns"] = "actual";
    ordered_json buys = ordered_json::array();
    for (auto b : kAllBuyTypes) buys.push_back(to_string(b));
    j["buy_types"] = buys;
    ordered_json counts = ordered_json::array();
    for (const auto& row : m.counts) counts.push_back(row);
    j["counts"] = counts;
    j["total"] = m.total();
    return j;
}

ordered_json second_round_json(const SecondRoundReport& r) {
    ordered_json arr = ordered_json::array();
    for (const auto& row : r.rows) {
        ordered_json j;
        j["side"] = to_string(row.side);
        j["rounds"] = row.rounds;
        ordered_json actual, optimal;
        for (auto b : kAllBuyTypes) {
            actual[std::string(to_string(b))] = row.actual_rate(b);
            optimal[std::string(to_string(b))] = row.optimal_rate(b);
        }
        j["actual"] = actual;
        j["optimal"] = optimal;
        arr.push_back(j);
    }
    return arr;
}

ordered_json eco_json(const EcoLossSummary& s) {
    ordered_json j;
    j["side"] = to_string(s.side);
    j["eco_rounds"] = s.eco_rounds;
    j["affected_rounds"] = s.affected_rounds;
    j["affected_share"] = s.affected_share;
    j["mean_loss_affected"] = s.mean_loss_affected;
    j["mean_loss_all_eco"] = s.mean_loss_all_eco;
    return j;
}

std::string eco_text(const EcoLossSummary& s) {
    std::ostringstream out;
    out << to_string(s.side) << ": " << s.eco_rounds << " eco rounds, " << s.affected_rounds << " ("
        << percent(s.affected_share) << ") with Low Buy or Half Buy optimal; mean lost win probability "
        << fixed(s.mean_loss_affected, 4) << " on those, " << fixed(s.mean_loss_all_eco, 4) << " over all eco rounds\n";
    return out.str();
}

int run_report(const Common& common, const AnalysisArgs& args) {
    const auto cfg = load_config(common);
    const auto format = output_format(common, OutputFormat::Text, {OutputFormat::Json, OutputFormat::Text});
    const auto data = load_split(args.data, cfg, args.split);
    const auto model = load_model(args.model);
    const auto rounds = partition_rounds(data.split, args.partition);
    if (rounds.empty()) throw DataError("the " + args.partition + " partition is empty");

    const auto evaluations = evaluate_rounds(*model, rounds, kAllSides, common.jobs);
    const auto ct = confusion_matrix(evaluations, Side::CT);
    const auto t = confusion_matrix(evaluations, Side::T);
    const auto second = second_round_report(evaluations);
    const auto eco_ct = eco_loss_summary(evaluations, Side::CT);
    const auto eco_t = eco_loss_summary(evaluations, Side::T);
    const auto generated_at = now_utc();

    if (format == OutputFormat::Json) {
        ordered_json j;
        j["generated_at"] = generated_at;
        j["model_id"] = model->model_id();
        j["partition"] = args.partition;
        j["rounds"] = rounds.size();
        j["confusion"] = {confusion_json(ct), confusion_json(t)};
        j["second_round"] = second_round_json(second);
        j["eco_loss"] = {eco_json(eco_ct), eco_json(eco_t)};
        write_file(common.out / "report.json", json_text(j));
        return 0;
    }
    std::ostringstream out;
    out << "# generated_at: " << generated_at << "\n";
    out << "Buy analysis of model " << model->model_id() << " on " << rounds.size() << " " << args.partition
        << " rounds\n\n";
    out << "Optimal (rows) vs actual (columns) buy\n\n" << ct.to_text() << "\n" << t.to_text() << "\n";
    out << "Second round after losing the pistol round\n\n" << second.to_text() << "\n";
    out << "Eco rounds\n\n" << eco_text(eco_ct) << eco_text(eco_t);
    write_file(common.out / "report.txt", out.str());
    std::cout << "\n" << out.str();
    return 0;
}

// ---- serve ------------------------------------------------------------------

struct ServeArgs {
    std::optional<std::string> model;
    std::optional<std::string> addr;
};

int run_serve(const Common& common, const ServeArgs& args) {
    const auto cfg = load_config(common);
    const auto model_file = args.model ? args.model : cfg.get("serve.model");
    const auto address = args.addr.value_or(cfg.get("serve.addr").value_or("127.0.0.1:8080"));
    const auto [host, port] = parse_listen_address(address);
    int rounds_to_win = 16;
    set_int(cfg, "sim.rounds_to_win", rounds_to_win);

    const WhatIfService service(model_file ? load_model(*model_file) : nullptr, rounds_to_win);
    if (!model_file) std::cerr << "warning: no model loaded; endpoints answer 503\n";

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    HttpServer server(service);
    const int bound = server.bind(host, port);
    std::cout << "listening on " << host << ":" << bound;
    if (service.model()) std::cout << " with model " << service.model()->model_id();
    std::cout << std::endl;
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        server.stop();
    });
    server.run();
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Round-level game win probability and buy analysis for CS:GO", "econoscope"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "econoscope 0.1.0");

    Common common;

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic round-record corpus");
    add_common(simulate, common);
    simulate->add_option("--games", sim.games, "Number of games")->check(CLI::PositiveNumber);
    simulate->add_option("--teams", sim.teams, "Number of teams (mixed spending policies)")->check(CLI::Range(2, 10000));
    simulate->add_option("--maps", sim.maps, "Map pool");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Validate round records and write a canonical dataset with its split");
    add_common(ingest, common);
    ingest->add_option("--input", ingest_args.inputs, "Round-record files (.jsonl or .csv)")->required();
    ingest->add_flag("--allow-new-maps", ingest_args.allow_new_maps, "Accept maps outside the default pool");
    add_split_flags(ingest, ingest_args.split);

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "Fit win probability models");
    add_common(train, common);
    train->add_option("--data", train_args.data, "Rounds file or ingest/simulate output directory")->required();
    train->add_option("--family", train_args.family, "Model family")
        ->check(CLI::IsMember({"logistic", "gbtree", "neural", "all"}));
    train->add_option("--mode", train_args.mode, "Map encoding")->check(CLI::IsMember({"per_map", "ohe_map", "no_map"}));
    train->add_option("--logistic-features", train_args.logistic_features, "Logistic inputs")
        ->check(CLI::IsMember({"scores_only", "full"}));
    add_split_flags(train, train_args.split);

    TrainArgs tune_args;
    auto* tune = app.add_subcommand("tune", "Random hyperparameter search, then fit the best point");
    add_common(tune, common);
    tune->add_option("--data", tune_args.data, "Rounds file or ingest/simulate output directory")->required();
    tune->add_option("--family", tune_args.family, "Model family")->check(CLI::IsMember({"gbtree", "neural", "logistic"}));
    tune->add_option("--mode", tune_args.mode, "Map encoding")->check(CLI::IsMember({"per_map", "ohe_map", "no_map"}));
    tune->add_option("--trials", tune_args.trials, "Number of sampled grid points");
    tune->add_option("--trial-max-rounds", tune_args.trial_max_rounds, "Boosting round cap per trial");
    tune->add_option("--trial-max-epochs", tune_args.trial_max_epochs, "Epoch cap per trial");
    add_split_flags(tune, tune_args.split);

    EvaluateArgs eval_args;
    auto* evaluate = app.add_subcommand("evaluate", "Test log-loss by map and family, and win rate by buy");
    add_common(evaluate, common);
    evaluate->add_option("--data", eval_args.data, "Rounds file or ingest/simulate output directory")->required();
    evaluate->add_option("--models", eval_args.models, "Model files")->required();
    add_split_flags(evaluate, eval_args.split);

    TransferArgs transfer_args;
    auto* transfer = app.add_subcommand("transfer", "Leave-one-map-out fine-tuning study");
    add_common(transfer, common);
    transfer->add_option("--data", transfer_args.data, "Rounds file or ingest/simulate output directory")->required();
    transfer->add_option("--maps", transfer_args.maps, "Held-out maps (default: all)");
    transfer->add_option("--previous-model", transfer_args.previous_model, "Per-map model shown for comparison");
    add_split_flags(transfer, transfer_args.split);

    WhatIfArgs whatif_args;
    auto* whatif = app.add_subcommand("whatif", "Score every feasible buy for one side of one round");
    add_common(whatif, common, false);
    whatif->add_option("--model", whatif_args.model, "Model file")->envname("ECONOSCOPE_MODEL");
    whatif->add_option("--map", whatif_args.map, "Map name")->required();
    whatif->add_option("--ct-score", whatif_args.ct_score, "CT rounds won")->required();
    whatif->add_option("--t-score", whatif_args.t_score, "T rounds won")->required();
    whatif->add_option("--side", whatif_args.side, "Side to buy for")->required()->check(CLI::IsMember({"CT", "T", "ct", "t"}));
    whatif->add_option("--money", whatif_args.money, "Team money")->required()->check(CLI::NonNegativeNumber);
    whatif->add_option("--equip", whatif_args.equip, "Team starting equipment value")->required()->check(CLI::NonNegativeNumber);
    whatif->add_option("--opp-money", whatif_args.opp_money, "Opponent money (default: --money)")->check(CLI::NonNegativeNumber);
    whatif->add_option("--opp-equip", whatif_args.opp_equip, "Opponent equipment (default: --equip)")->check(CLI::NonNegativeNumber);
    whatif->add_option("--opp-buy", whatif_args.opp_buy, "Opponent buy (default: its most expensive)");
    whatif->add_option("--actual-buy", whatif_args.actual_buy, "Buy actually made, to report the lost probability");

    AnalysisArgs ose_args;
    auto* ose = app.add_subcommand("ose", "Rank teams by Optimal Spending Error");
    add_common(ose, common);
    ose->add_option("--data", ose_args.data, "Rounds file or ingest/simulate output directory")->required();
    ose->add_option("--model", ose_args.model, "Model file")->required();
    ose->add_option("--partition", ose_args.partition, "Rounds to score")
        ->capture_default_str()
        ->check(CLI::IsMember({"train", "validation", "test", "all"}));
    ose->add_option("--min-rounds", ose_args.min_rounds, "Rounds a team needs to be ranked");
    add_split_flags(ose, ose_args.split);

    AnalysisArgs report_args;
    auto* report = app.add_subcommand("report", "Optimal vs actual buy tables");
    add_common(report, common);
    report->add_option("--data", report_args.data, "Rounds file or ingest/simulate output directory")->required();
    report->add_option("--model", report_args.model, "Model file")->required();
    report->add_option("--partition", report_args.partition, "Rounds to score")
        ->capture_default_str()
        ->check(CLI::IsMember({"train", "validation", "test", "all"}));
    add_split_flags(report, report_args.split);

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "Run the HTTP prediction and what-if service");
    add_common(serve, common, false, false);
    serve->add_option("--model", serve_args.model, "Model file")->envname("ECONOSCOPE_MODEL");
    serve->add_option("--addr", serve_args.addr, "Listen address host:port")->envname("ECONOSCOPE_ADDR");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (argc > 1 && argv[1][0] != '-' && app.get_subcommands().empty()) {
            std::cerr << "error: unknown subcommand '" << argv[1] << "'\n\n" << app.help();
            return 1;
        }
        const int code = app.exit(e);
        if (code == 0) return 0;
        std::cerr << "\n" << app.help();
        return 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(common, sim);
        if (ingest->parsed()) return run_ingest(common, ingest_args);
        if (train->parsed()) return run_train(common, train_args);
        if (tune->parsed()) return run_tune(common, tune_args);
        if (evaluate->parsed()) return run_evaluate(common, eval_args);
        if (transfer->parsed()) return run_transfer(common, transfer_args);
        if (whatif->parsed()) {
            if (whatif_args.side == "ct") whatif_args.side = "CT";
            if (whatif_args.side == "t") whatif_args.side = "T";
            return run_whatif(common, whatif_args);
        }
        if (ose->parsed()) return run_ose(common, ose_args);
        if (report->parsed()) return run_report(common, report_args);
        if (serve->parsed()) return run_serve(common, serve_args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const TrainingError& e) {
        std::cerr << "error: training failed: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    std::cerr << app.help();
    return 1;
}
