#include "bdp/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bdp {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for '" + std::string(key) + "': " + e.what());
    }
}

std::string get_string(const json& obj, const char* key, const std::string& fallback) {
    return get_or<std::string>(obj, key, fallback);
}

Criterion parse_criterion(const std::string& s) {
    try {
        return criterion_from_name(s);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

void parse_dataset(const json& j, DatasetSpec& out) {
    check_keys(j, "dataset", {"type", "layout", "classes", "per_class", "dim", "noise_sigma", "path"});
    const std::string type = get_string(j, "type", "blobs");
    if (type == "blobs") {
        out.kind = DatasetSpec::Kind::Blobs;
        const std::string layout = get_string(j, "layout", "xor_rings");
        if (layout == "xor_rings") {
            out.layout = BlobLayout::XorRings;
        } else if (layout == "separable") {
            out.layout = BlobLayout::Separable;
        } else {
            throw ConfigError("config: dataset.layout must be 'separable' or 'xor_rings'");
        }
        out.classes = get_or(j, "classes", out.classes);
        out.per_class = get_or(j, "per_class", out.per_class);
        out.dim = get_or(j, "dim", out.dim);
        out.noise_sigma = get_or(j, "noise_sigma", out.noise_sigma);
    } else if (type == "csv") {
        out.kind = DatasetSpec::Kind::Csv;
        if (!j.contains("path")) throw ConfigError("config: dataset.path required for type csv");
        out.csv_path = j.at("path").get<std::string>();
    } else {
        throw ConfigError("config: dataset.type must be 'blobs' or 'csv'");
    }
}

void parse_space(const json& j, RunConfig& cfg) {
    check_keys(j, "space",
               {"nodes_per_cell", "num_cells", "feature_dim", "num_classes", "candidate_ops"});
    SpaceConfig& sp = cfg.search.space;
    sp.nodes_per_cell = get_or(j, "nodes_per_cell", sp.nodes_per_cell);
    sp.num_cells = get_or(j, "num_cells", sp.num_cells);
    if (j.contains("feature_dim")) {
        sp.feature_dim = j.at("feature_dim").get<int>();
        cfg.space_dim_explicit = true;
    }
    if (j.contains("num_classes")) {
        sp.num_classes = j.at("num_classes").get<int>();
        cfg.space_classes_explicit = true;
    }
    if (j.contains("candidate_ops")) {
        sp.candidate_ops.clear();
        for (const auto& item : j.at("candidate_ops")) {
            const auto k = op_from_name(item.get<std::string>());
            if (!k)
                throw ConfigError("config: unknown candidate op '" + item.get<std::string>() + "'");
            sp.candidate_ops.push_back(*k);
        }
    }
}

void parse_search(const json& j, SearchConfig& out) {
    check_keys(j, "search",
               {"epochs", "batch_size", "lr_w", "lr_alpha", "momentum_w", "regularizer"});
    out.epochs = get_or(j, "epochs", out.epochs);
    out.batch_size = get_or(j, "batch_size", out.batch_size);
    out.lr_w = get_or(j, "lr_w", out.lr_w);
    out.lr_alpha = get_or(j, "lr_alpha", out.lr_alpha);
    out.momentum_w = get_or(j, "momentum_w", out.momentum_w);
    const std::string reg = get_string(j, "regularizer", "none");
    if (reg != "none") throw ConfigError("config: regularizer '" + reg + "' is not available");
    out.regularizer = Regularizer::None;
}

void parse_prune(const json& j, SearchConfig& out) {
    check_keys(j, "prune",
               {"mode", "interval", "p_train", "p_val", "criterion_train", "criterion_val",
                "constraint_family", "one_shot"});
    const std::string mode = get_string(j, "mode", "progressive");
    if (mode == "progressive") {
        out.prune_mode = PruneMode::Progressive;
    } else if (mode == "one_shot") {
        out.prune_mode = PruneMode::OneShot;
    } else if (mode == "off") {
        out.prune_mode = PruneMode::Off;
    } else {
        throw ConfigError("config: prune.mode must be progressive|one_shot|off");
    }
    out.prune.interval = get_or(j, "interval", out.prune.interval);
    out.prune.p_train = get_or(j, "p_train", out.prune.p_train);
    out.prune.p_val = get_or(j, "p_val", out.prune.p_val);
    out.prune.criterion_train =
        parse_criterion(get_string(j, "criterion_train", criterion_name(out.prune.criterion_train)));
    out.prune.criterion_val =
        parse_criterion(get_string(j, "criterion_val", criterion_name(out.prune.criterion_val)));
    try {
        out.prune.family = family_from_name(get_string(j, "constraint_family", "A"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (j.contains("one_shot")) {
        const json& os = j.at("one_shot");
        check_keys(os, "prune.one_shot", {"warmup_epochs", "discard_train", "discard_val", "fraction"});
        out.one_shot.warmup_epochs = get_or(os, "warmup_epochs", out.one_shot.warmup_epochs);
        out.one_shot.discard_train =
            parse_criterion(get_string(os, "discard_train", criterion_name(out.one_shot.discard_train)));
        out.one_shot.discard_val =
            parse_criterion(get_string(os, "discard_val", criterion_name(out.one_shot.discard_val)));
        out.one_shot.fraction = get_or(os, "fraction", out.one_shot.fraction);
    }
}

void parse_analysis(const json& j, RunConfig& cfg) {
    check_keys(j, "analysis", {"eig_schedule", "taylor_bound", "raw_alpha_distance"});
    const std::string sched = get_string(j, "eig_schedule", "prune_epochs");
    if (sched == "prune_epochs") {
        cfg.search.eig_schedule = EigSchedule::PruneEpochs;
    } else if (sched == "every_epoch") {
        cfg.search.eig_schedule = EigSchedule::EveryEpoch;
    } else if (sched == "off") {
        cfg.search.eig_schedule = EigSchedule::Off;
    } else {
        throw ConfigError("config: analysis.eig_schedule must be prune_epochs|every_epoch|off");
    }
    cfg.compute_taylor_bound = get_or(j, "taylor_bound", cfg.compute_taylor_bound);
    cfg.raw_alpha_distance = get_or(j, "raw_alpha_distance", cfg.raw_alpha_distance);
}

void parse_eval(const json& j, EvalConfig& out) {
    check_keys(j, "eval", {"epochs", "batch_size", "lr_w", "momentum_w"});
    out.epochs = get_or(j, "epochs", out.epochs);
    out.batch_size = get_or(j, "batch_size", out.batch_size);
    out.lr_w = get_or(j, "lr_w", out.lr_w);
    out.momentum_w = get_or(j, "momentum_w", out.momentum_w);
}

void parse_grid(const json& j, GridConfig& out) {
    check_keys(j, "grid", {"criteria", "ratios", "seeds"});
    if (j.contains("criteria")) {
        out.criteria.clear();
        for (const auto& pair : j.at("criteria")) {
            if (!pair.is_array() || pair.size() != 2)
                throw ConfigError("config: grid.criteria entries must be [train, val] pairs");
            out.criteria.emplace_back(parse_criterion(pair.at(0).get<std::string>()),
                                      parse_criterion(pair.at(1).get<std::string>()));
        }
    }
    if (j.contains("ratios")) {
        out.ratios.clear();
        for (const auto& pair : j.at("ratios")) {
            if (!pair.is_array() || pair.size() != 2)
                throw ConfigError("config: grid.ratios entries must be [p_train, p_val] pairs");
            out.ratios.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
    }
    if (j.contains("seeds")) {
        out.seeds.clear();
        for (const auto& s : j.at("seeds")) out.seeds.push_back(s.get<uint64_t>());
        if (out.seeds.empty()) throw ConfigError("config: grid.seeds must not be empty");
    }
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    check_keys(root, "config root",
               {"seed", "dataset", "split", "space", "search", "prune", "analysis", "eval", "grid"});

    RunConfig cfg;
    cfg.seed = get_or<uint64_t>(root, "seed", cfg.seed);
    if (root.contains("dataset")) parse_dataset(root.at("dataset"), cfg.dataset);
    if (root.contains("split")) {
        const json& j = root.at("split");
        check_keys(j, "split", {"train_fraction", "test_fraction", "stratified"});
        cfg.split.train_fraction = get_or(j, "train_fraction", cfg.split.train_fraction);
        cfg.split.test_fraction = get_or(j, "test_fraction", cfg.split.test_fraction);
        cfg.split.stratified = get_or(j, "stratified", cfg.split.stratified);
    }
    if (root.contains("space")) parse_space(root.at("space"), cfg);
    if (root.contains("search")) parse_search(root.at("search"), cfg.search);
    if (root.contains("prune")) parse_prune(root.at("prune"), cfg.search);
    if (root.contains("analysis")) parse_analysis(root.at("analysis"), cfg);
    if (root.contains("eval")) parse_eval(root.at("eval"), cfg.eval);
    if (root.contains("grid")) parse_grid(root.at("grid"), cfg.grid);

    // paper-grid defaults: four criterion pairs, five ratio pairs
    if (cfg.grid.criteria.empty()) {
        cfg.grid.criteria = {{Criterion::Low, Criterion::Low},
                             {Criterion::Low, Criterion::High},
                             {Criterion::High, Criterion::Low},
                             {Criterion::High, Criterion::High}};
    }
    if (cfg.grid.ratios.empty()) {
        cfg.grid.ratios = {{25, 5}, {20, 10}, {15, 15}, {10, 20}, {5, 25}};
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

PreparedRun prepare_run(RunConfig& cfg) {
    // Every component draws from its own child of the master seed, so one
    // component's draws never shift another's.
    const RngStream master(cfg.seed);
    PreparedRun out;

    if (cfg.dataset.kind == DatasetSpec::Kind::Blobs) {
        out.dataset = gen_blobs(cfg.dataset.classes, cfg.dataset.per_class, cfg.dataset.dim,
                                cfg.dataset.noise_sigma, cfg.dataset.layout,
                                master.fork(1).seed());
    } else {
        out.dataset = load_csv(cfg.dataset.csv_path);
    }

    SpaceConfig& sp = cfg.search.space;
    if (cfg.space_dim_explicit) {
        if (sp.feature_dim != out.dataset.dim())
            throw ConfigError("config: space.feature_dim does not match the dataset");
    } else {
        sp.feature_dim = out.dataset.dim();
    }
    if (cfg.space_classes_explicit) {
        if (sp.num_classes != out.dataset.num_classes)
            throw ConfigError("config: space.num_classes does not match the dataset");
    } else {
        sp.num_classes = out.dataset.num_classes;
    }

    cfg.split.seed = cfg.seed;  // split() forks its own child internally
    cfg.search.seed = master.fork(3).seed();
    try {
        cfg.search.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    out.parts = split(out.dataset, cfg.split);
    return out;
}

}  // namespace bdp
