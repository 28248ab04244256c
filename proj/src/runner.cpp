#include "bdp/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "bdp/analysis.hpp"
#include "bdp/bilevel.hpp"
#include "bdp/config.hpp"

namespace bdp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[40];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string trajectory_csv(const std::vector<TrajectoryRecord>& traj) {
    std::string out =
        "epoch,train_loss,val_loss,train_acc,val_acc,test_acc,"
        "remaining_train,remaining_val,balance_train,balance_val,eig_max\n";
    for (const auto& r : traj) {
        out += std::to_string(r.epoch) + "," + fmt(r.train_loss) + "," + fmt(r.val_loss) + "," +
               fmt(r.train_acc) + "," + fmt(r.val_acc) + "," + fmt(r.test_acc) + "," +
               std::to_string(r.remaining_train) + "," + std::to_string(r.remaining_val) + "," +
               fmt(r.balance_train) + "," + fmt(r.balance_val) + ",";
        if (r.eig_max) out += fmt(*r.eig_max, "%.6g");
        out += "\n";
    }
    return out;
}

std::string class_counts_csv(const std::vector<ClassCountRecord>& records) {
    std::string out = "epoch,set,class,count\n";
    for (const auto& rec : records) {
        for (size_t cls = 0; cls < rec.counts.size(); ++cls) {
            out += std::to_string(rec.epoch) + "," + rec.set_name + "," + std::to_string(cls) +
                   "," + std::to_string(rec.counts[cls]) + "\n";
        }
    }
    return out;
}

json result_json(const RunConfig& cfg, const SearchResult& res) {
    const TrajectoryRecord& last = res.trajectory.back();
    json j;
    j["final"] = {{"train_acc", last.train_acc},
                  {"val_acc", last.val_acc},
                  {"test_acc", last.test_acc},
                  {"train_loss", last.train_loss},
                  {"val_loss", last.val_loss}};
    j["remaining_train"] = res.train_state.size();
    j["remaining_val"] = res.val_state.size();
    j["remaining_train_fraction"] =
        static_cast<double>(res.train_state.size()) / res.train_state.initial_size();
    j["remaining_val_fraction"] =
        static_cast<double>(res.val_state.size()) / res.val_state.initial_size();
    j["balance_train"] = last.balance_train;
    j["balance_val"] = last.balance_val;

    json eig = json::array();
    for (const auto& r : res.trajectory) {
        if (r.eig_max) eig.push_back({{"epoch", r.epoch}, {"value", *r.eig_max}});
    }
    j["eig_trajectory"] = eig;

    json genotype = json::array();
    for (int k : res.genotype.chosen_op)
        genotype.push_back(op_name(res.net.space.candidate_ops[k]));
    j["genotype"] = genotype;

    json rounds = json::array();
    long shortfall = 0;
    for (const auto& log : res.prune_log) {
        rounds.push_back({{"epoch", log.epoch},
                          {"set", log.set_name},
                          {"target", log.target},
                          {"removed", log.removed},
                          {"cap_limited", log.cap_limited},
                          {"balance_before", log.balance_before},
                          {"intensity", log.intensity}});
        if (log.set_name == "train") shortfall += log.target - log.removed;
    }
    j["prune_rounds"] = rounds;
    j["train_cap_shortfall"] = shortfall;

    if (cfg.compute_taylor_bound) {
        double eig_val = 0.0;
        bool have = false;
        for (auto it = res.trajectory.rbegin(); it != res.trajectory.rend(); ++it) {
            if (it->eig_max) {
                eig_val = *it->eig_max;
                have = true;
                break;
            }
        }
        if (have) {
            j["taylor_bound"] =
                taylor_bound(eig_val, res.alpha, res.genotype, cfg.raw_alpha_distance);
        }
    }
    j["seed"] = cfg.seed;
    return j;
}

struct CellResult {
    double test_acc = 0.0;
    double remaining_train_fraction = 1.0;
    double remaining_val_fraction = 1.0;
};

CellResult run_cell(RunConfig cell_cfg) {
    PreparedRun prep = prepare_run(cell_cfg);
    const SearchResult res = run_search(cell_cfg.search, prep.dataset, std::move(prep.parts));
    CellResult out;
    out.test_acc = res.trajectory.back().test_acc;
    out.remaining_train_fraction =
        static_cast<double>(res.train_state.size()) / res.train_state.initial_size();
    out.remaining_val_fraction =
        static_cast<double>(res.val_state.size()) / res.val_state.initial_size();
    return out;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_search(const std::string& config_path, const std::string& out_dir) {
    return guarded([&] {
        RunConfig cfg = load_config(config_path);
        PreparedRun prep = prepare_run(cfg);
        const SearchResult res = run_search(cfg.search, prep.dataset, std::move(prep.parts));

        fs::create_directories(out_dir);
        write_file(out_dir + "/trajectory.csv", trajectory_csv(res.trajectory));
        write_file(out_dir + "/class_counts.csv", class_counts_csv(res.class_counts));
        write_heatmap_csv(res.net.space, res.alpha, out_dir + "/heatmap.csv");
        write_file(out_dir + "/genotype.txt", genotype_to_text(res.net.space, res.genotype));
        write_file(out_dir + "/result.json", result_json(cfg, res).dump(2) + "\n");
        return 0;
    });
}

int cmd_grid(const std::string& config_path, const std::string& out_dir) {
    return guarded([&] {
        const RunConfig base = load_config(config_path);
        std::vector<uint64_t> seeds = base.grid.seeds;
        if (seeds.empty()) seeds.push_back(base.seed);

        std::string csv =
            "criterion_T,criterion_V,p_t,p_v,test_acc,"
            "remaining_train_fraction,remaining_val_fraction,seed\n";
        for (uint64_t seed : seeds) {
            for (const auto& [crit_t, crit_v] : base.grid.criteria) {
                for (const auto& [p_t, p_v] : base.grid.ratios) {
                    RunConfig cell = base;
                    cell.seed = seed;
                    cell.search.prune.criterion_train = crit_t;
                    cell.search.prune.criterion_val = crit_v;
                    cell.search.prune.p_train = p_t;
                    cell.search.prune.p_val = p_v;
                    cell.search.eig_schedule = EigSchedule::Off;  // grid cells skip the estimator
                    const CellResult r = run_cell(std::move(cell));
                    csv += std::string(criterion_name(crit_t)) + "," + criterion_name(crit_v) +
                           "," + fmt(p_t, "%g") + "," + fmt(p_v, "%g") + "," + fmt(r.test_acc) +
                           "," + fmt(r.remaining_train_fraction) + "," +
                           fmt(r.remaining_val_fraction) + "," + std::to_string(seed) + "\n";
                }
            }
        }
        fs::create_directories(out_dir);
        write_file(out_dir + "/grid.csv", csv);
        return 0;
    });
}

int cmd_eval(const std::string& genotype_path, const std::string& config_path,
             const std::string& out_dir) {
    return guarded([&] {
        RunConfig cfg = load_config(config_path);
        PreparedRun prep = prepare_run(cfg);

        std::ifstream gin(genotype_path);
        if (!gin) throw ConfigError("cannot open genotype file '" + genotype_path + "'");
        std::stringstream gss;
        gss << gin.rdbuf();
        Genotype g;
        try {
            g = genotype_from_text(cfg.search.space, gss.str());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("genotype: ") + e.what());
        }

        // Train the discrete architecture from scratch on the full training
        // pool; architecture parameters are gone at this stage.
        RngStream eval_rng = RngStream(cfg.seed).fork(4);
        Supernet net = Supernet::build(cfg.search.space, eval_rng);
        std::vector<double> momentum(net.weights.size(), 0.0);
        const std::vector<int>& pool = prep.parts.train.active_ids();

        std::vector<Sample> all;
        all.reserve(pool.size());
        for (int id : pool) all.push_back({prep.dataset.sample(id), prep.dataset.labels[id]});

        std::vector<int> order(pool.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

        const int b = std::min<int>(cfg.eval.batch_size, static_cast<int>(order.size()));
        for (int epoch = 1; epoch <= cfg.eval.epochs; ++epoch) {
            eval_rng.shuffle(order);
            for (size_t start = 0; start < order.size(); start += b) {
                const size_t end = std::min(order.size(), start + b);
                std::vector<Sample> batch;
                batch.reserve(end - start);
                for (size_t i = start; i < end; ++i) batch.push_back(all[order[i]]);
                const BatchGrads grads = genotype_batch_grads(net, g, batch);
                if (!all_finite(grads.grad_w))
                    throw std::runtime_error("eval: non-finite gradient at epoch " +
                                             std::to_string(epoch));
                for (size_t i = 0; i < net.weights.size(); ++i) {
                    momentum[i] = cfg.eval.momentum_w * momentum[i] + grads.grad_w[i];
                    net.weights[i] -= cfg.eval.lr_w * momentum[i];
                }
            }
        }

        json j;
        j["test_accuracy"] = genotype_accuracy(net, g, prep.dataset, prep.parts.test_ids);
        j["train_accuracy"] = genotype_accuracy(net, g, prep.dataset, pool);
        j["epochs"] = cfg.eval.epochs;
        j["seed"] = cfg.seed;
        json ops = json::array();
        for (int k : g.chosen_op) ops.push_back(op_name(cfg.search.space.candidate_ops[k]));
        j["genotype"] = ops;

        std::string dir = out_dir;
        if (dir.empty()) {
            const fs::path parent = fs::path(genotype_path).parent_path();
            dir = parent.empty() ? "." : parent.string();
        }
        fs::create_directories(dir);
        write_file(dir + "/eval.json", j.dump(2) + "\n");
        return 0;
    });
}

int cmd_plot(const std::string& run_dir) {
    return guarded([&] {
        emit_svg(run_dir + "/trajectory.csv", run_dir + "/plots.svg");
        return 0;
    });
}

}  // namespace bdp
