#pragma once

#include <string>
#include <vector>

#include "bdp/analysis.hpp"
#include "bdp/data.hpp"
#include "bdp/pruning.hpp"
#include "bdp/supernet.hpp"

// The alternating search loop: first-order alpha updates on validation
// batches, momentum SGD on the supernet weights over training batches,
// per-sample error recording, and the periodic pruning rounds.

namespace bdp {

enum class Regularizer { None };
enum class PruneMode { Progressive, OneShot, Off };
enum class EigSchedule { PruneEpochs, EveryEpoch, Off };

struct OneShotSpec {
    int warmup_epochs = 10;
    Criterion discard_train = Criterion::Low;
    Criterion discard_val = Criterion::High;
    double fraction = 50.0;  // percent discarded per set
};

struct SearchConfig {
    int epochs = 50;
    int batch_size = 64;
    double lr_w = 0.025;
    double lr_alpha = 3e-3;
    double momentum_w = 0.9;
    uint64_t seed = 0;
    SpaceConfig space;
    PruneConfig prune;
    PruneMode prune_mode = PruneMode::Progressive;
    OneShotSpec one_shot;
    Regularizer regularizer = Regularizer::None;
    EigSchedule eig_schedule = EigSchedule::PruneEpochs;

    void validate() const;  // throws; also derives prune.rounds
    int rounds() const { return epochs / prune.interval; }
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;  // mean over this epoch's weight updates
    double val_loss = 0.0;    // mean over this epoch's alpha updates
    double train_acc = 0.0;   // full-sweep accuracies at epoch end
    double val_acc = 0.0;
    double test_acc = 0.0;
    int remaining_train = 0;
    int remaining_val = 0;
    double balance_train = 1.0;
    double balance_val = 1.0;
    int batch_pairs = 0;
};

struct UpdateResult {
    double loss = 0.0;
    std::vector<PerSampleOut> per_sample;  // aligned with the batch order
};

// One first-order step on alpha: alpha -= lr * grad_alpha(L_val on batch).
UpdateResult update_alpha(const Supernet& net, ArchParams& alpha,
                          const std::vector<Sample>& batch, double lr_alpha,
                          Regularizer reg = Regularizer::None);

// One SGD-with-momentum step on the weights; alpha is untouched.
UpdateResult update_weights(Supernet& net, const ArchParams& alpha,
                            const std::vector<Sample>& batch, double lr_w,
                            double momentum, std::vector<double>& momentum_state);

struct PruneRoundLog {
    int epoch = 0;
    std::string set_name;  // "train" or "val"
    long target = 0;
    long removed = 0;
    bool cap_limited = false;
    double balance_before = 1.0;
    double intensity = 1.0;  // N used for the caps
};

struct ClassCountRecord {
    int epoch = 0;
    std::string set_name;
    std::vector<int> counts;
};

struct SearchResult {
    Genotype genotype;
    std::vector<TrajectoryRecord> trajectory;
    std::vector<PruneRoundLog> prune_log;
    std::vector<ClassCountRecord> class_counts;  // post-prune snapshots
    Supernet net;
    ArchParams alpha;
    SetState train_state;
    SetState val_state;
};

// Drives the search epoch by epoch. Exposed stepwise so tests can inspect
// state between epochs; run() is the full loop.
class Search {
public:
    Search(const SearchConfig& cfg, const Dataset& ds, Split parts);

    // Paired iteration over both shuffled sets; the shorter set cycles.
    // Every active sample receives one recorded error. Throws "set exhausted"
    // on an empty active set.
    EpochStats run_epoch();

    SearchResult run();

    const Supernet& net() const { return net_; }
    const ArchParams& alpha() const { return alpha_; }
    SetState& train_state() { return train_; }
    SetState& val_state() { return val_; }
    int current_epoch() const { return epoch_; }

private:
    void prune_progressive(int epoch);
    void prune_one_shot(int epoch);
    std::vector<Sample> make_batch(const std::vector<int>& ids) const;
    double accuracy(const std::vector<int>& ids) const;

    SearchConfig cfg_;
    const Dataset& ds_;
    SetState train_;
    SetState val_;
    std::vector<int> test_ids_;
    Supernet net_;
    ArchParams alpha_;
    std::vector<double> momentum_;
    RngStream shuffle_rng_;
    RngStream eig_rng_;
    int epoch_ = 0;  // last completed epoch, 1-based
    std::vector<PruneRoundLog> prune_log_;
    std::vector<ClassCountRecord> class_counts_;
};

SearchResult run_search(const SearchConfig& cfg, const Dataset& ds, Split parts);

// Accuracy of the mixed supernet / a discrete genotype over dataset rows.
double set_accuracy(const Supernet& net, const ArchParams& alpha, const Dataset& ds,
                    const std::vector<int>& ids);
double genotype_accuracy(const Supernet& net, const Genotype& g, const Dataset& ds,
                         const std::vector<int>& ids);

}  // namespace bdp
