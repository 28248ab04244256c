#include "bdp/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdp {

void SearchConfig::validate() const {
    space.validate();
    if (epochs < 1) throw std::invalid_argument("search: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("search: batch_size must be >= 1");
    if (lr_w <= 0.0 || lr_alpha <= 0.0)
        throw std::invalid_argument("search: learning rates must be positive");
    if (momentum_w < 0.0 || momentum_w >= 1.0)
        throw std::invalid_argument("search: momentum must be in [0, 1)");
    if (prune_mode == PruneMode::Progressive) {
        if (prune.interval < 1) throw std::invalid_argument("prune: interval must be >= 1");
        if (epochs % prune.interval != 0)
            throw std::invalid_argument("prune: interval must divide epochs");
        if (prune.p_train < 0.0 || prune.p_train > 100.0 || prune.p_val < 0.0 ||
            prune.p_val > 100.0)
            throw std::invalid_argument("prune: ratios must be in [0, 100]");
    }
    if (prune_mode == PruneMode::OneShot) {
        if (one_shot.warmup_epochs < 1 || one_shot.warmup_epochs > epochs)
            throw std::invalid_argument("one_shot: warmup_epochs must be in [1, epochs]");
        if (one_shot.fraction < 0.0 || one_shot.fraction > 100.0)
            throw std::invalid_argument("one_shot: fraction must be in [0, 100]");
    }
}

UpdateResult update_alpha(const Supernet& net, ArchParams& alpha,
                          const std::vector<Sample>& batch, double lr_alpha,
                          Regularizer reg) {
    if (reg != Regularizer::None)
        throw std::invalid_argument("update_alpha: unknown regularizer hook");
    BatchGrads g = evaluate_batch(net, alpha, batch);
    if (!all_finite(g.grad_alpha.data))
        throw std::runtime_error("update_alpha: non-finite architecture gradient");
    for (size_t i = 0; i < alpha.alpha.data.size(); ++i)
        alpha.alpha.data[i] -= lr_alpha * g.grad_alpha.data[i];
    return {g.loss, std::move(g.per_sample)};
}

UpdateResult update_weights(Supernet& net, const ArchParams& alpha,
                            const std::vector<Sample>& batch, double lr_w,
                            double momentum, std::vector<double>& momentum_state) {
    if (momentum_state.size() != net.weights.size())
        throw std::invalid_argument("update_weights: momentum buffer size mismatch");
    BatchGrads g = evaluate_batch(net, alpha, batch);
    if (!all_finite(g.grad_w))
        throw std::runtime_error("update_weights: non-finite weight gradient");
    for (size_t i = 0; i < net.weights.size(); ++i) {
        momentum_state[i] = momentum * momentum_state[i] + g.grad_w[i];
        net.weights[i] -= lr_w * momentum_state[i];
    }
    return {g.loss, std::move(g.per_sample)};
}

Search::Search(const SearchConfig& cfg, const Dataset& ds, Split parts)
    : cfg_(cfg),
      ds_(ds),
      train_(std::move(parts.train)),
      val_(std::move(parts.val)),
      test_ids_(std::move(parts.test_ids)),
      net_(Supernet{}),
      alpha_{},
      shuffle_rng_(RngStream(cfg.seed).fork(11)),
      eig_rng_(RngStream(cfg.seed).fork(12)) {
    cfg_.validate();
    if (cfg_.space.feature_dim != ds.dim())
        throw std::invalid_argument("search: space feature_dim does not match dataset");
    if (cfg_.space.num_classes != ds.num_classes)
        throw std::invalid_argument("search: space num_classes does not match dataset");
    RngStream init_rng = RngStream(cfg.seed).fork(10);
    net_ = Supernet::build(cfg_.space, init_rng);
    // all-zero alpha: uniform mixture weights at epoch 0
    alpha_.alpha = Mat64(cfg_.space.total_edges(), cfg_.space.num_ops());
    momentum_.assign(net_.weights.size(), 0.0);
}

std::vector<Sample> Search::make_batch(const std::vector<int>& ids) const {
    std::vector<Sample> batch;
    batch.reserve(ids.size());
    for (int id : ids) batch.push_back({ds_.sample(id), ds_.labels[id]});
    return batch;
}

double Search::accuracy(const std::vector<int>& ids) const {
    return set_accuracy(net_, alpha_, ds_, ids);
}

EpochStats Search::run_epoch() {
    if (train_.size() == 0 || val_.size() == 0) throw std::runtime_error("set exhausted");
    const int epoch = ++epoch_;

    std::vector<int> train_order = train_.active_ids();
    std::vector<int> val_order = val_.active_ids();
    shuffle_rng_.shuffle(train_order);
    shuffle_rng_.shuffle(val_order);

    const int bt = std::min<int>(cfg_.batch_size, static_cast<int>(train_order.size()));
    const int bv = std::min<int>(cfg_.batch_size, static_cast<int>(val_order.size()));
    const auto steps_for = [](size_t n, int b) { return (n + b - 1) / static_cast<size_t>(b); };
    const size_t steps = std::max(steps_for(train_order.size(), bt),
                                  steps_for(val_order.size(), bv));

    // The shorter set cycles: each step takes the next slice from a cyclic
    // cursor over the epoch's shuffled order (no reshuffle on wrap).
    size_t tcur = 0;
    size_t vcur = 0;
    const auto take = [](const std::vector<int>& order, size_t& cur, int count) {
        std::vector<int> ids;
        ids.reserve(count);
        for (int i = 0; i < count; ++i) {
            ids.push_back(order[cur]);
            cur = (cur + 1) % order.size();
        }
        return ids;
    };

    double val_loss_sum = 0.0;
    double train_loss_sum = 0.0;
    for (size_t s = 0; s < steps; ++s) {
        const std::vector<int> val_ids = take(val_order, vcur, bv);
        const UpdateResult va = update_alpha(net_, alpha_, make_batch(val_ids), cfg_.lr_alpha,
                                             cfg_.regularizer);
        val_loss_sum += va.loss;
        for (size_t i = 0; i < val_ids.size(); ++i)
            val_.record_error(val_ids[i], epoch, va.per_sample[i].error);

        const std::vector<int> train_ids = take(train_order, tcur, bt);
        const UpdateResult wr = update_weights(net_, alpha_, make_batch(train_ids), cfg_.lr_w,
                                               cfg_.momentum_w, momentum_);
        train_loss_sum += wr.loss;
        for (size_t i = 0; i < train_ids.size(); ++i)
            train_.record_error(train_ids[i], epoch, wr.per_sample[i].error);
    }

    EpochStats st;
    st.epoch = epoch;
    st.batch_pairs = static_cast<int>(steps);
    st.train_loss = train_loss_sum / static_cast<double>(steps);
    st.val_loss = val_loss_sum / static_cast<double>(steps);
    st.train_acc = accuracy(train_.active_ids());
    st.val_acc = accuracy(val_.active_ids());
    st.test_acc = accuracy(test_ids_);
    st.remaining_train = train_.size();
    st.remaining_val = val_.size();
    st.balance_train = balance_degree(train_.class_counts());
    st.balance_val = balance_degree(val_.class_counts());
    return st;
}

void Search::prune_progressive(int epoch) {
    const int window = cfg_.prune.interval;
    const int t0 = epoch - window + 1;
    const int n_rounds = cfg_.rounds();

    struct Target {
        SetState* set;
        const char* name;
        double percent;
        Criterion criterion;
    };
    const Target targets[] = {
        {&train_, "train", cfg_.prune.p_train, cfg_.prune.criterion_train},
        {&val_, "val", cfg_.prune.p_val, cfg_.prune.criterion_val},
    };

    for (const Target& t : targets) {
        ScoreTable scores;
        for (int id : t.set->active_ids())
            scores[id] = voe(t.set->window_errors(id, t0, window), window);

        const double b = balance_degree(t.set->class_counts());
        const double N = constraint_intensity(b, n_rounds, cfg_.prune.family);
        const auto caps = class_limits(t.set->class_counts(), N);
        const PruneOutcome outcome = prune_round(*t.set, scores, t.percent, t.criterion, caps);

        prune_log_.push_back({epoch, t.name, outcome.target,
                              static_cast<long>(outcome.pruned_ids.size()),
                              outcome.cap_limited, b, N});
        class_counts_.push_back({epoch, t.name, t.set->class_counts()});
    }
}

void Search::prune_one_shot(int epoch) {
    struct Target {
        SetState* set;
        const char* name;
        Criterion discard;
    };
    const Target targets[] = {
        {&train_, "train", cfg_.one_shot.discard_train},
        {&val_, "val", cfg_.one_shot.discard_val},
    };
    for (const Target& t : targets) {
        ScoreTable scores;
        for (int id : t.set->active_ids()) scores[id] = el2n(t.set->entry(id, epoch));
        const double b = balance_degree(t.set->class_counts());
        const auto pruned = one_shot_el2n_prune(*t.set, scores, t.discard, cfg_.one_shot.fraction);
        prune_log_.push_back({epoch, t.name, static_cast<long>(pruned.size()),
                              static_cast<long>(pruned.size()), false, b, 1.0});
        class_counts_.push_back({epoch, t.name, t.set->class_counts()});
    }
}

SearchResult Search::run() {
    std::vector<TrajectoryRecord> trajectory;
    trajectory.reserve(cfg_.epochs);

    for (int epoch = 1; epoch <= cfg_.epochs; ++epoch) {
        const EpochStats st = run_epoch();

        bool prune_epoch = false;
        if (cfg_.prune_mode == PruneMode::Progressive && epoch % cfg_.prune.interval == 0) {
            prune_progressive(epoch);
            prune_epoch = true;
        } else if (cfg_.prune_mode == PruneMode::OneShot &&
                   epoch == cfg_.one_shot.warmup_epochs) {
            prune_one_shot(epoch);
            prune_epoch = true;
        }

        TrajectoryRecord rec;
        rec.epoch = epoch;
        rec.train_loss = st.train_loss;
        rec.val_loss = st.val_loss;
        rec.train_acc = st.train_acc;
        rec.val_acc = st.val_acc;
        rec.test_acc = st.test_acc;
        rec.remaining_train = train_.size();  // post-prune snapshot
        rec.remaining_val = val_.size();
        rec.balance_train = balance_degree(train_.class_counts());
        rec.balance_val = balance_degree(val_.class_counts());

        const bool want_eig = cfg_.eig_schedule == EigSchedule::EveryEpoch ||
                              (cfg_.eig_schedule == EigSchedule::PruneEpochs && prune_epoch);
        if (want_eig) {
            std::vector<Sample> val_samples = make_batch(val_.active_ids());
            rec.eig_max = dominant_eigenvalue(net_, alpha_, val_samples, eig_rng_);
        }
        trajectory.push_back(std::move(rec));
    }

    SearchResult res;
    res.genotype = discretize(alpha_);
    res.trajectory = std::move(trajectory);
    res.prune_log = std::move(prune_log_);
    res.class_counts = std::move(class_counts_);
    res.net = net_;
    res.alpha = alpha_;
    res.train_state = train_;
    res.val_state = val_;
    return res;
}

SearchResult run_search(const SearchConfig& cfg, const Dataset& ds, Split parts) {
    Search search(cfg, ds, std::move(parts));
    return search.run();
}

double set_accuracy(const Supernet& net, const ArchParams& alpha, const Dataset& ds,
                    const std::vector<int>& ids) {
    if (ids.empty()) return 0.0;
    int hits = 0;
    for (int id : ids) {
        const ForwardOut out = forward(net, alpha, ds.sample(id));
        if (argmax(out.probs) == ds.labels[id]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ids.size());
}

double genotype_accuracy(const Supernet& net, const Genotype& g, const Dataset& ds,
                         const std::vector<int>& ids) {
    if (ids.empty()) return 0.0;
    int hits = 0;
    for (int id : ids) {
        const Vec64 probs = genotype_forward(net, g, ds.sample(id));
        if (argmax(probs) == ds.labels[id]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(ids.size());
}

}  // namespace bdp
