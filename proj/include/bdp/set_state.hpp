#pragma once

#include <utility>
#include <vector>

// Live training/validation pool: active sample ids, per-sample prediction
// error histories, and per-class counts kept in sync with removals.

namespace bdp {

class SetState {
public:
    SetState() = default;

    // `all_labels` spans the whole dataset; `ids` selects the members.
    static SetState create(std::vector<int> ids, const std::vector<int>& all_labels,
                           int num_classes);

    const std::vector<int>& active_ids() const { return active_ids_; }
    const std::vector<int>& class_counts() const { return class_counts_; }
    int size() const { return static_cast<int>(active_ids_.size()); }
    int initial_size() const { return initial_size_; }
    bool is_active(int id) const { return active_flag_[id] != 0; }
    int label_of(int id) const { return labels_[id]; }

    // First visit per (sample, epoch) wins; later visits in the same epoch
    // are ignored. Recording for a pruned sample is a caller bug.
    void record_error(int id, int epoch, double e);

    bool has_entry(int id, int epoch) const;
    double entry(int id, int epoch) const;  // throws if missing

    // Errors for epochs [t0, t0 + window - 1], in epoch order.
    // Throws "insufficient history" when any epoch is missing.
    std::vector<double> window_errors(int id, int t0, int window) const;

    // Remove ids from the active set (order of survivors is preserved)
    // and decrement the class counts.
    void remove(const std::vector<int>& ids);

private:
    std::vector<int> active_ids_;
    std::vector<char> active_flag_;                            // indexed by id
    std::vector<int> labels_;                                  // whole dataset
    std::vector<int> class_counts_;
    std::vector<std::vector<std::pair<int, double>>> history_;  // id -> (epoch, e), append-only
    int initial_size_ = 0;
};

}  // namespace bdp
