#include "bdp/set_state.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bdp {

SetState SetState::create(std::vector<int> ids, const std::vector<int>& all_labels,
                          int num_classes) {
    SetState s;
    s.labels_ = all_labels;
    s.active_flag_.assign(all_labels.size(), 0);
    s.class_counts_.assign(num_classes, 0);
    s.history_.resize(all_labels.size());
    for (int id : ids) {
        if (id < 0 || id >= static_cast<int>(all_labels.size()))
            throw std::invalid_argument("SetState: id out of range");
        if (s.active_flag_[id]) throw std::invalid_argument("SetState: duplicate id");
        s.active_flag_[id] = 1;
        const int label = all_labels[id];
        if (label < 0 || label >= num_classes)
            throw std::invalid_argument("SetState: label out of range");
        ++s.class_counts_[label];
    }
    s.active_ids_ = std::move(ids);
    s.initial_size_ = static_cast<int>(s.active_ids_.size());
    return s;
}

void SetState::record_error(int id, int epoch, double e) {
    if (!is_active(id))
        throw std::logic_error("record_error: sample " + std::to_string(id) + " is not active");
    auto& h = history_[id];
    if (!h.empty() && h.back().first == epoch) return;  // first visit wins
    h.emplace_back(epoch, e);
}

bool SetState::has_entry(int id, int epoch) const {
    const auto& h = history_[id];
    for (auto it = h.rbegin(); it != h.rend(); ++it) {
        if (it->first == epoch) return true;
        if (it->first < epoch) return false;
    }
    return false;
}

double SetState::entry(int id, int epoch) const {
    const auto& h = history_[id];
    for (auto it = h.rbegin(); it != h.rend(); ++it) {
        if (it->first == epoch) return it->second;
        if (it->first < epoch) break;
    }
    throw std::runtime_error("SetState: no error recorded for sample " + std::to_string(id) +
                             " at epoch " + std::to_string(epoch));
}

std::vector<double> SetState::window_errors(int id, int t0, int window) const {
    const auto& h = history_[id];
    std::vector<double> out;
    out.reserve(window);
    size_t pos = 0;
    for (int epoch = t0; epoch < t0 + window; ++epoch) {
        while (pos < h.size() && h[pos].first < epoch) ++pos;
        if (pos >= h.size() || h[pos].first != epoch)
            throw std::runtime_error("insufficient history: sample " + std::to_string(id) +
                                     " lacks epoch " + std::to_string(epoch));
        out.push_back(h[pos].second);
    }
    return out;
}

void SetState::remove(const std::vector<int>& ids) {
    for (int id : ids) {
        if (!is_active(id))
            throw std::logic_error("SetState::remove: sample " + std::to_string(id) +
                                   " is not active");
        active_flag_[id] = 0;
        --class_counts_[labels_[id]];
    }
    std::erase_if(active_ids_, [this](int id) { return !active_flag_[id]; });
}

}  // namespace bdp
