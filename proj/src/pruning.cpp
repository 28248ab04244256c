#include "bdp/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bdp {

const char* criterion_name(Criterion c) { return c == Criterion::Low ? "low" : "high"; }

Criterion criterion_from_name(const std::string& name) {
    if (name == "low") return Criterion::Low;
    if (name == "high") return Criterion::High;
    throw std::invalid_argument("unknown criterion '" + name + "' (expected low|high)");
}

const char* family_name(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::None: return "none";
        case ConstraintFamily::A: return "A";
        case ConstraintFamily::B: return "B";
        case ConstraintFamily::C: return "C";
        case ConstraintFamily::D: return "D";
        case ConstraintFamily::E: return "E";
        case ConstraintFamily::F: return "F";
    }
    throw std::logic_error("family_name: unknown family");
}

ConstraintFamily family_from_name(const std::string& name) {
    if (name == "none" || name == "None") return ConstraintFamily::None;
    if (name.size() == 1) {
        switch (name[0]) {
            case 'A': case 'a': return ConstraintFamily::A;
            case 'B': case 'b': return ConstraintFamily::B;
            case 'C': case 'c': return ConstraintFamily::C;
            case 'D': case 'd': return ConstraintFamily::D;
            case 'E': case 'e': return ConstraintFamily::E;
            case 'F': case 'f': return ConstraintFamily::F;
        }
    }
    throw std::invalid_argument("unknown constraint family '" + name + "' (expected none|A..F)");
}

double el2n(double recorded_error) {
    if (!(recorded_error >= 0.0))
        throw std::invalid_argument("el2n: recorded error must be a finite non-negative value");
    return recorded_error;
}

double voe(const std::vector<double>& history, int window) {
    if (window < 1) throw std::invalid_argument("voe: window must be >= 1");
    if (static_cast<int>(history.size()) != window)
        throw std::invalid_argument("insufficient history: expected " + std::to_string(window) +
                                    " entries, got " + std::to_string(history.size()));
    // Welford's online update; the final M2 / n is the population variance.
    double mean = 0.0;
    double m2 = 0.0;
    for (int k = 0; k < window; ++k) {
        const double delta = history[k] - mean;
        mean += delta / (k + 1);
        m2 += delta * (history[k] - mean);
    }
    return m2 / window;
}

double balance_degree(const std::vector<int>& class_counts) {
    const int m = static_cast<int>(class_counts.size());
    if (m < 2) throw std::invalid_argument("balance_degree: need at least 2 classes");
    double sum = 0.0;
    for (int i = 0; i < m - 1; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const int lo = std::min(class_counts[i], class_counts[j]);
            const int hi = std::max(class_counts[i], class_counts[j]);
            if (lo < 0) throw std::invalid_argument("balance_degree: negative count");
            if (hi == 0) {
                sum += 1.0;  // both empty
            } else {
                sum += static_cast<double>(lo) / hi;
            }
        }
    }
    const double pairs = static_cast<double>(m) * (m - 1) / 2.0;
    return sum / pairs;
}

double constraint_intensity(double b, int n, ConstraintFamily family) {
    if (b < 0.0 || b > 1.0) throw std::invalid_argument("constraint_intensity: b must be in [0, 1]");
    if (n < 1) throw std::invalid_argument("constraint_intensity: n must be >= 1");
    const double nd = static_cast<double>(n);
    switch (family) {
        case ConstraintFamily::None: return 1.0;
        case ConstraintFamily::A: return nd * (1.0 - b * b) + 1.0;
        case ConstraintFamily::B: return std::pow(nd, 1.0 - b);
        case ConstraintFamily::C: return std::exp(nd * (1.0 - b));
        case ConstraintFamily::D:
            if (b == 0.0) return std::numeric_limits<double>::infinity();
            return 1.0 - nd * std::log(b);
        case ConstraintFamily::E: return nd * (1.0 - b) + 1.0;
        case ConstraintFamily::F: return nd * (1.0 - b * b * b) + 1.0;
    }
    throw std::invalid_argument("constraint_intensity: unknown family");
}

std::vector<long> class_limits(const std::vector<int>& class_counts, double N) {
    if (!(N >= 1.0))  // also rejects NaN
        throw std::invalid_argument("class_limits: N must be >= 1");
    std::vector<long> caps(class_counts.size(), 0);
    if (std::isinf(N)) return caps;
    for (size_t i = 0; i < class_counts.size(); ++i)
        caps[i] = static_cast<long>(std::floor(class_counts[i] / N));
    return caps;
}

namespace {

// Candidates ordered by score per the criterion; ties break by ascending id.
std::vector<int> sorted_candidates(const std::vector<int>& active_ids, const ScoreTable& scores,
                                   Criterion criterion) {
    std::vector<int> order = active_ids;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = scores.at(a);
        const double sb = scores.at(b);
        if (sa != sb) return criterion == Criterion::Low ? sa < sb : sa > sb;
        return a < b;
    });
    return order;
}

void check_scores_cover(const std::vector<int>& active_ids, const ScoreTable& scores) {
    for (int id : active_ids) {
        if (!scores.count(id))
            throw std::invalid_argument("score table is missing active sample " + std::to_string(id));
    }
}

}  // namespace

PruneOutcome prune_round(SetState& set, const ScoreTable& scores, double percent,
                         Criterion criterion, const std::vector<long>& caps) {
    if (percent < 0.0 || percent > 100.0)
        throw std::invalid_argument("prune_round: percent must be in [0, 100]");
    PruneOutcome out;
    out.target = std::llround(percent / 100.0 * set.size());
    if (out.target == 0) return out;
    check_scores_cover(set.active_ids(), scores);
    if (caps.size() != set.class_counts().size())
        throw std::invalid_argument("prune_round: caps size does not match class count");

    std::vector<long> removed_per_class(caps.size(), 0);
    const auto order = sorted_candidates(set.active_ids(), scores, criterion);
    for (int id : order) {
        if (static_cast<long>(out.pruned_ids.size()) >= out.target) break;
        const int cls = set.label_of(id);
        if (removed_per_class[cls] >= caps[cls]) continue;  // class cap exhausted
        ++removed_per_class[cls];
        out.pruned_ids.push_back(id);
    }
    out.cap_limited = static_cast<long>(out.pruned_ids.size()) < out.target;
    set.remove(out.pruned_ids);
    return out;
}

std::vector<int> one_shot_el2n_prune(SetState& set, const ScoreTable& scores,
                                     Criterion discard, double fraction_percent) {
    if (fraction_percent < 0.0 || fraction_percent > 100.0)
        throw std::invalid_argument("one_shot_el2n_prune: fraction must be in [0, 100]");
    check_scores_cover(set.active_ids(), scores);
    const long k = std::llround(fraction_percent / 100.0 * set.size());
    const auto order = sorted_candidates(set.active_ids(), scores, discard);
    std::vector<int> pruned(order.begin(), order.begin() + k);
    set.remove(pruned);
    return pruned;
}

}  // namespace bdp
