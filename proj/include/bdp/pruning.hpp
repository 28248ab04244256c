#pragma once

#include <map>
#include <string>
#include <vector>

#include "bdp/set_state.hpp"

// Data pruning core: EL2N and VoE sample scores, Low/High criteria,
// the progressive pruning round, and the class-balance constraint family.

namespace bdp {

enum class Criterion { Low, High };
enum class ConstraintFamily { None, A, B, C, D, E, F };

const char* criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);
const char* family_name(ConstraintFamily f);
ConstraintFamily family_from_name(const std::string& name);

struct PruneConfig {
    int interval = 10;                  // epochs between rounds
    double p_train = 15.0;              // percent of the remaining training set
    double p_val = 15.0;                // percent of the remaining validation set
    Criterion criterion_train = Criterion::Low;
    Criterion criterion_val = Criterion::High;
    ConstraintFamily family = ConstraintFamily::A;
    int rounds = 0;                     // = epochs / interval, set alongside the search config
};

using ScoreTable = std::map<int, double>;  // sample id -> score

// EL2N at one epoch is the recorded prediction error itself.
double el2n(double recorded_error);

// Population variance of the errors across one window. `history` holds the
// window entries in epoch order and must contain exactly `window` values.
double voe(const std::vector<double>& history, int window);

// Mean pairwise min/max ratio of per-class counts. A pair of empty classes
// counts as balanced (1); a pair with exactly one empty class counts as 0.
double balance_degree(const std::vector<int>& class_counts);

// Constraint intensity N as a function of balance degree b and round count n.
// Family D diverges as b -> 0; the +inf result makes every per-class cap 0.
double constraint_intensity(double b, int n, ConstraintFamily family);

// Per-class caps for one round: floor(count / N).
std::vector<long> class_limits(const std::vector<int>& class_counts, double N);

struct PruneOutcome {
    std::vector<int> pruned_ids;
    long target = 0;           // round(p/100 * active)
    bool cap_limited = false;  // caps stopped the walk short of the target
};

// One pruning round. Candidates are sorted by score (ascending for Low,
// descending for High, ties by ascending id) and removed greedily while
// their class cap allows. Removing fewer than `target` because of caps is
// a valid outcome. Scores must cover every active id.
PruneOutcome prune_round(SetState& set, const ScoreTable& scores, double percent,
                         Criterion criterion, const std::vector<long>& caps);

// One-shot EL2N experiment mode: discard the indicated scoring half in one
// cut, with no balance constraint. `discard` Low removes the lowest-score half.
std::vector<int> one_shot_el2n_prune(SetState& set, const ScoreTable& scores,
                                     Criterion discard, double fraction_percent = 50.0);

}  // namespace bdp
