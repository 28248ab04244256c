#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bdp/numcore.hpp"

// Cell-based search space: DAG cells whose edges carry a softmax-weighted
// mixture of candidate operations, a linear classifier head, and analytic
// gradients for both the operation weights and the architecture logits.

namespace bdp {

enum class OpKind { Zero, Identity, Linear, LinearAct, MeanPool };

const char* op_name(OpKind k);
std::optional<OpKind> op_from_name(const std::string& name);
bool op_is_parametric(OpKind k);

struct SpaceConfig {
    int nodes_per_cell = 3;
    std::vector<OpKind> candidate_ops = {OpKind::Zero, OpKind::Identity, OpKind::Linear,
                                         OpKind::LinearAct, OpKind::MeanPool};
    int feature_dim = 2;
    int num_cells = 1;
    int num_classes = 2;

    int num_ops() const { return static_cast<int>(candidate_ops.size()); }
    int edges_per_cell() const { return nodes_per_cell * (nodes_per_cell - 1) / 2; }
    int total_edges() const { return edges_per_cell() * num_cells; }
    void validate() const;  // throws std::invalid_argument
};

struct EdgeRef {
    int cell;
    int src;
    int dst;  // src < dst within the cell
};

// Canonical edge order: cell-major, then dst ascending, then src ascending.
std::vector<EdgeRef> edge_refs(const SpaceConfig& space);

struct ArchParams {
    Mat64 alpha;  // (total_edges x |candidate_ops|)
};

struct Genotype {
    std::vector<int> chosen_op;  // per edge, index into candidate_ops
};

// All trainable weights live in one flat bank. Layout, in order:
//   per edge (canonical order), per parametric candidate op (candidate order):
//     W (feature_dim x feature_dim, row-major), b (feature_dim)
//   classifier head: W (num_classes x feature_dim, row-major), b (num_classes)
class Supernet {
public:
    SpaceConfig space;
    std::vector<double> weights;

    // -1 for parameter-free ops
    long edge_op_offset(int edge, int op_index) const;
    long head_w_offset() const { return head_w_offset_; }
    long head_b_offset() const { return head_b_offset_; }
    long param_count() const { return static_cast<long>(weights.size()); }

    static Supernet build(const SpaceConfig& space, RngStream& rng);

private:
    std::vector<long> offsets_;  // total_edges * num_ops entries
    long head_w_offset_ = 0;
    long head_b_offset_ = 0;
};

long param_count(const SpaceConfig& space);

struct Sample {
    Vec64 x;
    int label;
};

struct EdgeTape {
    std::vector<Vec64> op_out;  // per candidate op; empty when the op was skipped (beta == 0)
};

struct Tape {
    std::vector<std::vector<Vec64>> nodes;  // [cell][node]
    std::vector<EdgeTape> edges;            // per global edge
    Vec64 features;                         // last node of the last cell
    Vec64 logits;
    Vec64 probs;
};

struct ForwardOut {
    Vec64 probs;
    Tape tape;
};

// Mixture output of one edge for an explicit alpha row (used by tests and
// the heatmap export; the full forward pass inlines the same computation).
Vec64 mixed_edge_forward(const Supernet& net, int edge_index, const Vec64& alpha_row, const Vec64& x);

ForwardOut forward(const Supernet& net, const ArchParams& alpha, const Vec64& x);

struct PerSampleOut {
    Vec64 probs;
    double error;  // ||probs - onehot(label)||_2
};

struct BatchGrads {
    double loss = 0.0;              // mean softmax cross-entropy
    std::vector<double> grad_w;     // same layout as Supernet::weights
    Mat64 grad_alpha;               // same shape as ArchParams::alpha
    std::vector<PerSampleOut> per_sample;
};

// Analytic gradients of the mean batch loss. `tapes` must come from forward()
// calls on the same net/alpha, one per batch sample, in order.
BatchGrads backward(const Supernet& net, const ArchParams& alpha,
                    const std::vector<Sample>& batch, const std::vector<Tape>& tapes);

// forward() + backward() for a whole batch.
BatchGrads evaluate_batch(const Supernet& net, const ArchParams& alpha,
                          const std::vector<Sample>& batch);

// Per-edge argmax of alpha; ties resolve to the lowest op index.
Genotype discretize(const ArchParams& alpha);

Vec64 genotype_forward(const Supernet& net, const Genotype& g, const Vec64& x);

// Gradients for training a discrete genotype: only the chosen op per edge is
// evaluated, and no alpha gradient exists. grad_alpha is left empty.
BatchGrads genotype_batch_grads(const Supernet& net, const Genotype& g,
                                const std::vector<Sample>& batch);

// Text format, one line per edge: "cell<i>.edge<src>-><dst>: <op_name>"
std::string genotype_to_text(const SpaceConfig& space, const Genotype& g);
Genotype genotype_from_text(const SpaceConfig& space, const std::string& text);

}  // namespace bdp
