#include "bdp/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bdp {

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Zero: return "zero";
        case OpKind::Identity: return "identity";
        case OpKind::Linear: return "linear";
        case OpKind::LinearAct: return "linearact";
        case OpKind::MeanPool: return "meanpool";
    }
    throw std::logic_error("op_name: unknown OpKind");
}

std::optional<OpKind> op_from_name(const std::string& name) {
    if (name == "zero") return OpKind::Zero;
    if (name == "identity") return OpKind::Identity;
    if (name == "linear") return OpKind::Linear;
    if (name == "linearact") return OpKind::LinearAct;
    if (name == "meanpool") return OpKind::MeanPool;
    return std::nullopt;
}

bool op_is_parametric(OpKind k) {
    return k == OpKind::Linear || k == OpKind::LinearAct;
}

void SpaceConfig::validate() const {
    if (nodes_per_cell < 2) throw std::invalid_argument("space: nodes_per_cell must be >= 2");
    if (candidate_ops.empty()) throw std::invalid_argument("space: candidate op set is empty");
    std::set<OpKind> seen(candidate_ops.begin(), candidate_ops.end());
    if (seen.size() != candidate_ops.size())
        throw std::invalid_argument("space: duplicate candidate ops");
    if (feature_dim < 1) throw std::invalid_argument("space: feature_dim must be >= 1");
    if (num_cells < 1) throw std::invalid_argument("space: num_cells must be >= 1");
    if (num_classes < 2) throw std::invalid_argument("space: num_classes must be >= 2");
}

std::vector<EdgeRef> edge_refs(const SpaceConfig& space) {
    std::vector<EdgeRef> refs;
    refs.reserve(space.total_edges());
    for (int c = 0; c < space.num_cells; ++c) {
        for (int dst = 1; dst < space.nodes_per_cell; ++dst) {
            for (int src = 0; src < dst; ++src) {
                refs.push_back({c, src, dst});
            }
        }
    }
    return refs;
}

long param_count(const SpaceConfig& space) {
    long parametric = 0;
    for (OpKind k : space.candidate_ops) {
        if (op_is_parametric(k)) ++parametric;
    }
    const long d = space.feature_dim;
    return space.total_edges() * parametric * (d * d + d) +
           static_cast<long>(space.num_classes) * d + space.num_classes;
}

long Supernet::edge_op_offset(int edge, int op_index) const {
    return offsets_[static_cast<size_t>(edge) * space.num_ops() + op_index];
}

Supernet Supernet::build(const SpaceConfig& space, RngStream& rng) {
    space.validate();
    Supernet net;
    net.space = space;

    const int d = space.feature_dim;
    const long per_op = static_cast<long>(d) * d + d;
    net.offsets_.assign(static_cast<size_t>(space.total_edges()) * space.num_ops(), -1);

    long off = 0;
    for (int e = 0; e < space.total_edges(); ++e) {
        for (int k = 0; k < space.num_ops(); ++k) {
            if (op_is_parametric(space.candidate_ops[k])) {
                net.offsets_[static_cast<size_t>(e) * space.num_ops() + k] = off;
                off += per_op;
            }
        }
    }
    net.head_w_offset_ = off;
    off += static_cast<long>(space.num_classes) * d;
    net.head_b_offset_ = off;
    off += space.num_classes;

    net.weights.resize(off);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& w : net.weights) w = rng.uniform(-s, s);
    return net;
}

namespace {

int local_edge_index(int src, int dst) { return dst * (dst - 1) / 2 + src; }

// Single-op application; stores the output so backward can reuse it.
Vec64 apply_op(const Supernet& net, OpKind kind, int edge, int op_index, const Vec64& x) {
    const int d = net.space.feature_dim;
    switch (kind) {
        case OpKind::Zero:
            return Vec64(d, 0.0);
        case OpKind::Identity:
            return x;
        case OpKind::MeanPool: {
            double m = 0.0;
            for (double v : x) m += v;
            m /= d;
            return Vec64(d, m);
        }
        case OpKind::Linear:
        case OpKind::LinearAct: {
            const long off = net.edge_op_offset(edge, op_index);
            const double* W = net.weights.data() + off;
            const double* b = W + static_cast<long>(d) * d;
            Vec64 out(d, 0.0);
            for (int r = 0; r < d; ++r) {
                double acc = b[r];
                const double* row = W + static_cast<long>(r) * d;
                for (int c = 0; c < d; ++c) acc += row[c] * x[c];
                out[r] = (kind == OpKind::LinearAct && acc < 0.0) ? 0.0 : acc;
            }
            return out;
        }
    }
    throw std::logic_error("apply_op: unknown OpKind");
}

// Forward over explicit per-edge beta rows. Ops with beta exactly 0 are
// skipped; their tape slot stays empty and backward treats them as absent.
Tape run_forward(const Supernet& net, const std::vector<Vec64>& betas, const Vec64& x) {
    const SpaceConfig& sp = net.space;
    const int d = sp.feature_dim;
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument("forward: input length does not match feature_dim");

    Tape tape;
    tape.nodes.resize(sp.num_cells);
    tape.edges.resize(sp.total_edges());
    const int epc = sp.edges_per_cell();

    Vec64 cell_input = x;
    for (int c = 0; c < sp.num_cells; ++c) {
        auto& nodes = tape.nodes[c];
        nodes.resize(sp.nodes_per_cell);
        nodes[0] = cell_input;
        for (int dst = 1; dst < sp.nodes_per_cell; ++dst) {
            Vec64 acc(d, 0.0);
            for (int src = 0; src < dst; ++src) {
                const int e = c * epc + local_edge_index(src, dst);
                const Vec64& beta = betas[e];
                auto& slot = tape.edges[e].op_out;
                slot.resize(sp.num_ops());
                for (int k = 0; k < sp.num_ops(); ++k) {
                    if (beta[k] == 0.0) continue;
                    slot[k] = apply_op(net, sp.candidate_ops[k], e, k, nodes[src]);
                    axpy(beta[k], slot[k], acc);
                }
            }
            if (!all_finite(acc))
                throw std::runtime_error("forward: non-finite activation at cell " +
                                         std::to_string(c) + " node " + std::to_string(dst));
            nodes[dst] = std::move(acc);
        }
        cell_input = nodes[sp.nodes_per_cell - 1];
    }

    tape.features = cell_input;
    const int M = sp.num_classes;
    const double* Wh = net.weights.data() + net.head_w_offset();
    const double* bh = net.weights.data() + net.head_b_offset();
    tape.logits.assign(M, 0.0);
    for (int r = 0; r < M; ++r) {
        double acc = bh[r];
        const double* row = Wh + static_cast<long>(r) * d;
        for (int c = 0; c < d; ++c) acc += row[c] * tape.features[c];
        tape.logits[r] = acc;
    }
    tape.probs = softmax(tape.logits);
    return tape;
}

// One-sample reverse pass. dlogits must already carry the 1/batch factor.
// gbeta, when non-null, accumulates d(loss)/d(beta) per edge and op.
void run_backward(const Supernet& net, const std::vector<Vec64>& betas, const Tape& tape,
                  const Vec64& dlogits, std::vector<double>& gw, std::vector<Vec64>* gbeta) {
    const SpaceConfig& sp = net.space;
    const int d = sp.feature_dim;
    const int M = sp.num_classes;
    const int epc = sp.edges_per_cell();

    const double* Wh = net.weights.data() + net.head_w_offset();
    double* gWh = gw.data() + net.head_w_offset();
    double* gbh = gw.data() + net.head_b_offset();

    Vec64 dfeat(d, 0.0);
    for (int r = 0; r < M; ++r) {
        const double g = dlogits[r];
        gbh[r] += g;
        const double* row = Wh + static_cast<long>(r) * d;
        double* grow = gWh + static_cast<long>(r) * d;
        for (int c = 0; c < d; ++c) {
            grow[c] += g * tape.features[c];
            dfeat[c] += row[c] * g;
        }
    }

    Vec64 incoming = std::move(dfeat);
    for (int c = sp.num_cells - 1; c >= 0; --c) {
        std::vector<Vec64> dnodes(sp.nodes_per_cell, Vec64(d, 0.0));
        dnodes[sp.nodes_per_cell - 1] = incoming;
        const auto& nodes = tape.nodes[c];

        // Node gradients are complete once every later node has been handled.
        for (int dst = sp.nodes_per_cell - 1; dst >= 1; --dst) {
            const Vec64& g = dnodes[dst];
            for (int src = 0; src < dst; ++src) {
                const int e = c * epc + local_edge_index(src, dst);
                const Vec64& beta = betas[e];
                const auto& outs = tape.edges[e].op_out;
                const Vec64& x = nodes[src];
                Vec64& dx = dnodes[src];

                for (int k = 0; k < sp.num_ops(); ++k) {
                    if (outs[k].empty()) continue;  // skipped op (beta == 0)
                    const double b = beta[k];
                    if (gbeta) (*gbeta)[e][k] += dot(g, outs[k]);
                    switch (sp.candidate_ops[k]) {
                        case OpKind::Zero:
                            break;
                        case OpKind::Identity:
                            axpy(b, g, dx);
                            break;
                        case OpKind::MeanPool: {
                            double s = 0.0;
                            for (double v : g) s += v;
                            s = b * s / d;
                            for (int i = 0; i < d; ++i) dx[i] += s;
                            break;
                        }
                        case OpKind::Linear:
                        case OpKind::LinearAct: {
                            const long off = net.edge_op_offset(e, k);
                            const double* W = net.weights.data() + off;
                            double* gW = gw.data() + off;
                            double* gb = gW + static_cast<long>(d) * d;
                            const bool relu = sp.candidate_ops[k] == OpKind::LinearAct;
                            for (int r = 0; r < d; ++r) {
                                double gr = b * g[r];
                                if (relu && outs[k][r] <= 0.0) gr = 0.0;
                                if (gr == 0.0) continue;
                                gb[r] += gr;
                                const double* wrow = W + static_cast<long>(r) * d;
                                double* gwrow = gW + static_cast<long>(r) * d;
                                for (int i = 0; i < d; ++i) {
                                    gwrow[i] += gr * x[i];
                                    dx[i] += wrow[i] * gr;
                                }
                            }
                            break;
                        }
                    }
                }
            }
        }
        incoming = std::move(dnodes[0]);
    }
}

std::vector<Vec64> betas_from_alpha(const SpaceConfig& sp, const ArchParams& alpha) {
    if (alpha.alpha.rows != sp.total_edges() || alpha.alpha.cols != sp.num_ops())
        throw std::invalid_argument("alpha shape does not match the space");
    std::vector<Vec64> betas(sp.total_edges());
    for (int e = 0; e < sp.total_edges(); ++e) betas[e] = softmax(alpha.alpha.row(e));
    return betas;
}

std::vector<Vec64> betas_from_genotype(const SpaceConfig& sp, const Genotype& g) {
    if (static_cast<int>(g.chosen_op.size()) != sp.total_edges())
        throw std::invalid_argument("genotype length does not match the space");
    std::vector<Vec64> betas(sp.total_edges(), Vec64(sp.num_ops(), 0.0));
    for (int e = 0; e < sp.total_edges(); ++e) {
        const int k = g.chosen_op[e];
        if (k < 0 || k >= sp.num_ops())
            throw std::invalid_argument("genotype references an op outside the candidate set");
        betas[e][k] = 1.0;
    }
    return betas;
}

Vec64 onehot(int label, int classes) {
    Vec64 y(classes, 0.0);
    y[label] = 1.0;
    return y;
}

BatchGrads batch_grads_impl(const Supernet& net, const std::vector<Vec64>& betas,
                            const std::vector<Sample>& batch, const std::vector<Tape>& tapes,
                            bool want_alpha) {
    const SpaceConfig& sp = net.space;
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    if (batch.size() != tapes.size()) throw std::invalid_argument("backward: tape/batch mismatch");

    BatchGrads out;
    out.grad_w.assign(net.weights.size(), 0.0);
    out.per_sample.reserve(batch.size());

    std::vector<Vec64> gbeta;
    if (want_alpha) gbeta.assign(sp.total_edges(), Vec64(sp.num_ops(), 0.0));

    const double scale = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (size_t i = 0; i < batch.size(); ++i) {
        const Tape& tape = tapes[i];
        const int y = batch[i].label;
        if (y < 0 || y >= sp.num_classes) throw std::invalid_argument("backward: label out of range");
        loss += -std::log(std::max(tape.probs[y], 1e-300));

        Vec64 target = onehot(y, sp.num_classes);
        out.per_sample.push_back({tape.probs, l2_distance(tape.probs, target)});

        Vec64 dlogits(sp.num_classes);
        for (int r = 0; r < sp.num_classes; ++r) dlogits[r] = (tape.probs[r] - target[r]) * scale;
        run_backward(net, betas, tape, dlogits, out.grad_w, want_alpha ? &gbeta : nullptr);
    }
    out.loss = loss * scale;

    if (want_alpha) {
        // Chain through the per-row softmax: dalpha_m = beta_m (gbeta_m - sum_k gbeta_k beta_k)
        out.grad_alpha = Mat64(sp.total_edges(), sp.num_ops());
        for (int e = 0; e < sp.total_edges(); ++e) {
            const Vec64& beta = betas[e];
            double mix = 0.0;
            for (int k = 0; k < sp.num_ops(); ++k) mix += gbeta[e][k] * beta[k];
            for (int k = 0; k < sp.num_ops(); ++k)
                out.grad_alpha(e, k) = beta[k] * (gbeta[e][k] - mix);
        }
    }
    return out;
}

}  // namespace

Vec64 mixed_edge_forward(const Supernet& net, int edge_index, const Vec64& alpha_row, const Vec64& x) {
    const SpaceConfig& sp = net.space;
    if (static_cast<int>(x.size()) != sp.feature_dim)
        throw std::invalid_argument("mixed_edge_forward: input length does not match feature_dim");
    if (static_cast<int>(alpha_row.size()) != sp.num_ops())
        throw std::invalid_argument("mixed_edge_forward: alpha row length mismatch");
    const Vec64 beta = softmax(alpha_row);
    Vec64 acc(sp.feature_dim, 0.0);
    for (int k = 0; k < sp.num_ops(); ++k) {
        if (beta[k] == 0.0) continue;
        Vec64 z = apply_op(net, sp.candidate_ops[k], edge_index, k, x);
        axpy(beta[k], z, acc);
    }
    return acc;
}

ForwardOut forward(const Supernet& net, const ArchParams& alpha, const Vec64& x) {
    const auto betas = betas_from_alpha(net.space, alpha);
    Tape tape = run_forward(net, betas, x);
    return {tape.probs, std::move(tape)};
}

BatchGrads backward(const Supernet& net, const ArchParams& alpha,
                    const std::vector<Sample>& batch, const std::vector<Tape>& tapes) {
    const auto betas = betas_from_alpha(net.space, alpha);
    return batch_grads_impl(net, betas, batch, tapes, /*want_alpha=*/true);
}

BatchGrads evaluate_batch(const Supernet& net, const ArchParams& alpha,
                          const std::vector<Sample>& batch) {
    const auto betas = betas_from_alpha(net.space, alpha);
    std::vector<Tape> tapes;
    tapes.reserve(batch.size());
    for (const Sample& s : batch) tapes.push_back(run_forward(net, betas, s.x));
    return batch_grads_impl(net, betas, batch, tapes, /*want_alpha=*/true);
}

Genotype discretize(const ArchParams& alpha) {
    Genotype g;
    g.chosen_op.reserve(alpha.alpha.rows);
    for (int e = 0; e < alpha.alpha.rows; ++e) g.chosen_op.push_back(argmax(alpha.alpha.row(e)));
    return g;
}

Vec64 genotype_forward(const Supernet& net, const Genotype& g, const Vec64& x) {
    const auto betas = betas_from_genotype(net.space, g);
    return run_forward(net, betas, x).probs;
}

BatchGrads genotype_batch_grads(const Supernet& net, const Genotype& g,
                                const std::vector<Sample>& batch) {
    const auto betas = betas_from_genotype(net.space, g);
    std::vector<Tape> tapes;
    tapes.reserve(batch.size());
    for (const Sample& s : batch) tapes.push_back(run_forward(net, betas, s.x));
    return batch_grads_impl(net, betas, batch, tapes, /*want_alpha=*/false);
}

std::string genotype_to_text(const SpaceConfig& space, const Genotype& g) {
    const auto refs = edge_refs(space);
    if (g.chosen_op.size() != refs.size())
        throw std::invalid_argument("genotype length does not match the space");
    std::string out;
    char line[96];
    for (size_t e = 0; e < refs.size(); ++e) {
        const int k = g.chosen_op[e];
        if (k < 0 || k >= space.num_ops())
            throw std::invalid_argument("genotype references an op outside the candidate set");
        std::snprintf(line, sizeof(line), "cell%d.edge%d->%d: %s\n", refs[e].cell, refs[e].src,
                      refs[e].dst, op_name(space.candidate_ops[k]));
        out += line;
    }
    return out;
}

Genotype genotype_from_text(const SpaceConfig& space, const std::string& text) {
    const auto refs = edge_refs(space);
    Genotype g;
    std::istringstream in(text);
    std::string line;
    size_t e = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (e >= refs.size()) throw std::invalid_argument("genotype text has too many edges");
        int cell = 0, src = 0, dst = 0;
        char name[32] = {0};
        if (std::sscanf(line.c_str(), "cell%d.edge%d->%d: %31s", &cell, &src, &dst, name) != 4)
            throw std::invalid_argument("genotype text: malformed line '" + line + "'");
        if (cell != refs[e].cell || src != refs[e].src || dst != refs[e].dst)
            throw std::invalid_argument("genotype text: edge order mismatch at line '" + line + "'");
        const auto kind = op_from_name(name);
        if (!kind) throw std::invalid_argument("genotype text: unknown op '" + std::string(name) + "'");
        const auto it = std::find(space.candidate_ops.begin(), space.candidate_ops.end(), *kind);
        if (it == space.candidate_ops.end())
            throw std::invalid_argument("genotype text: op '" + std::string(name) +
                                        "' is not in the candidate set");
        g.chosen_op.push_back(static_cast<int>(it - space.candidate_ops.begin()));
        ++e;
    }
    if (e != refs.size()) throw std::invalid_argument("genotype text has too few edges");
    return g;
}

}  // namespace bdp
