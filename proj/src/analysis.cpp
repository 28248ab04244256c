#include "bdp/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bdp {

Vec64 hvp(const GradFn& grad, const Vec64& x, const Vec64& v, double h) {
    if (h <= 0.0) throw std::invalid_argument("hvp: h must be positive");
    const double vnorm = norm2(v);
    if (vnorm < 1e-12) throw std::invalid_argument("hvp: direction is (near) zero");

    Vec64 plus = x;
    Vec64 minus = x;
    for (size_t i = 0; i < x.size(); ++i) {
        const double step = h * v[i] / vnorm;
        plus[i] += step;
        minus[i] -= step;
    }
    const Vec64 gp = grad(plus);
    const Vec64 gm = grad(minus);
    if (gp.size() != x.size() || gm.size() != x.size())
        throw std::runtime_error("hvp: gradient has wrong dimension");
    if (!all_finite(gp) || !all_finite(gm))
        throw std::runtime_error("hvp: non-finite gradient at probe point");

    Vec64 out(x.size());
    const double scale = vnorm / (2.0 * h);
    for (size_t i = 0; i < x.size(); ++i) out[i] = (gp[i] - gm[i]) * scale;
    return out;
}

double dominant_eigenvalue(const GradFn& grad, const Vec64& x, RngStream& rng,
                           int max_iters, double tol, double h) {
    if (h <= 0.0) h = 1e-3 * (norm2(x) + 1.0);
    const auto op = [&](const Vec64& v) { return hvp(grad, x, v, h); };
    return power_iteration(op, static_cast<int>(x.size()), max_iters, tol, rng).eigval;
}

double dominant_eigenvalue(const Supernet& net, const ArchParams& alpha,
                           const std::vector<Sample>& val_samples, RngStream& rng,
                           int max_iters, double tol) {
    if (val_samples.empty())
        throw std::invalid_argument("dominant_eigenvalue: empty validation set");
    const int rows = alpha.alpha.rows;
    const int cols = alpha.alpha.cols;

    const GradFn grad = [&](const Vec64& flat) {
        ArchParams a;
        a.alpha = Mat64(rows, cols);
        a.alpha.data = flat;
        const BatchGrads g = evaluate_batch(net, a, val_samples);
        return g.grad_alpha.data;
    };
    return dominant_eigenvalue(grad, alpha.alpha.data, rng, max_iters, tol);
}

double taylor_bound(double eig_or_norm, const ArchParams& alpha_star, const Genotype& alpha_hat,
                    bool raw_alpha_space) {
    const Mat64& a = alpha_star.alpha;
    if (static_cast<int>(alpha_hat.chosen_op.size()) != a.rows)
        throw std::invalid_argument("taylor_bound: genotype length does not match alpha rows");
    double dist2 = 0.0;
    for (int e = 0; e < a.rows; ++e) {
        const int chosen = alpha_hat.chosen_op[e];
        if (chosen < 0 || chosen >= a.cols)
            throw std::invalid_argument("taylor_bound: genotype op index out of range");
        const Vec64 ref = raw_alpha_space ? a.row(e) : softmax(a.row(e));
        for (int k = 0; k < a.cols; ++k) {
            const double d = (k == chosen ? 1.0 : 0.0) - ref[k];
            dist2 += d * d;
        }
    }
    return std::abs(eig_or_norm) * dist2;
}

std::vector<HeatmapRow> export_heatmap(const ArchParams& alpha) {
    std::vector<HeatmapRow> rows;
    rows.reserve(alpha.alpha.rows);
    for (int e = 0; e < alpha.alpha.rows; ++e) {
        HeatmapRow r;
        r.edge = e;
        r.beta = softmax(alpha.alpha.row(e));
        r.chosen = argmax(alpha.alpha.row(e));
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_heatmap_csv(const SpaceConfig& space, const ArchParams& alpha, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_heatmap_csv: cannot open '" + path + "'");
    out << "edge";
    for (OpKind k : space.candidate_ops) out << "," << op_name(k);
    out << ",chosen\n";

    const auto refs = edge_refs(space);
    const auto rows = export_heatmap(alpha);
    char buf[32];
    for (const auto& r : rows) {
        const auto& ref = refs[r.edge];
        out << "cell" << ref.cell << ".edge" << ref.src << "->" << ref.dst;
        for (double b : r.beta) {
            std::snprintf(buf, sizeof(buf), ",%.6f", b);
            out << buf;
        }
        out << "," << op_name(space.candidate_ops[r.chosen]) << "\n";
    }
    if (!out) throw std::runtime_error("write_heatmap_csv: write to '" + path + "' failed");
}

}  // namespace bdp
