#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bdp/numcore.hpp"
#include "bdp/supernet.hpp"

// Search-effectiveness instrumentation: Hessian-vector products of the
// validation loss in alpha, dominant-eigenvalue estimation, the projection
// performance bound, and the operation-weight heatmap export.

namespace bdp {

struct TrajectoryRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    double test_acc = 0.0;
    int remaining_train = 0;
    int remaining_val = 0;
    double balance_train = 1.0;
    double balance_val = 1.0;
    std::optional<double> eig_max;  // present only on epochs where it was computed
};

using GradFn = std::function<Vec64(const Vec64&)>;

// Symmetric finite-difference Hessian-vector product:
//   (grad(x + h v_hat) - grad(x - h v_hat)) / (2h) * ||v||
Vec64 hvp(const GradFn& grad, const Vec64& x, const Vec64& v, double h);

// Dominant eigenvalue of the Hessian behind `grad`, by power iteration over
// the hvp operator. h defaults to 1e-3 * (||x|| + 1).
double dominant_eigenvalue(const GradFn& grad, const Vec64& x, RngStream& rng,
                           int max_iters = 50, double tol = 1e-4, double h = 0.0);

// Same estimator with the gradient of the mean validation loss in alpha.
double dominant_eigenvalue(const Supernet& net, const ArchParams& alpha,
                           const std::vector<Sample>& val_samples, RngStream& rng,
                           int max_iters = 50, double tol = 1e-4);

// Performance-drop bound |eig| * ||onehot(genotype) - alpha*||_F^2.
// The distance is measured between one-hot rows and softmax(alpha) rows by
// default; `raw_alpha_space` switches to raw alpha rows.
double taylor_bound(double eig_or_norm, const ArchParams& alpha_star, const Genotype& alpha_hat,
                    bool raw_alpha_space = false);

struct HeatmapRow {
    int edge = 0;
    Vec64 beta;      // softmax of the alpha row; sums to 1
    int chosen = 0;  // argmax column, matches discretize
};

std::vector<HeatmapRow> export_heatmap(const ArchParams& alpha);

// heatmap.csv: header "edge,<op names...>,chosen", beta values to 6 decimals.
void write_heatmap_csv(const SpaceConfig& space, const ArchParams& alpha, const std::string& path);

}  // namespace bdp
