#pragma once

#include <string>
#include <vector>

#include "bdp/numcore.hpp"
#include "bdp/set_state.hpp"

// Dataset creation and ingestion: seeded synthetic tasks, CSV round-trip,
// and the train/validation/test split that seeds the search pools.

namespace bdp {

struct Dataset {
    Mat64 features;           // samples x feature_dim
    std::vector<int> labels;  // class index per sample
    int num_classes = 0;

    int size() const { return features.rows; }
    int dim() const { return features.cols; }
    Vec64 sample(int i) const { return features.row(i); }
    void validate() const;  // throws
};

enum class BlobLayout { Separable, XorRings };

// Separable: one Gaussian blob per class at well-spaced centers.
// XorRings: classes on overlapping concentric rings, so that no affine
// classifier does well and the activation ops have to carry the task.
// Both layouts produce exactly per_class samples per class.
Dataset gen_blobs(int num_classes, int per_class, int dim, double noise_sigma,
                  BlobLayout layout, uint64_t seed);

// CSV with header "f0,...,f{d-1},label"; label is the last column.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

struct SplitSpec {
    double train_fraction = 0.4;  // of the whole dataset
    double test_fraction = 0.2;   // carved out first, invisible to the search
    uint64_t seed = 0;
    bool stratified = true;
};

struct Split {
    SetState train;
    SetState val;
    std::vector<int> test_ids;
};

// Disjoint, exhaustive partition; validation takes the remainder.
Split split(const Dataset& ds, const SplitSpec& spec);

}  // namespace bdp
