#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bdp/bilevel.hpp"
#include "bdp/data.hpp"

// JSON experiment configuration. The schema is strict: unknown keys are
// rejected so a typo cannot silently fall back to a default.

namespace bdp {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DatasetSpec {
    enum class Kind { Blobs, Csv };
    Kind kind = Kind::Blobs;
    BlobLayout layout = BlobLayout::XorRings;
    int classes = 3;
    int per_class = 200;
    int dim = 2;
    double noise_sigma = 0.25;
    std::string csv_path;
};

struct EvalConfig {
    int epochs = 60;
    int batch_size = 64;
    double lr_w = 0.05;
    double momentum_w = 0.9;
};

struct GridConfig {
    std::vector<std::pair<Criterion, Criterion>> criteria;
    std::vector<std::pair<double, double>> ratios;
    std::vector<uint64_t> seeds;  // empty: use the master seed
};

struct RunConfig {
    uint64_t seed = 1;
    DatasetSpec dataset;
    SplitSpec split;          // seed is filled from the master seed
    SearchConfig search;      // space nested; sub-seed derived from the master seed
    EvalConfig eval;
    GridConfig grid;
    bool compute_taylor_bound = true;
    bool raw_alpha_distance = false;

    // Set when the config leaves them implicit; resolved against the dataset.
    bool space_dim_explicit = false;
    bool space_classes_explicit = false;
};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);

struct PreparedRun {
    Dataset dataset;
    Split parts;
};

// Materializes the dataset, resolves the space against it, derives the
// component sub-seeds, and performs the split.
PreparedRun prepare_run(RunConfig& cfg);

}  // namespace bdp
