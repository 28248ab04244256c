#include "bdp/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bdp {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void Dataset::validate() const {
    if (features.rows == 0) throw std::invalid_argument("dataset: empty");
    if (static_cast<int>(labels.size()) != features.rows)
        throw std::invalid_argument("dataset: label count does not match sample count");
    if (num_classes < 2) throw std::invalid_argument("dataset: need at least 2 classes");
    for (int y : labels) {
        if (y < 0 || y >= num_classes) throw std::invalid_argument("dataset: label out of range");
    }
    if (!all_finite(features.data)) throw std::invalid_argument("dataset: non-finite feature");
}

Dataset gen_blobs(int num_classes, int per_class, int dim, double noise_sigma,
                  BlobLayout layout, uint64_t seed) {
    if (num_classes < 2) throw std::invalid_argument("gen_blobs: need at least 2 classes");
    if (per_class < 1) throw std::invalid_argument("gen_blobs: per_class must be >= 1");
    if (dim < 2) throw std::invalid_argument("gen_blobs: dim must be >= 2");

    RngStream rng(seed);
    Dataset ds;
    ds.num_classes = num_classes;
    ds.features = Mat64(num_classes * per_class, dim);
    ds.labels.resize(num_classes * per_class);

    int row = 0;
    for (int cls = 0; cls < num_classes; ++cls) {
        const double angle0 = 2.0 * kPi * cls / num_classes;
        for (int j = 0; j < per_class; ++j, ++row) {
            ds.labels[row] = cls;
            if (layout == BlobLayout::Separable) {
                // one blob per class on a circle of radius 4
                ds.features(row, 0) = 4.0 * std::cos(angle0) + rng.normal(0.0, noise_sigma);
                ds.features(row, 1) = 4.0 * std::sin(angle0) + rng.normal(0.0, noise_sigma);
                for (int k = 2; k < dim; ++k) ds.features(row, k) = rng.normal(0.0, noise_sigma);
            } else {
                // concentric rings with overlapping radial bands; each ring is
                // rotationally symmetric, so every affine cut mislabels a large
                // slice of at least one class
                const double r_mid = 1.2 * (cls + 1);
                const double r = rng.uniform(r_mid - 0.85, r_mid + 0.85);
                const double theta = rng.uniform(0.0, 2.0 * kPi);
                ds.features(row, 0) = r * std::cos(theta) + rng.normal(0.0, noise_sigma);
                ds.features(row, 1) = r * std::sin(theta) + rng.normal(0.0, noise_sigma);
                for (int k = 2; k < dim; ++k) ds.features(row, k) = rng.normal(0.0, noise_sigma);
            }
        }
    }
    ds.validate();
    return ds;
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file '" + path + "'");

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header.back() != "label")
        throw std::runtime_error("load_csv: line 1: header must be f0,...,f{d-1},label");
    const int dim = static_cast<int>(header.size()) - 1;
    for (int i = 0; i < dim; ++i) {
        if (header[i] != "f" + std::to_string(i))
            throw std::runtime_error("load_csv: line 1: expected column f" + std::to_string(i) +
                                     ", got '" + header[i] + "'");
    }

    std::vector<double> values;
    std::vector<int> labels;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (static_cast<int>(cells.size()) != dim + 1)
            throw std::runtime_error("load_csv: line " + std::to_string(lineno) + ": expected " +
                                     std::to_string(dim + 1) + " columns, got " +
                                     std::to_string(cells.size()));
        for (int i = 0; i < dim; ++i) {
            size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[i], &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != cells[i].size() || cells[i].empty())
                throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                                         ": non-numeric cell '" + cells[i] + "'");
            values.push_back(v);
        }
        size_t pos = 0;
        long y = 0;
        try {
            y = std::stol(cells[dim], &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != cells[dim].size() || cells[dim].empty() || y < 0)
            throw std::runtime_error("load_csv: line " + std::to_string(lineno) +
                                     ": label must be a non-negative integer, got '" + cells[dim] + "'");
        labels.push_back(static_cast<int>(y));
    }
    if (labels.empty()) throw std::runtime_error("load_csv: no data rows in '" + path + "'");

    Dataset ds;
    ds.num_classes = 1 + *std::max_element(labels.begin(), labels.end());
    ds.labels = std::move(labels);
    ds.features.rows = static_cast<int>(ds.labels.size());
    ds.features.cols = dim;
    ds.features.data = std::move(values);
    if (ds.num_classes < 2)
        throw std::runtime_error("load_csv: dataset has a single class");
    ds.validate();
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "' for writing");
    for (int i = 0; i < ds.dim(); ++i) out << "f" << i << ",";
    out << "label\n";
    char buf[40];
    for (int r = 0; r < ds.size(); ++r) {
        for (int c = 0; c < ds.dim(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(r, c));  // exact round-trip
            out << buf << ",";
        }
        out << ds.labels[r] << "\n";
    }
    if (!out) throw std::runtime_error("save_csv: write to '" + path + "' failed");
}

Split split(const Dataset& ds, const SplitSpec& spec) {
    ds.validate();
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw std::invalid_argument("split: train_fraction must be in (0, 1)");
    if (spec.test_fraction <= 0.0 || spec.test_fraction >= 1.0)
        throw std::invalid_argument("split: test_fraction must be in (0, 1)");
    if (spec.train_fraction + spec.test_fraction >= 1.0)
        throw std::invalid_argument("split: train + test fractions must leave room for validation");

    RngStream rng = RngStream(spec.seed).fork(2);
    std::vector<int> test_ids, train_ids, val_ids;

    auto carve = [&](std::vector<int>& ids) {
        rng.shuffle(ids);
        const long n = static_cast<long>(ids.size());
        long n_test = std::lround(spec.test_fraction * n);
        long n_train = std::lround(spec.train_fraction * n);
        if (n_test + n_train > n) n_train = n - n_test;
        test_ids.insert(test_ids.end(), ids.begin(), ids.begin() + n_test);
        train_ids.insert(train_ids.end(), ids.begin() + n_test, ids.begin() + n_test + n_train);
        val_ids.insert(val_ids.end(), ids.begin() + n_test + n_train, ids.end());
    };

    if (spec.stratified) {
        for (int cls = 0; cls < ds.num_classes; ++cls) {
            std::vector<int> ids;
            for (int i = 0; i < ds.size(); ++i) {
                if (ds.labels[i] == cls) ids.push_back(i);
            }
            carve(ids);
        }
    } else {
        std::vector<int> ids(ds.size());
        for (int i = 0; i < ds.size(); ++i) ids[i] = i;
        carve(ids);
    }

    if (train_ids.empty() || val_ids.empty() || test_ids.empty())
        throw std::runtime_error("split: produced an empty set (train " +
                                 std::to_string(train_ids.size()) + ", val " +
                                 std::to_string(val_ids.size()) + ", test " +
                                 std::to_string(test_ids.size()) + ")");

    std::sort(train_ids.begin(), train_ids.end());
    std::sort(val_ids.begin(), val_ids.end());
    std::sort(test_ids.begin(), test_ids.end());

    Split out;
    out.train = SetState::create(std::move(train_ids), ds.labels, ds.num_classes);
    out.val = SetState::create(std::move(val_ids), ds.labels, ds.num_classes);
    out.test_ids = std::move(test_ids);
    return out;
}

}  // namespace bdp
