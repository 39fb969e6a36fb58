#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "latgeo/errors.hpp"
#include "latgeo/rng.hpp"
#include "latgeo/tensor.hpp"

namespace latgeo {

// N x D matrix of pixels in [0,1] plus integer labels. Immutable after
// construction; freely shareable.
struct Dataset {
    Tensor images;             // [N, D]
    std::vector<int> labels;   // length N
    std::string name;

    Dataset(Tensor imgs, std::vector<int> lbls, std::string nm)
        : images(std::move(imgs)), labels(std::move(lbls)), name(std::move(nm)) {
        validate();
    }

    int size() const { return images.shape()[0]; }
    int dim() const { return images.shape()[1]; }

    std::vector<double> row(int i) const {
        const double* p = images.data() + static_cast<std::size_t>(i) * dim();
        return std::vector<double>(p, p + dim());
    }

private:
    void validate() const {
        if (images.rank() != 2) throw DimensionError("dataset: images must be a matrix");
        if (static_cast<int>(labels.size()) != images.shape()[0]) {
            throw FormatError("dataset '" + name + "': " + std::to_string(images.shape()[0]) + " images but " +
                              std::to_string(labels.size()) + " labels");
        }
        for (double v : images.vec()) {
            if (!(v >= 0.0 && v <= 1.0)) throw NumericError("dataset '" + name + "': pixel outside [0,1]");
        }
        for (int l : labels) {
            if (l < 0) throw FormatError("dataset '" + name + "': negative label");
        }
    }
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("idx: truncated header in " + path);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

inline std::string hex_bytes(std::uint32_t v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02x %02x %02x %02x", (v >> 24) & 0xff, (v >> 16) & 0xff, (v >> 8) & 0xff,
                  v & 0xff);
    return buf;
}

}  // namespace detail

// IDX image/label pair (big-endian headers, magics 2051/2049). Pixels are
// scaled by 1/255; images are flattened row-major.
inline Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgf(images_path, std::ios::binary);
    if (!imgf) throw FormatError("idx: cannot open " + images_path);
    std::uint32_t magic = detail::read_be32(imgf, images_path);
    if (magic != 2051) {
        throw FormatError("idx: bad image magic in " + images_path + ": expected 00 00 08 03, got " +
                          detail::hex_bytes(magic));
    }
    std::uint32_t n = detail::read_be32(imgf, images_path);
    std::uint32_t rows = detail::read_be32(imgf, images_path);
    std::uint32_t cols = detail::read_be32(imgf, images_path);
    std::size_t d = std::size_t(rows) * cols;
    std::vector<unsigned char> raw(std::size_t(n) * d);
    imgf.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!imgf) throw FormatError("idx: truncated image data in " + images_path);

    std::ifstream lblf(labels_path, std::ios::binary);
    if (!lblf) throw FormatError("idx: cannot open " + labels_path);
    std::uint32_t lmagic = detail::read_be32(lblf, labels_path);
    if (lmagic != 2049) {
        throw FormatError("idx: bad label magic in " + labels_path + ": expected 00 00 08 01, got " +
                          detail::hex_bytes(lmagic));
    }
    std::uint32_t ln = detail::read_be32(lblf, labels_path);
    if (ln != n) {
        throw FormatError("idx: " + std::to_string(n) + " images in " + images_path + " but " + std::to_string(ln) +
                          " labels in " + labels_path);
    }
    std::vector<unsigned char> lraw(ln);
    lblf.read(reinterpret_cast<char*>(lraw.data()), static_cast<std::streamsize>(lraw.size()));
    if (!lblf) throw FormatError("idx: truncated label data in " + labels_path);

    Tensor images = Tensor::zeros({static_cast<int>(n), static_cast<int>(d)});
    for (std::size_t i = 0; i < raw.size(); ++i) images[i] = raw[i] / 255.0;
    std::vector<int> labels(lraw.begin(), lraw.end());
    return Dataset(std::move(images), std::move(labels), images_path);
}

// Rows whose label is in `classes`, order preserved.
inline Dataset filter_classes(const Dataset& ds, const std::set<int>& classes) {
    if (classes.empty()) throw FormatError("filter_classes: empty class set");
    std::vector<int> keep;
    for (int i = 0; i < ds.size(); ++i) {
        if (classes.count(ds.labels[i])) keep.push_back(i);
    }
    if (keep.empty()) throw FormatError("filter_classes: no rows with the requested classes in '" + ds.name + "'");
    Tensor images = Tensor::zeros({static_cast<int>(keep.size()), ds.dim()});
    std::vector<int> labels(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const double* src = ds.images.data() + static_cast<std::size_t>(keep[r]) * ds.dim();
        std::copy(src, src + ds.dim(), images.data() + r * ds.dim());
        labels[r] = ds.labels[keep[r]];
    }
    return Dataset(std::move(images), std::move(labels), ds.name);
}

// n rows drawn without replacement, deterministic in the seed.
inline Dataset subsample(const Dataset& ds, int n, std::uint64_t seed) {
    if (n <= 0 || n > ds.size()) {
        throw DimensionError("subsample: n=" + std::to_string(n) + " out of range for N=" + std::to_string(ds.size()));
    }
    Rng rng(derive_seed(seed, "subsample"));
    std::vector<std::uint64_t> idx = rng.sample_without_replacement(ds.size(), n);
    Tensor images = Tensor::zeros({n, ds.dim()});
    std::vector<int> labels(n);
    for (int r = 0; r < n; ++r) {
        const double* src = ds.images.data() + idx[r] * ds.dim();
        std::copy(src, src + ds.dim(), images.data() + static_cast<std::size_t>(r) * ds.dim());
        labels[r] = ds.labels[static_cast<int>(idx[r])];
    }
    return Dataset(std::move(images), std::move(labels), ds.name);
}

// k isotropic Gaussian blobs with centers on the unit circle in the first two
// coordinates (zero elsewhere), then the affine shift u -> (u+1)/2 and a clamp
// into [0,1]. Labels are cluster indices.
inline Dataset synthetic_clusters(int k, int per_cluster, int dim, double spread, std::uint64_t seed) {
    if (k < 1) throw DimensionError("synthetic_clusters: k must be >= 1");
    if (per_cluster < 1) throw DimensionError("synthetic_clusters: per_cluster must be >= 1");
    if (dim < 2) throw DimensionError("synthetic_clusters: dim must be >= 2");
    if (!(spread > 0.0)) throw NumericError("synthetic_clusters: spread must be positive");
    Rng rng(derive_seed(seed, "synthetic"));
    int n = k * per_cluster;
    Tensor images = Tensor::zeros({n, dim});
    std::vector<int> labels(n);
    const double two_pi = 6.283185307179586476925286766559;
    for (int c = 0; c < k; ++c) {
        double angle = two_pi * c / k;
        std::vector<double> center(dim, 0.0);
        center[0] = std::cos(angle);
        center[1] = std::sin(angle);
        for (int j = 0; j < per_cluster; ++j) {
            int row = c * per_cluster + j;
            double* out = images.data() + static_cast<std::size_t>(row) * dim;
            for (int t = 0; t < dim; ++t) {
                double raw = center[t] + spread * rng.gaussian();
                out[t] = std::clamp((raw + 1.0) / 2.0, 0.0, 1.0);
            }
            labels[row] = c;
        }
    }
    return Dataset(std::move(images), std::move(labels), "synthetic-" + std::to_string(k));
}

}  // namespace latgeo
