#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "latgeo/dataset.hpp"

using namespace latgeo;
namespace fs = std::filesystem;

namespace {

void write_be32(std::ofstream& f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    f.write(reinterpret_cast<char*>(b), 4);
}

struct IdxPair {
    fs::path images, labels;
};

IdxPair write_idx(const fs::path& dir, std::uint32_t img_magic, std::uint32_t n_img,
                  const std::vector<unsigned char>& pixels, std::uint32_t rows, std::uint32_t cols,
                  std::uint32_t lbl_magic, const std::vector<unsigned char>& lbls) {
    fs::create_directories(dir);
    IdxPair p{dir / "im.idx", dir / "lb.idx"};
    {
        std::ofstream f(p.images, std::ios::binary);
        write_be32(f, img_magic);
        write_be32(f, n_img);
        write_be32(f, rows);
        write_be32(f, cols);
        f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    }
    {
        std::ofstream f(p.labels, std::ios::binary);
        write_be32(f, lbl_magic);
        write_be32(f, static_cast<std::uint32_t>(lbls.size()));
        f.write(reinterpret_cast<const char*>(lbls.data()), static_cast<std::streamsize>(lbls.size()));
    }
    return p;
}

fs::path temp_dir() {
    fs::path d = fs::temp_directory_path() / "latgeo_dataset_test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("idx header decode and pixel scaling", "[dataset]") {
    auto p = write_idx(temp_dir() / "ok", 2051, 2, {0, 128, 255, 1, 2, 3, 4, 5}, 2, 2, 2049, {7, 9});
    Dataset ds = load_idx(p.images.string(), p.labels.string());
    CHECK(ds.size() == 2);
    CHECK(ds.dim() == 4);
    CHECK(ds.images[0] == 0.0);
    CHECK(ds.images[2] == 1.0);  // byte 255 -> 1.0
    CHECK(ds.labels[0] == 7);
    CHECK(ds.labels[1] == 9);
}

TEST_CASE("idx format errors", "[dataset]") {
    SECTION("bad magic reports observed bytes") {
        auto p = write_idx(temp_dir() / "bad_magic", 2052, 1, {0, 0, 0, 0}, 2, 2, 2049, {1});
        CHECK_THROWS_MATCHES(load_idx(p.images.string(), p.labels.string()), FormatError,
                             Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("00 00 08 04")));
    }
    SECTION("count mismatch between files") {
        std::vector<unsigned char> px(10 * 4, 0);
        std::vector<unsigned char> lb(9, 0);
        auto p = write_idx(temp_dir() / "mismatch", 2051, 10, px, 2, 2, 2049, lb);
        CHECK_THROWS_AS(load_idx(p.images.string(), p.labels.string()), FormatError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_idx("/nonexistent/a.idx", "/nonexistent/b.idx"), FormatError);
    }
}

TEST_CASE("committed digit fixtures load", "[dataset]") {
    fs::path data = LATGEO_TEST_DATA_DIR;
    Dataset train = load_idx((data / "digits-train-images-idx3-ubyte").string(),
                             (data / "digits-train-labels-idx1-ubyte").string());
    CHECK(train.size() == 1437);
    CHECK(train.dim() == 64);
    Dataset three = filter_classes(train, {0, 1, 2});
    CHECK(three.size() > 400);
    for (int l : three.labels) CHECK(l <= 2);
}

TEST_CASE("filter_classes", "[dataset]") {
    Tensor imgs = Tensor::matrix(4, 2, {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7});
    Dataset ds(imgs, {0, 1, 2, 1}, "toy");
    SECTION("selects matching rows in order") {
        Dataset out = filter_classes(ds, {1});
        REQUIRE(out.size() == 2);
        CHECK(out.images[0] == 0.2);
        CHECK(out.images[2] == 0.6);
    }
    SECTION("all labels present is identity") {
        Dataset out = filter_classes(ds, {0, 1, 2});
        CHECK(out.size() == 4);
        CHECK(out.images.vec() == ds.images.vec());
    }
    SECTION("absent class is an error") {
        CHECK_THROWS_AS(filter_classes(ds, {9}), FormatError);
    }
    SECTION("partition reconstructs the multiset of rows") {
        Dataset a = filter_classes(ds, {0});
        Dataset b = filter_classes(ds, {1});
        Dataset c = filter_classes(ds, {2});
        std::multiset<std::vector<double>> whole, parts;
        for (int i = 0; i < ds.size(); ++i) whole.insert(ds.row(i));
        for (const Dataset* part : {&a, &b, &c}) {
            for (int i = 0; i < part->size(); ++i) parts.insert(part->row(i));
        }
        CHECK(whole == parts);
    }
}

TEST_CASE("subsample", "[dataset]") {
    Dataset ds = synthetic_clusters(4, 50, 3, 0.05, 11);
    SECTION("n = N is a permutation") {
        Dataset out = subsample(ds, ds.size(), 5);
        std::multiset<std::vector<double>> whole, got;
        for (int i = 0; i < ds.size(); ++i) whole.insert(ds.row(i));
        for (int i = 0; i < out.size(); ++i) got.insert(out.row(i));
        CHECK(whole == got);
    }
    SECTION("same seed twice is identical") {
        Dataset a = subsample(ds, 10, 3);
        Dataset b = subsample(ds, 10, 3);
        CHECK(a.images.vec() == b.images.vec());
        CHECK(a.labels == b.labels);
    }
    SECTION("different seeds differ") {
        Dataset a = subsample(ds, 3, 1);
        Dataset b = subsample(ds, 3, 2);
        CHECK(a.images.vec() != b.images.vec());
    }
    SECTION("n > N is a bounds error") {
        CHECK_THROWS_AS(subsample(ds, ds.size() + 1, 0), DimensionError);
    }
}

TEST_CASE("synthetic_clusters", "[dataset]") {
    SECTION("tiny spread collapses to center images") {
        Dataset ds = synthetic_clusters(3, 5, 4, 1e-12, 1);
        for (int i = 1; i < 5; ++i) {
            for (int t = 0; t < 4; ++t) {
                CHECK_THAT(ds.images[static_cast<std::size_t>(i) * 4 + t],
                           Catch::Matchers::WithinAbs(ds.images[t], 1e-9));
            }
        }
        // cluster 0 center is (1, 0, ...) shifted to (1, 0.5, 0.5, 0.5)
        CHECK_THAT(ds.images[0], Catch::Matchers::WithinAbs(1.0, 1e-9));
        CHECK_THAT(ds.images[1], Catch::Matchers::WithinAbs(0.5, 1e-9));
    }
    SECTION("k = 1 gives all-zero labels") {
        Dataset ds = synthetic_clusters(1, 10, 2, 0.1, 2);
        for (int l : ds.labels) CHECK(l == 0);
    }
    SECTION("class counts follow construction") {
        Dataset ds = synthetic_clusters(3, 100, 2, 0.1, 3);
        std::map<int, int> counts;
        for (int l : ds.labels) counts[l]++;
        CHECK(counts[0] == 100);
        CHECK(counts[1] == 100);
        CHECK(counts[2] == 100);
    }
    SECTION("pixels stay in range (constructor validates)") {
        CHECK_NOTHROW(synthetic_clusters(5, 20, 2, 2.0, 4));
    }
}
