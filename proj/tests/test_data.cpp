#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hfl/data.hpp"

using namespace hfl;

namespace {

std::vector<i64> class_totals(const Dataset& ds, int classes) {
    std::vector<i64> out(classes, 0);
    for (int i = 0; i < ds.n; ++i) out[ds.y[i]]++;
    return out;
}

void write_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream f(path, std::ios::binary);
    REQUIRE(f.is_open());
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<unsigned char>& v, u64 x) {
    v.push_back(static_cast<unsigned char>((x >> 24) & 0xff));
    v.push_back(static_cast<unsigned char>((x >> 16) & 0xff));
    v.push_back(static_cast<unsigned char>((x >> 8) & 0xff));
    v.push_back(static_cast<unsigned char>(x & 0xff));
}

}  // namespace

TEST_CASE("synthetic data: split sizes, determinism, separation") {
    SynthSpec spec;
    spec.classes = 4;
    spec.feature_dim = 3;
    spec.samples_per_class = 10;
    spec.class_mean_scale = 2.0;
    spec.noise_sigma = 0.1;
    spec.seed = 42;

    const SplitDataset a = generate_synthetic(spec);
    CHECK(a.train.n == 4 * 8);
    CHECK(a.test.n == 4 * 2);
    CHECK(a.train.d == 3);
    const std::vector<i64> tr = class_totals(a.train, 4);
    const std::vector<i64> te = class_totals(a.test, 4);
    for (int c = 0; c < 4; ++c) {
        CHECK(tr[c] == 8);
        CHECK(te[c] == 2);
    }

    const SplitDataset b = generate_synthetic(spec);
    CHECK(a.train.x == b.train.x);
    CHECK(a.train.y == b.train.y);
    CHECK(a.test.x == b.test.x);
    spec.seed = 43;
    const SplitDataset c = generate_synthetic(spec);
    CHECK(a.train.x != c.train.x);

    // empirical class means land near the designed directions:
    // class 0,1,2 -> +2 on axis 0,1,2; class 3 wraps to -4 on axis 0
    const double want[4][3] = {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {-4, 0, 0}};
    for (int cls = 0; cls < 4; ++cls) {
        double mean[3] = {0, 0, 0};
        int cnt = 0;
        for (int i = 0; i < a.train.n; ++i) {
            if (a.train.y[i] != cls) continue;
            for (int j = 0; j < 3; ++j) mean[j] += a.train.row(i)[j];
            ++cnt;
        }
        for (int j = 0; j < 3; ++j) CHECK(std::fabs(mean[j] / cnt - want[cls][j]) < 0.2);
    }
}

TEST_CASE("synthetic data rejects bad specs") {
    SynthSpec spec;
    spec.classes = 1;
    CHECK_THROWS(generate_synthetic(spec));
    spec.classes = 2;
    spec.noise_sigma = 0.0;
    CHECK_THROWS(generate_synthetic(spec));
}

TEST_CASE("label-skewed partition: blocks, reach, conservation") {
    SynthSpec synth;
    synth.classes = 6;
    synth.feature_dim = 2;
    synth.samples_per_class = 50;  // 40 per class in train
    synth.seed = 7;
    const SplitDataset sd = generate_synthetic(synth);

    PartitionSpec part;
    part.edges = 3;
    part.users_per_edge = 2;
    part.classes_per_edge = 2;
    part.per_user_samples = 8;
    part.rho = 2;
    part.seed = 7;
    const PartitionedData pd = partition_non_iid(sd.train, 6, part);

    REQUIRE(pd.user_data.size() == 6);
    CHECK(pd.home_edge == std::vector<int>{0, 0, 1, 1, 2, 2});
    CHECK(pd.users.counts.rows == 6);
    CHECK(pd.users.counts.cols == 6);
    CHECK(pd.topo.reach.rows == 3);

    for (int u = 0; u < 6; ++u) {
        const int home = pd.home_edge[u];
        CHECK(pd.user_data[u].n == 8);
        // only the home edge's class block appears
        for (int i = 0; i < 8; ++i) {
            const int cls = pd.user_data[u].y[i];
            CHECK(cls / 2 == home);
        }
        for (int c = 0; c < 6; ++c)
            CHECK(pd.users.counts(c, u) == (c / 2 == home ? 4 : 0));
        // reach covers edges home..home+rho-1 (mod N)
        for (int n = 0; n < 3; ++n) {
            const bool in_window = (n == home) || (n == (home + 1) % 3);
            CHECK(pd.topo.reach(n, u) == (in_window ? 1 : 0));
        }
    }

    // every user sample is a distinct training row with a matching label
    std::map<std::vector<double>, int> train_rows;
    for (int i = 0; i < sd.train.n; ++i) {
        std::vector<double> row(sd.train.row(i), sd.train.row(i) + 2);
        train_rows[row] = sd.train.y[i];
    }
    std::map<std::vector<double>, int> seen;
    for (const auto& ds : pd.user_data)
        for (int i = 0; i < ds.n; ++i) {
            std::vector<double> row(ds.row(i), ds.row(i) + 2);
            auto it = train_rows.find(row);
            REQUIRE(it != train_rows.end());
            CHECK(it->second == ds.y[i]);
            CHECK(++seen[row] == 1);
        }

    // identical seed reproduces the draw
    const PartitionedData pd2 = partition_non_iid(sd.train, 6, part);
    for (size_t u = 0; u < pd.user_data.size(); ++u) CHECK(pd.user_data[u].x == pd2.user_data[u].x);
}

TEST_CASE("partition reports the undersupplied class") {
    SynthSpec synth;
    synth.classes = 2;
    synth.feature_dim = 2;
    synth.samples_per_class = 10;  // 8 per class in train
    const SplitDataset sd = generate_synthetic(synth);

    PartitionSpec part;
    part.edges = 1;
    part.users_per_edge = 3;
    part.classes_per_edge = 2;
    part.per_user_samples = 6;  // demand 9 per class > 8
    try {
        partition_non_iid(sd.train, 2, part);
        FAIL("expected undersupply error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("undersupplied") != std::string::npos);
        CHECK(std::string(e.what()).find("class 0") != std::string::npos);
    }
}

TEST_CASE("designed population mirrors the partition layout") {
    SynthSpec synth;
    synth.classes = 6;
    synth.feature_dim = 2;
    synth.samples_per_class = 50;
    synth.seed = 7;
    const SplitDataset sd = generate_synthetic(synth);
    PartitionSpec part;
    part.edges = 3;
    part.users_per_edge = 2;
    part.classes_per_edge = 2;
    part.per_user_samples = 8;
    part.rho = 2;
    const PartitionedData pd = partition_non_iid(sd.train, 6, part);

    const DesignedPopulation dp = design_population(3, 6, 2, 2, 8, 2);
    CHECK(dp.users.counts.a == pd.users.counts.a);
    CHECK(dp.topo.reach.a == pd.topo.reach.a);
    CHECK(dp.home_edge == pd.home_edge);

    // wraps past the class count: edge 2 of 3 with 2 classes total
    const DesignedPopulation wrap = design_population(3, 2, 2, 1, 4, 1);
    for (int u = 0; u < 3; ++u) {
        CHECK(wrap.users.counts(0, u) == 2);
        CHECK(wrap.users.counts(1, u) == 2);
    }
}

TEST_CASE("IDX loader") {
    const std::string img_path = "idx_test_images.bin";
    const std::string lab_path = "idx_test_labels.bin";

    std::vector<unsigned char> img;
    push_be32(img, 0x00000803ull);
    push_be32(img, 2);  // count
    push_be32(img, 2);  // rows
    push_be32(img, 2);  // cols
    const unsigned char px[8] = {0, 128, 255, 64, 10, 20, 30, 40};
    img.insert(img.end(), px, px + 8);

    std::vector<unsigned char> lab;
    push_be32(lab, 0x00000801ull);
    push_be32(lab, 2);
    lab.push_back(3);
    lab.push_back(7);

    write_bytes(img_path, img);
    write_bytes(lab_path, lab);

    const Dataset ds = load_idx(img_path, lab_path);
    REQUIRE(ds.n == 2);
    REQUIRE(ds.d == 4);
    CHECK(ds.y[0] == 3);
    CHECK(ds.y[1] == 7);
    for (int j = 0; j < 4; ++j) {
        CHECK(ds.row(0)[j] == px[j] / 255.0);
        CHECK(ds.row(1)[j] == px[4 + j] / 255.0);
    }

    CHECK(load_idx(img_path, lab_path, 1).n == 1);
    CHECK(load_idx(img_path, lab_path, 99).n == 2);

    // corrupt image magic
    std::vector<unsigned char> bad = img;
    bad[3] = 0x04;
    write_bytes(img_path + ".bad", bad);
    CHECK_THROWS(load_idx(img_path + ".bad", lab_path));

    // label count disagrees
    std::vector<unsigned char> lab3 = lab;
    lab3[7] = 3;
    write_bytes(lab_path + ".n3", lab3);
    CHECK_THROWS(load_idx(img_path, lab_path + ".n3"));

    // truncated pixel payload
    std::vector<unsigned char> cut(img.begin(), img.end() - 6);
    write_bytes(img_path + ".cut", cut);
    CHECK_THROWS(load_idx(img_path + ".cut", lab_path));

    CHECK_THROWS(load_idx("no_such_file.bin", lab_path));

    std::remove(img_path.c_str());
    std::remove(lab_path.c_str());
    std::remove((img_path + ".bad").c_str());
    std::remove((lab_path + ".n3").c_str());
    std::remove((img_path + ".cut").c_str());
}
