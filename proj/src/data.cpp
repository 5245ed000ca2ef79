#include "hfl/data.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace hfl {

namespace {

// deterministic well-separated direction for class i: a signed, stretched
// basis vector; wraps with growing magnitude so any class count stays distinct
void class_mean(int i, int d, double scale, double* out) {
    std::fill(out, out + d, 0.0);
    const int lap = i / d;
    const double sign = (lap % 2 == 0) ? 1.0 : -1.0;
    out[i % d] = sign * scale * (1.0 + lap);
}

}  // namespace

SplitDataset generate_synthetic(const SynthSpec& spec) {
    require(spec.classes >= 2, "need at least 2 classes");
    require(spec.feature_dim >= 1, "need at least 1 feature");
    require(spec.samples_per_class >= 5, "need at least 5 samples per class");
    require(spec.noise_sigma > 0.0, "noise sigma must be positive");

    const int d = spec.feature_dim;
    SplitDataset out;
    out.train.d = out.test.d = d;
    std::vector<double> mean(d), x(d);
    Rng rng(seed_mix({spec.seed, 0x73796e7468ull}));  // "synth"
    const int train_per_class = spec.samples_per_class * 4 / 5;
    for (int c = 0; c < spec.classes; ++c) {
        class_mean(c, d, spec.class_mean_scale, mean.data());
        for (int i = 0; i < spec.samples_per_class; ++i) {
            for (int j = 0; j < d; ++j) x[j] = mean[j] + spec.noise_sigma * rng.normal();
            (i < train_per_class ? out.train : out.test).push(x.data(), c);
        }
    }
    return out;
}

PartitionedData partition_non_iid(const Dataset& train, int classes, const PartitionSpec& spec) {
    const int N = spec.edges, K = spec.classes_per_edge, UPE = spec.users_per_edge;
    require(N >= 1 && UPE >= 1, "need at least one edge and one user per edge");
    require(K >= 1 && K <= classes, "classes_per_edge out of range");
    require(spec.per_user_samples % K == 0,
            "per_user_samples must divide evenly over the class block");
    require(spec.rho >= 1 && spec.rho <= N, "rho out of range");
    require(train.n > 0, "empty training set");

    const int per_class_per_user = spec.per_user_samples / K;
    const int U = N * UPE;

    // index pool per class, shuffled deterministically
    std::vector<std::vector<int>> pool(classes);
    for (int i = 0; i < train.n; ++i) {
        require(train.y[i] >= 0 && train.y[i] < classes, "label out of range");
        pool[train.y[i]].push_back(i);
    }
    Rng rng(seed_mix({spec.seed, 0x70617274ull}));  // "part"
    for (int c = 0; c < classes; ++c) {
        auto& p = pool[c];
        for (size_t i = p.size(); i > 1; --i)
            std::swap(p[i - 1], p[rng.below(i)]);
    }
    std::vector<size_t> cursor(classes, 0);

    PartitionedData out;
    out.user_data.resize(U);
    out.home_edge.resize(U);
    out.users.role = PopRole::user;
    out.users.counts = Mat<i64>(classes, U, 0);
    out.topo.reach = Mat<std::uint8_t>(N, U, 0);

    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < UPE; ++k) {
            const int u = n * UPE + k;
            out.home_edge[u] = n;
            auto& ds = out.user_data[u];
            ds.d = train.d;
            for (int b = 0; b < K; ++b) {
                const int c = (n * K + b) % classes;
                auto& p = pool[c];
                require(cursor[c] + per_class_per_user <= p.size(),
                        "class " + std::to_string(c) + " undersupplied: needs " +
                            std::to_string(cursor[c] + per_class_per_user) + " samples, has " +
                            std::to_string(p.size()));
                for (int t = 0; t < per_class_per_user; ++t)
                    ds.push(train.row(p[cursor[c]++]), c);
                out.users.counts(c, u) = per_class_per_user;
            }
            for (int r = 0; r < spec.rho; ++r) out.topo.reach((n + r) % N, u) = 1;
        }
    }
    return out;
}

DesignedPopulation design_population(int edges, int classes, int classes_per_edge,
                                     int users_per_edge, int per_user_samples, int rho) {
    require(edges >= 1 && users_per_edge >= 1, "need at least one edge and one user per edge");
    require(classes_per_edge >= 1 && classes_per_edge <= classes, "classes_per_edge out of range");
    require(per_user_samples % classes_per_edge == 0,
            "per_user_samples must divide evenly over the class block");
    require(rho >= 1 && rho <= edges, "rho out of range");

    const int U = edges * users_per_edge;
    const int per_class = per_user_samples / classes_per_edge;
    DesignedPopulation out;
    out.users.role = PopRole::user;
    out.users.counts = Mat<i64>(classes, U, 0);
    out.topo.reach = Mat<std::uint8_t>(edges, U, 0);
    out.home_edge.resize(U);
    for (int n = 0; n < edges; ++n)
        for (int k = 0; k < users_per_edge; ++k) {
            const int u = n * users_per_edge + k;
            out.home_edge[u] = n;
            for (int b = 0; b < classes_per_edge; ++b)
                out.users.counts((n * classes_per_edge + b) % classes, u) = per_class;
            for (int r = 0; r < rho; ++r) out.topo.reach((n + r) % edges, u) = 1;
        }
    return out;
}

namespace {

u64 read_be32(std::ifstream& f, const std::string& path) {
    unsigned char b[4];
    f.read(reinterpret_cast<char*>(b), 4);
    require(f.good(), "truncated IDX file: " + path);
    return (u64(b[0]) << 24) | (u64(b[1]) << 16) | (u64(b[2]) << 8) | u64(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path, int limit) {
    std::ifstream fi(images_path, std::ios::binary);
    require(fi.is_open(), "cannot open " + images_path);
    std::ifstream fl(labels_path, std::ios::binary);
    require(fl.is_open(), "cannot open " + labels_path);

    require(read_be32(fi, images_path) == 0x00000803ull, "bad image magic in " + images_path);
    const i64 n_img = static_cast<i64>(read_be32(fi, images_path));
    const i64 rows = static_cast<i64>(read_be32(fi, images_path));
    const i64 cols = static_cast<i64>(read_be32(fi, images_path));
    require(read_be32(fl, labels_path) == 0x00000801ull, "bad label magic in " + labels_path);
    const i64 n_lab = static_cast<i64>(read_be32(fl, labels_path));
    require(n_img == n_lab, "image/label count mismatch");
    require(rows > 0 && cols > 0, "bad image dimensions");

    i64 keep = n_img;
    if (limit > 0) keep = std::min<i64>(keep, limit);

    Dataset out;
    out.d = static_cast<int>(rows * cols);
    std::vector<unsigned char> buf(out.d);
    std::vector<double> feat(out.d);
    for (i64 i = 0; i < keep; ++i) {
        fi.read(reinterpret_cast<char*>(buf.data()), out.d);
        require(fi.good(), "truncated IDX file: " + images_path);
        char lab = 0;
        fl.read(&lab, 1);
        require(fl.good(), "truncated IDX file: " + labels_path);
        for (int j = 0; j < out.d; ++j) feat[j] = buf[j] / 255.0;
        out.push(feat.data(), static_cast<unsigned char>(lab));
    }
    return out;
}

}  // namespace hfl
