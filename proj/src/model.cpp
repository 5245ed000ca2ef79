#include "hfl/model.hpp"

#include <algorithm>
#include <cmath>

#include "hfl/kernels.hpp"

namespace hfl {

void Dataset::push(const double* feat, int label) {
    x.insert(x.end(), feat, feat + d);
    y.push_back(label);
    ++n;
}

int ModelShape::param_count() const {
    require(classes >= 2 && feature_dim >= 1, "bad model shape");
    if (kind == ModelKind::softmax_regression) return classes * (feature_dim + 1);
    require(hidden >= 1, "bad hidden width");
    return hidden * (feature_dim + 1) + classes * (hidden + 1);
}

std::vector<double> init_weights(const ModelShape& s, u64 seed) {
    std::vector<double> w(s.param_count());
    Rng rng(seed_mix({seed, 0x696e6974ull}));  // "init"
    for (double& v : w) v = rng.unit() * 0.1 - 0.05;
    return w;
}

namespace {

void softmax_inplace(double* z, int c) {
    double mx = z[0];
    for (int i = 1; i < c; ++i) mx = std::max(mx, z[i]);
    double sum = 0.0;
    for (int i = 0; i < c; ++i) {
        z[i] = std::exp(z[i] - mx);
        sum += z[i];
    }
    for (int i = 0; i < c; ++i) z[i] /= sum;
}

struct Scratch {
    std::vector<double> xt;     // [x, 1]
    std::vector<double> z1;     // hidden pre-activation
    std::vector<double> ht;     // [relu(z1), 1]
    std::vector<double> probs;  // class probabilities
    std::vector<double> dz1;
};

// forward pass; fills probs (and hidden state for dense nets)
void forward(const ModelShape& s, const std::vector<double>& w, const double* x, Scratch& sc) {
    const int d = s.feature_dim, C = s.classes;
    sc.xt.assign(x, x + d);
    sc.xt.push_back(1.0);
    sc.probs.resize(C);
    if (s.kind == ModelKind::softmax_regression) {
        for (int c = 0; c < C; ++c)
            sc.probs[c] = kernels::dot(w.data() + static_cast<size_t>(c) * (d + 1),
                                       sc.xt.data(), d + 1);
        softmax_inplace(sc.probs.data(), C);
        return;
    }
    const int H = s.hidden;
    const double* w1 = w.data();
    const double* w2 = w.data() + static_cast<size_t>(H) * (d + 1);
    sc.z1.resize(H);
    sc.ht.resize(H + 1);
    for (int h = 0; h < H; ++h) {
        sc.z1[h] = kernels::dot(w1 + static_cast<size_t>(h) * (d + 1), sc.xt.data(), d + 1);
        sc.ht[h] = sc.z1[h] > 0.0 ? sc.z1[h] : 0.0;
    }
    sc.ht[H] = 1.0;
    for (int c = 0; c < C; ++c)
        sc.probs[c] = kernels::dot(w2 + static_cast<size_t>(c) * (H + 1), sc.ht.data(), H + 1);
    softmax_inplace(sc.probs.data(), C);
}

// accumulate the gradient of -log p_target for the current forward state;
// dz2 = probs - onehot(target), scaled by `scale`
void backward(const ModelShape& s, const std::vector<double>& w, const Scratch& sc,
              int target, double scale, std::vector<double>& g) {
    const int d = s.feature_dim, C = s.classes;
    if (s.kind == ModelKind::softmax_regression) {
        for (int c = 0; c < C; ++c) {
            const double dz = scale * (sc.probs[c] - (c == target ? 1.0 : 0.0));
            if (dz != 0.0)
                kernels::axpy(dz, sc.xt.data(), g.data() + static_cast<size_t>(c) * (d + 1), d + 1);
        }
        return;
    }
    const int H = s.hidden;
    const double* w2 = w.data() + static_cast<size_t>(H) * (d + 1);
    double* g1 = g.data();
    double* g2 = g.data() + static_cast<size_t>(H) * (d + 1);
    std::vector<double> dh(H, 0.0);
    for (int c = 0; c < C; ++c) {
        const double dz = scale * (sc.probs[c] - (c == target ? 1.0 : 0.0));
        if (dz == 0.0) continue;
        kernels::axpy(dz, sc.ht.data(), g2 + static_cast<size_t>(c) * (H + 1), H + 1);
        kernels::axpy(dz, w2 + static_cast<size_t>(c) * (H + 1), dh.data(), H);
    }
    for (int h = 0; h < H; ++h) {
        if (sc.z1[h] <= 0.0 || dh[h] == 0.0) continue;
        kernels::axpy(dh[h], sc.xt.data(), g1 + static_cast<size_t>(h) * (d + 1), d + 1);
    }
}

void check_sample(const ModelShape& s, const Dataset& data, int i) {
    require(i >= 0 && i < data.n, "sample index out of range");
    require(data.y[i] >= 0 && data.y[i] < s.classes, "label out of range");
}

}  // namespace

void forward_probs(const ModelShape& s, const std::vector<double>& w, const double* x,
                   double* probs) {
    require(static_cast<int>(w.size()) == s.param_count(), "weight size mismatch");
    Scratch sc;
    forward(s, w, x, sc);
    std::copy(sc.probs.begin(), sc.probs.end(), probs);
}

double loss(const ModelShape& s, const std::vector<double>& w, const Dataset& data) {
    require(static_cast<int>(w.size()) == s.param_count(), "weight size mismatch");
    require(data.n > 0, "empty dataset");
    require(data.d == s.feature_dim, "feature dim mismatch");
    Scratch sc;
    double acc = 0.0;
    for (int i = 0; i < data.n; ++i) {
        check_sample(s, data, i);
        forward(s, w, data.row(i), sc);
        acc += -std::log(std::max(sc.probs[data.y[i]], 1e-12));
    }
    return acc / data.n;
}

std::vector<double> gradient(const ModelShape& s, const std::vector<double>& w,
                             const Dataset& data, const std::vector<int>& idx) {
    require(static_cast<int>(w.size()) == s.param_count(), "weight size mismatch");
    require(data.n > 0, "empty dataset");
    require(data.d == s.feature_dim, "feature dim mismatch");
    std::vector<double> g(w.size(), 0.0);
    Scratch sc;
    if (idx.empty()) {
        const double scale = 1.0 / data.n;
        for (int i = 0; i < data.n; ++i) {
            check_sample(s, data, i);
            forward(s, w, data.row(i), sc);
            backward(s, w, sc, data.y[i], scale, g);
        }
    } else {
        const double scale = 1.0 / static_cast<double>(idx.size());
        for (int i : idx) {
            check_sample(s, data, i);
            forward(s, w, data.row(i), sc);
            backward(s, w, sc, data.y[i], scale, g);
        }
    }
    return g;
}

double accuracy(const ModelShape& s, const std::vector<double>& w, const Dataset& data) {
    require(static_cast<int>(w.size()) == s.param_count(), "weight size mismatch");
    require(data.n > 0, "empty dataset");
    Scratch sc;
    i64 hit = 0;
    for (int i = 0; i < data.n; ++i) {
        check_sample(s, data, i);
        forward(s, w, data.row(i), sc);
        int arg = 0;
        for (int c = 1; c < s.classes; ++c)
            if (sc.probs[c] > sc.probs[arg]) arg = c;  // ties keep the lowest class
        if (arg == data.y[i]) ++hit;
    }
    return static_cast<double>(hit) / data.n;
}

std::vector<double> class_log_gradient(const ModelShape& s, const std::vector<double>& w,
                                       const Dataset& data, int cls) {
    require(static_cast<int>(w.size()) == s.param_count(), "weight size mismatch");
    require(cls >= 0 && cls < s.classes, "class out of range");
    int count = 0;
    for (int i = 0; i < data.n; ++i)
        if (data.y[i] == cls) ++count;
    require(count > 0, "no samples of class " + std::to_string(cls));
    std::vector<double> g(w.size(), 0.0);
    Scratch sc;
    // gradient of log p_cls = -(gradient of NLL at target cls)
    const double scale = -1.0 / count;
    for (int i = 0; i < data.n; ++i) {
        if (data.y[i] != cls) continue;
        forward(s, w, data.row(i), sc);
        backward(s, w, sc, cls, scale, g);
    }
    return g;
}

}  // namespace hfl
