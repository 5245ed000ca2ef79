#pragma once

#include "hfl/common.hpp"

namespace hfl {

enum class ModelKind { softmax_regression, dense_net };

// Sample store, features row-major. Labels in [0, classes).
struct Dataset {
    int n = 0, d = 0;
    std::vector<double> x;
    std::vector<int> y;
    const double* row(int i) const { return x.data() + static_cast<size_t>(i) * d; }
    void push(const double* feat, int label);
};

// softmax_regression: W is C x (d+1), bias in the last column.
// dense_net: W1 is H x (d+1) followed by W2, C x (H+1); rectifier hidden.
struct ModelShape {
    ModelKind kind = ModelKind::softmax_regression;
    int classes = 0;
    int feature_dim = 0;
    int hidden = 32;

    int param_count() const;
};

// uniform(-0.05, 0.05) per parameter, layout order
std::vector<double> init_weights(const ModelShape& s, u64 seed);

// class probabilities for one sample (softmax over logits, max-shifted)
void forward_probs(const ModelShape& s, const std::vector<double>& w, const double* x,
                   double* probs);

// mean NLL, log arguments clamped at 1e-12
double loss(const ModelShape& s, const std::vector<double>& w, const Dataset& data);

// gradient of the mean NLL over `idx` (whole dataset when empty; repeats allowed)
std::vector<double> gradient(const ModelShape& s, const std::vector<double>& w,
                             const Dataset& data, const std::vector<int>& idx = {});

// argmax accuracy; ties break to the lowest class index
double accuracy(const ModelShape& s, const std::vector<double>& w, const Dataset& data);

// mean over class-`cls` samples of the gradient of log p_cls(x; w).
// Errors when the dataset holds no such sample.
std::vector<double> class_log_gradient(const ModelShape& s, const std::vector<double>& w,
                                       const Dataset& data, int cls);

}  // namespace hfl
