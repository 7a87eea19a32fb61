#pragma once

#include <span>
#include <string>
#include <vector>

#include "hmfmd/matrix.hpp"
#include "hmfmd/rng.hpp"

namespace hmfmd {

/// Linear layer to a single logit followed by a sigmoid.
struct DenseHeadParams {
  Matrix w;  // 1 x in_dim
  Matrix b;  // 1 x 1

  std::size_t in_dim() const { return w.cols(); }

  template <class F>
  void visit(F&& f, const std::string& prefix = "") {
    f(prefix + "w", w);
    f(prefix + "b", b);
  }
  template <class F>
  void visit(F&& f, const std::string& prefix = "") const {
    f(prefix + "w", w);
    f(prefix + "b", b);
  }
};

DenseHeadParams init_dense_head(std::size_t in_dim, RngStream& rng);

struct DenseTrace {
  std::vector<double> input;  // after dropout
  Matrix mask;
  double prob = 0.5;
};

double sigmoid(double z);

/// sigma(w . h + b). Dropout with rate `dropout_p` is applied to h when training.
double dense_sigmoid_head(std::span<const double> h, const DenseHeadParams& p,
                          double dropout_p = 0.0, bool training = false, RngStream* rng = nullptr,
                          DenseTrace* trace = nullptr);

/// Backward from dL/dprob; accumulates into grads and returns dL/dh.
std::vector<double> dense_sigmoid_head_backward(const DenseTrace& trace, const DenseHeadParams& p,
                                                double grad_prob, DenseHeadParams& grads);

}  // namespace hmfmd
