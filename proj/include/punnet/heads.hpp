#pragma once

// Classification heads and their decision rules. Detection reads the
// sentence vector T^J_[CLS]; location reads each token's attended joint
// embedding. Ties in the two-class argmax resolve to label 0; ties across
// token positions resolve to the lowest index.

#include <array>
#include <cmath>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/tensor.hpp"

namespace punnet {

enum class Task { Detection, Location };

inline const char* to_string(Task t) { return t == Task::Detection ? "detection" : "location"; }

enum class LocateMode { Argmax, Threshold };

inline const char* to_string(LocateMode m) {
  return m == LocateMode::Argmax ? "argmax" : "threshold";
}

// Dense layer with two output logits; applies per row for matrix input.
template <typename T>
struct BinaryHead {
  Tensor<T> w;  // [in_dim, 2]
  Tensor<T> b;  // {2}

  BinaryHead() = default;
  BinaryHead(std::size_t in_dim, Rng& rng)
      : w(glorot_uniform<T>(in_dim, 2, rng)), b(Tensor<T>::zeros({2}, true)) {}

  Tensor<T> operator()(const Tensor<T>& x) const {
    return x.rank() == 1 ? add(vecmat(x, w), b) : add_row(matmul(x, w), b);
  }
};

inline std::array<double, 2> softmax2(double l0, double l1) {
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
  return {e0 / (e0 + e1), e1 / (e0 + e1)};
}

struct DetectionResult {
  int label = 0;
  std::array<double, 2> probability{};  // sums to 1
};

template <typename T>
DetectionResult decide_detection(const Tensor<T>& logits) {
  if (logits.rank() != 1 || logits.size() != 2) {
    throw ArgumentError("detection logits must be a 2-vector, got " + shape_str(logits.shape()));
  }
  DetectionResult r;
  const double l0 = static_cast<double>(logits.value()[0]);
  const double l1 = static_cast<double>(logits.value()[1]);
  r.label = l1 > l0 ? 1 : 0;
  r.probability = softmax2(l0, l1);
  return r;
}

struct LocationResult {
  std::size_t index = 0;                    // argmax decision
  std::vector<double> positive_logit;       // per token
  std::vector<double> positive_probability; // per token, softmax over the 2 classes
};

template <typename T>
LocationResult decide_location(const Tensor<T>& logits) {
  if (logits.rank() != 2 || logits.cols() != 2 || logits.rows() == 0) {
    throw ArgumentError("location logits must be [N,2] with N >= 1, got " +
                        shape_str(logits.shape()));
  }
  LocationResult r;
  const std::size_t n = logits.rows();
  r.positive_logit.resize(n);
  r.positive_probability.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double l0 = static_cast<double>(logits.value()[i * 2]);
    const double l1 = static_cast<double>(logits.value()[i * 2 + 1]);
    r.positive_logit[i] = l1;
    r.positive_probability[i] = softmax2(l0, l1)[1];
    if (r.positive_logit[i] > r.positive_logit[r.index]) r.index = i;
  }
  return r;
}

inline std::vector<std::size_t> threshold_locations(const LocationResult& r,
                                                    double threshold = 0.5) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.positive_probability.size(); ++i) {
    if (r.positive_probability[i] > threshold) out.push_back(i);
  }
  return out;
}

}  // namespace punnet
