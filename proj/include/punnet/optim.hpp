#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/tensor.hpp"

namespace punnet {

// Adam with bias correction. Moments live here, aligned one-to-one with the
// parameter list the optimizer was built from; a parameter with no gradient
// buffer is treated as having a zero gradient.
template <typename T>
class Adam {
 public:
  struct Hyper {
    T lr = static_cast<T>(5e-5);
    T beta1 = static_cast<T>(0.9);
    T beta2 = static_cast<T>(0.999);
    T eps = static_cast<T>(1e-8);
  };

  Adam(std::vector<Tensor<T>> params, Hyper hyper = {})
      : params_(std::move(params)), hyper_(hyper) {
    moments_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      moments_[i].m.assign(params_[i].size(), T(0));
      moments_[i].v.assign(params_[i].size(), T(0));
    }
  }

  std::uint64_t step_count() const { return step_; }
  const Hyper& hyper() const { return hyper_; }

  void step() {
    ++step_;
    const T bc1 = T(1) - static_cast<T>(std::pow(static_cast<double>(hyper_.beta1),
                                                 static_cast<double>(step_)));
    const T bc2 = T(1) - static_cast<T>(std::pow(static_cast<double>(hyper_.beta2),
                                                 static_cast<double>(step_)));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = params_[i];
      auto& slot = moments_[i];
      if (slot.m.size() != p.size()) {
        throw ArgumentError("adam: parameter " + std::to_string(i) + " changed size (" +
                            std::to_string(slot.m.size()) + " vs " + std::to_string(p.size()) +
                            ")");
      }
      const bool has_grad = p.has_grad();
      auto& value = p.mutable_value();
      for (std::size_t j = 0; j < value.size(); ++j) {
        const T g = has_grad ? p.grad()[j] : T(0);
        slot.m[j] = hyper_.beta1 * slot.m[j] + (T(1) - hyper_.beta1) * g;
        slot.v[j] = hyper_.beta2 * slot.v[j] + (T(1) - hyper_.beta2) * g * g;
        const T m_hat = slot.m[j] / bc1;
        const T v_hat = slot.v[j] / bc2;
        value[j] -= hyper_.lr * m_hat / (std::sqrt(v_hat) + hyper_.eps);
      }
    }
  }

 private:
  struct Moments {
    std::vector<T> m, v;
  };

  std::vector<Tensor<T>> params_;
  std::vector<Moments> moments_;
  Hyper hyper_;
  std::uint64_t step_ = 0;
};

}  // namespace punnet
