#pragma once

// Dense tensors (rank 0..2) with reverse-mode automatic differentiation.
//
// Every op returns a new Tensor whose node records its parents and a closure
// that scatters the node's gradient back into them. backward() on a scalar
// walks the graph once in reverse topological order. Instantiate with
// T = float for training and T = double for finite-difference checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/rng.hpp"

namespace punnet {

using Shape = std::vector<std::size_t>;

inline std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // sized lazily by backward()
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode<T>>> parents;
  std::function<void(TensorNode<T>&)> backprop;
};

template <typename T>
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    Tensor t;
    t.node_ = std::make_shared<TensorNode<T>>();
    t.node_->shape = std::move(shape);
    t.node_->value.assign(shape_numel(t.node_->shape), T(0));
    t.node_->requires_grad = requires_grad;
    return t;
  }

  static Tensor from(Shape shape, std::vector<T> data, bool requires_grad = false) {
    if (shape_numel(shape) != data.size()) {
      throw ArgumentError("tensor data length " + std::to_string(data.size()) +
                          " does not match shape " + shape_str(shape));
    }
    Tensor t = zeros(std::move(shape), requires_grad);
    t.node_->value = std::move(data);
    return t;
  }

  static Tensor scalar(T v, bool requires_grad = false) {
    return from({}, {v}, requires_grad);
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t rows() const { return node_->shape.at(0); }
  std::size_t cols() const { return node_->shape.at(1); }

  const std::vector<T>& value() const { return node_->value; }
  std::vector<T>& mutable_value() { return node_->value; }
  const std::vector<T>& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }

  T item() const {
    if (size() != 1) throw ArgumentError("item() on non-scalar tensor " + shape_str(shape()));
    return node_->value[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool r) { node_->requires_grad = r; }

  // A leaf copy of the value that no gradient flows into.
  Tensor detach() const { return from(node_->shape, node_->value, false); }

  std::shared_ptr<TensorNode<T>> node() const { return node_; }

 private:
  std::shared_ptr<TensorNode<T>> node_;
};

namespace detail {

#ifndef NDEBUG
template <typename T>
inline void check_finite(const TensorNode<T>& n, const char* op) {
  for (T v : n.value) {
    if (!std::isfinite(static_cast<double>(v))) {
      throw NumericError(std::string("non-finite value produced by op '") + op + "'");
    }
  }
}
#else
template <typename T>
inline void check_finite(const TensorNode<T>&, const char*) {}
#endif

template <typename T>
inline Tensor<T> make_result(Shape shape, std::vector<T> value, const char* op,
                             std::vector<Tensor<T>> inputs,
                             std::function<void(TensorNode<T>&)> backprop) {
  Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(value));
  bool any_grad = false;
  for (const auto& in : inputs) any_grad = any_grad || in.requires_grad();
  if (any_grad) {
    out.node()->requires_grad = true;
    for (const auto& in : inputs) out.node()->parents.push_back(in.node());
    out.node()->backprop = std::move(backprop);
  }
  check_finite(*out.node(), op);
  return out;
}

template <typename T>
inline std::vector<T>& grad_buffer(TensorNode<T>& n) {
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), T(0));
  return n.grad;
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ArgumentError(msg);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Core ops
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.rank() == 2 && b.rank() == 2 && a.cols() == b.rows(),
                  "matmul shape mismatch: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  std::vector<T> out(m * n, T(0));
  const auto& av = a.value();
  const auto& bv = b.value();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = av[i * k + p];
      if (aip == T(0)) continue;
      const T* brow = &bv[p * n];
      T* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  auto an = a.node();
  auto bn = b.node();
  return detail::make_result<T>(
      {m, n}, std::move(out), "matmul", {a, b}, [an, bn, m, k, n](TensorNode<T>& node) {
        const auto& g = node.grad;
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          const auto& bv = bn->value;
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              T acc = 0;
              const T* grow = &g[i * n];
              const T* brow = &bv[p * n];
              for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              da[i * k + p] += acc;
            }
        }
        if (bn->requires_grad) {
          auto& db = detail::grad_buffer(*bn);
          const auto& av = an->value;
          for (std::size_t p = 0; p < k; ++p)
            for (std::size_t i = 0; i < m; ++i) {
              const T aip = av[i * k + p];
              if (aip == T(0)) continue;
              const T* grow = &g[i * n];
              T* drow = &db[p * n];
              for (std::size_t j = 0; j < n; ++j) drow[j] += aip * grow[j];
            }
        }
      });
}

// y{m} = A[m,n] . x{n}
template <typename T>
Tensor<T> matvec(const Tensor<T>& a, const Tensor<T>& x) {
  detail::require(a.rank() == 2 && x.rank() == 1 && a.cols() == x.size(),
                  "matvec shape mismatch: " + shape_str(a.shape()) + " x " + shape_str(x.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T acc = 0;
    for (std::size_t j = 0; j < n; ++j) acc += a.value()[i * n + j] * x.value()[j];
    out[i] = acc;
  }
  auto an = a.node();
  auto xn = x.node();
  return detail::make_result<T>(
      {m}, std::move(out), "matvec", {a, x}, [an, xn, m, n](TensorNode<T>& node) {
        const auto& g = node.grad;
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) da[i * n + j] += g[i] * xn->value[j];
        }
        if (xn->requires_grad) {
          auto& dx = detail::grad_buffer(*xn);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) dx[j] += g[i] * an->value[i * n + j];
        }
      });
}

// y{n} = x{m} . A[m,n]
template <typename T>
Tensor<T> vecmat(const Tensor<T>& x, const Tensor<T>& a) {
  detail::require(x.rank() == 1 && a.rank() == 2 && x.size() == a.rows(),
                  "vecmat shape mismatch: " + shape_str(x.shape()) + " x " + shape_str(a.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    const T xi = x.value()[i];
    for (std::size_t j = 0; j < n; ++j) out[j] += xi * a.value()[i * n + j];
  }
  auto xn = x.node();
  auto an = a.node();
  return detail::make_result<T>(
      {n}, std::move(out), "vecmat", {x, a}, [xn, an, m, n](TensorNode<T>& node) {
        const auto& g = node.grad;
        if (xn->requires_grad) {
          auto& dx = detail::grad_buffer(*xn);
          for (std::size_t i = 0; i < m; ++i) {
            T acc = 0;
            for (std::size_t j = 0; j < n; ++j) acc += g[j] * an->value[i * n + j];
            dx[i] += acc;
          }
        }
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) da[i * n + j] += xn->value[i] * g[j];
        }
      });
}

template <typename T>
Tensor<T> transposed(const Tensor<T>& a) {
  detail::require(a.rank() == 2, "transpose expects rank-2, got " + shape_str(a.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.value()[i * n + j];
  auto an = a.node();
  return detail::make_result<T>(
      {n, m}, std::move(out), "transpose", {a}, [an, m, n](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) da[i * n + j] += node.grad[j * m + i];
      });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.shape() == b.shape(),
                  "add shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  auto an = a.node();
  auto bn = b.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "add", {a, b}, [an, bn](TensorNode<T>& node) {
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          for (std::size_t i = 0; i < node.grad.size(); ++i) da[i] += node.grad[i];
        }
        if (bn->requires_grad) {
          auto& db = detail::grad_buffer(*bn);
          for (std::size_t i = 0; i < node.grad.size(); ++i) db[i] += node.grad[i];
        }
      });
}

// A[m,n] + broadcast row b{n}
template <typename T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.rank() == 2 && b.rank() == 1 && a.cols() == b.size(),
                  "add_row shape mismatch: " + shape_str(a.shape()) + " + " + shape_str(b.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a.value()[i * n + j] + b.value()[j];
  auto an = a.node();
  auto bn = b.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "add_row", {a, b}, [an, bn, m, n](TensorNode<T>& node) {
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          for (std::size_t i = 0; i < node.grad.size(); ++i) da[i] += node.grad[i];
        }
        if (bn->requires_grad) {
          auto& db = detail::grad_buffer(*bn);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) db[j] += node.grad[i * n + j];
        }
      });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::require(a.shape() == b.shape(),
                  "mul shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  auto an = a.node();
  auto bn = b.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "mul", {a, b}, [an, bn](TensorNode<T>& node) {
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          for (std::size_t i = 0; i < node.grad.size(); ++i) da[i] += node.grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
          auto& db = detail::grad_buffer(*bn);
          for (std::size_t i = 0; i < node.grad.size(); ++i) db[i] += node.grad[i] * an->value[i];
        }
      });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T c) {
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * c;
  auto an = a.node();
  return detail::make_result<T>(a.shape(), std::move(out), "scale", {a},
                                [an, c](TensorNode<T>& node) {
                                  auto& da = detail::grad_buffer(*an);
                                  for (std::size_t i = 0; i < node.grad.size(); ++i)
                                    da[i] += node.grad[i] * c;
                                });
}

// Row-wise scalar multiply: y[i,:] = s[i] * a[i,:]
template <typename T>
Tensor<T> scale_rows(const Tensor<T>& a, const Tensor<T>& s) {
  detail::require(a.rank() == 2 && s.rank() == 1 && a.rows() == s.size(),
                  "scale_rows shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(s.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = s.value()[i] * a.value()[i * n + j];
  auto an = a.node();
  auto sn = s.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "scale_rows", {a, s}, [an, sn, m, n](TensorNode<T>& node) {
        if (an->requires_grad) {
          auto& da = detail::grad_buffer(*an);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) da[i * n + j] += sn->value[i] * node.grad[i * n + j];
        }
        if (sn->requires_grad) {
          auto& ds = detail::grad_buffer(*sn);
          for (std::size_t i = 0; i < m; ++i) {
            T acc = 0;
            for (std::size_t j = 0; j < n; ++j) acc += node.grad[i * n + j] * an->value[i * n + j];
            ds[i] += acc;
          }
        }
      });
}

// Concatenate along the last dimension. rank-1 + rank-1 or rank-2 + rank-2.
template <typename T>
Tensor<T> concat(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() == 1 && b.rank() == 1) {
    const std::size_t p = a.size(), q = b.size();
    std::vector<T> out;
    out.reserve(p + q);
    out.insert(out.end(), a.value().begin(), a.value().end());
    out.insert(out.end(), b.value().begin(), b.value().end());
    auto an = a.node();
    auto bn = b.node();
    return detail::make_result<T>(
        {p + q}, std::move(out), "concat", {a, b}, [an, bn, p, q](TensorNode<T>& node) {
          if (an->requires_grad) {
            auto& da = detail::grad_buffer(*an);
            for (std::size_t i = 0; i < p; ++i) da[i] += node.grad[i];
          }
          if (bn->requires_grad) {
            auto& db = detail::grad_buffer(*bn);
            for (std::size_t i = 0; i < q; ++i) db[i] += node.grad[p + i];
          }
        });
  }
  detail::require(a.rank() == 2 && b.rank() == 2 && a.rows() == b.rows(),
                  "concat shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const std::size_t m = a.rows(), p = a.cols(), q = b.cols();
  std::vector<T> out(m * (p + q));
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(&a.value()[i * p], p, &out[i * (p + q)]);
    std::copy_n(&b.value()[i * q], q, &out[i * (p + q) + p]);
  }
  auto an = a.node();
  auto bn = b.node();
  return detail::make_result<T>(
      {m, p + q}, std::move(out), "concat", {a, b}, [an, bn, m, p, q](TensorNode<T>& node) {
        for (std::size_t i = 0; i < m; ++i) {
          if (an->requires_grad) {
            auto& da = detail::grad_buffer(*an);
            for (std::size_t j = 0; j < p; ++j) da[i * p + j] += node.grad[i * (p + q) + j];
          }
          if (bn->requires_grad) {
            auto& db = detail::grad_buffer(*bn);
            for (std::size_t j = 0; j < q; ++j) db[i * q + j] += node.grad[i * (p + q) + p + j];
          }
        }
      });
}

// Stack rank-1 vectors of equal length into a matrix, one per row.
template <typename T>
Tensor<T> stack_rows(const std::vector<Tensor<T>>& rows) {
  detail::require(!rows.empty(), "stack_rows: empty input");
  const std::size_t n = rows.front().size();
  for (const auto& r : rows)
    detail::require(r.rank() == 1 && r.size() == n, "stack_rows: inconsistent row shapes");
  const std::size_t m = rows.size();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(rows[i].value().data(), n, &out[i * n]);
  std::vector<std::shared_ptr<TensorNode<T>>> nodes;
  nodes.reserve(m);
  for (const auto& r : rows) nodes.push_back(r.node());
  return detail::make_result<T>(
      {m, n}, std::move(out), "stack_rows", rows, [nodes, m, n](TensorNode<T>& node) {
        for (std::size_t i = 0; i < m; ++i) {
          if (!nodes[i]->requires_grad) continue;
          auto& dr = detail::grad_buffer(*nodes[i]);
          for (std::size_t j = 0; j < n; ++j) dr[j] += node.grad[i * n + j];
        }
      });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& a, std::size_t r0, std::size_t r1) {
  detail::require(a.rank() == 2 && r0 < r1 && r1 <= a.rows(),
                  "slice_rows out of range on " + shape_str(a.shape()));
  const std::size_t n = a.cols(), m = r1 - r0;
  std::vector<T> out(a.value().begin() + r0 * n, a.value().begin() + r1 * n);
  auto an = a.node();
  return detail::make_result<T>(
      {m, n}, std::move(out), "slice_rows", {a}, [an, r0, m, n](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        for (std::size_t i = 0; i < m * n; ++i) da[r0 * n + i] += node.grad[i];
      });
}

// Row i of a rank-2 tensor as a rank-1 vector.
template <typename T>
Tensor<T> row(const Tensor<T>& a, std::size_t i) {
  detail::require(a.rank() == 2 && i < a.rows(), "row index out of range on " + shape_str(a.shape()));
  const std::size_t n = a.cols();
  std::vector<T> out(a.value().begin() + i * n, a.value().begin() + (i + 1) * n);
  auto an = a.node();
  return detail::make_result<T>({n}, std::move(out), "row", {a}, [an, i, n](TensorNode<T>& node) {
    auto& da = detail::grad_buffer(*an);
    for (std::size_t j = 0; j < n; ++j) da[i * n + j] += node.grad[j];
  });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t c0, std::size_t c1) {
  detail::require(a.rank() == 2 && c0 < c1 && c1 <= a.cols(),
                  "slice_cols out of range on " + shape_str(a.shape()));
  const std::size_t m = a.rows(), n = a.cols(), w = c1 - c0;
  std::vector<T> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(&a.value()[i * n + c0], w, &out[i * w]);
  auto an = a.node();
  return detail::make_result<T>(
      {m, w}, std::move(out), "slice_cols", {a}, [an, c0, m, n, w](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) da[i * n + c0 + j] += node.grad[i * w + j];
      });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& a) {
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(a.value()[i]);
  auto an = a.node();
  return detail::make_result<T>(a.shape(), std::move(out), "tanh", {a},
                                [an](TensorNode<T>& node) {
                                  auto& da = detail::grad_buffer(*an);
                                  for (std::size_t i = 0; i < node.grad.size(); ++i) {
                                    const T y = node.value[i];
                                    da[i] += node.grad[i] * (T(1) - y * y);
                                  }
                                });
}

// Exact GELU: x * Phi(x), with Phi the standard normal CDF. Smooth, so
// finite-difference checks stay tight.
template <typename T>
Tensor<T> gelu(const Tensor<T>& a) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = static_cast<double>(a.value()[i]);
    out[i] = static_cast<T>(x * 0.5 * (1.0 + std::erf(x * kInvSqrt2)));
  }
  auto an = a.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "gelu", {a}, [an](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        for (std::size_t i = 0; i < node.grad.size(); ++i) {
          const double x = static_cast<double>(an->value[i]);
          const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
          const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
          da[i] += node.grad[i] * static_cast<T>(cdf + x * pdf);
        }
      });
}

namespace detail {

template <typename T>
inline void softmax_span(const T* x, T* y, std::size_t n, std::size_t stride) {
  T mx = x[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i * stride]);
  T sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i * stride] = std::exp(x[i * stride] - mx);
    sum += y[i * stride];
  }
  for (std::size_t i = 0; i < n; ++i) y[i * stride] /= sum;
}

template <typename T>
inline void softmax_span_backward(const T* y, const T* gy, T* gx, std::size_t n,
                                  std::size_t stride) {
  T dot = 0;
  for (std::size_t i = 0; i < n; ++i) dot += gy[i * stride] * y[i * stride];
  for (std::size_t i = 0; i < n; ++i) gx[i * stride] += y[i * stride] * (gy[i * stride] - dot);
}

}  // namespace detail

// Softmax along each row (rank-1 input treated as a single row).
template <typename T>
Tensor<T> row_softmax(const Tensor<T>& a) {
  detail::require(a.rank() >= 1, "row_softmax expects rank >= 1");
  const std::size_t n = a.rank() == 1 ? a.size() : a.cols();
  const std::size_t m = a.rank() == 1 ? 1 : a.rows();
  detail::require(n > 0, "row_softmax on empty row");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < m; ++i)
    detail::softmax_span(&a.value()[i * n], &out[i * n], n, 1);
  auto an = a.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "row_softmax", {a}, [an, m, n](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        for (std::size_t i = 0; i < m; ++i)
          detail::softmax_span_backward(&node.value[i * n], &node.grad[i * n], &da[i * n], n, 1);
      });
}

// Softmax along each column: every column sums to 1 across rows.
template <typename T>
Tensor<T> col_softmax(const Tensor<T>& a) {
  detail::require(a.rank() == 2, "col_softmax expects rank-2, got " + shape_str(a.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(a.size());
  for (std::size_t j = 0; j < n; ++j)
    detail::softmax_span(&a.value()[j], &out[j], m, n);
  auto an = a.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "col_softmax", {a}, [an, m, n](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        for (std::size_t j = 0; j < n; ++j)
          detail::softmax_span_backward(&node.value[j], &node.grad[j], &da[j], m, n);
      });
}

// Normalize by the plain (un-exponentiated) sum: y_i = x_i / sum(x).
template <typename T>
Tensor<T> normalize_sum(const Tensor<T>& a) {
  detail::require(a.rank() == 1 && a.size() > 0, "normalize_sum expects a non-empty vector");
  T s = 0;
  for (T v : a.value()) s += v;
  if (std::abs(static_cast<double>(s)) < 1e-12) {
    throw NumericError("normalize_sum: scores sum to ~0; raw-ratio weights undefined");
  }
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] / s;
  auto an = a.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "normalize_sum", {a}, [an, s](TensorNode<T>& node) {
        auto& da = detail::grad_buffer(*an);
        T dot = 0;
        for (std::size_t i = 0; i < node.grad.size(); ++i) dot += node.grad[i] * node.value[i];
        for (std::size_t i = 0; i < node.grad.size(); ++i) da[i] += (node.grad[i] - dot) / s;
      });
}

// Gather rows of an embedding table: out[i,:] = table[ids[i],:].
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<int>& ids) {
  detail::require(table.rank() == 2, "gather_rows expects rank-2 table");
  detail::require(!ids.empty(), "gather_rows: empty id list");
  const std::size_t n = table.cols(), m = ids.size();
  for (int id : ids)
    detail::require(id >= 0 && static_cast<std::size_t>(id) < table.rows(),
                    "gather_rows: id " + std::to_string(id) + " out of range for table " +
                        shape_str(table.shape()));
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    std::copy_n(&table.value()[static_cast<std::size_t>(ids[i]) * n], n, &out[i * n]);
  auto tn = table.node();
  return detail::make_result<T>(
      {m, n}, std::move(out), "gather_rows", {table}, [tn, ids, m, n](TensorNode<T>& node) {
        auto& dt = detail::grad_buffer(*tn);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j)
            dt[static_cast<std::size_t>(ids[i]) * n + j] += node.grad[i * n + j];
      });
}

// Inverted dropout. train=false (or p=0) is the identity.
template <typename T>
Tensor<T> dropout(const Tensor<T>& a, double p, bool train, Rng* rng) {
  detail::require(p >= 0.0 && p < 1.0, "dropout rate must be in [0,1), got " + std::to_string(p));
  if (!train || p == 0.0) return a;
  detail::require(rng != nullptr, "dropout in train mode needs an rng");
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  auto mask = std::make_shared<std::vector<T>>(a.size());
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T m = unit_uniform(*rng) < p ? T(0) : keep_scale;
    (*mask)[i] = m;
    out[i] = a.value()[i] * m;
  }
  auto an = a.node();
  return detail::make_result<T>(a.shape(), std::move(out), "dropout", {a},
                                [an, mask](TensorNode<T>& node) {
                                  auto& da = detail::grad_buffer(*an);
                                  for (std::size_t i = 0; i < node.grad.size(); ++i)
                                    da[i] += node.grad[i] * (*mask)[i];
                                });
}

// Per-row layer normalization with learned gain/bias.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& a, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-5)) {
  detail::require(a.rank() == 2 && gamma.rank() == 1 && beta.rank() == 1 &&
                      gamma.size() == a.cols() && beta.size() == a.cols(),
                  "layer_norm shape mismatch: " + shape_str(a.shape()) + " with gain " +
                      shape_str(gamma.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m * n);
  auto xhat = std::make_shared<std::vector<T>>(m * n);
  auto inv_sigma = std::make_shared<std::vector<T>>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const T* x = &a.value()[i * n];
    T mean = 0;
    for (std::size_t j = 0; j < n; ++j) mean += x[j];
    mean /= static_cast<T>(n);
    T var = 0;
    for (std::size_t j = 0; j < n; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= static_cast<T>(n);
    const T is = T(1) / std::sqrt(var + eps);
    (*inv_sigma)[i] = is;
    for (std::size_t j = 0; j < n; ++j) {
      const T xh = (x[j] - mean) * is;
      (*xhat)[i * n + j] = xh;
      out[i * n + j] = xh * gamma.value()[j] + beta.value()[j];
    }
  }
  auto an = a.node();
  auto gn = gamma.node();
  auto bn = beta.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), "layer_norm", {a, gamma, beta},
      [an, gn, bn, xhat, inv_sigma, m, n](TensorNode<T>& node) {
        for (std::size_t i = 0; i < m; ++i) {
          const T* gy = &node.grad[i * n];
          const T* xh = &(*xhat)[i * n];
          if (gn->requires_grad) {
            auto& dg = detail::grad_buffer(*gn);
            for (std::size_t j = 0; j < n; ++j) dg[j] += gy[j] * xh[j];
          }
          if (bn->requires_grad) {
            auto& db = detail::grad_buffer(*bn);
            for (std::size_t j = 0; j < n; ++j) db[j] += gy[j];
          }
          if (an->requires_grad) {
            auto& da = detail::grad_buffer(*an);
            T mean_dxh = 0, mean_dxh_xh = 0;
            for (std::size_t j = 0; j < n; ++j) {
              const T dxh = gy[j] * gn->value[j];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * xh[j];
            }
            mean_dxh /= static_cast<T>(n);
            mean_dxh_xh /= static_cast<T>(n);
            for (std::size_t j = 0; j < n; ++j) {
              const T dxh = gy[j] * gn->value[j];
              da[i * n + j] += (*inv_sigma)[i] * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
            }
          }
        }
      });
}

// Sum of the rows: out{n} accumulates rows in ascending index order.
template <typename T>
Tensor<T> col_sum(const Tensor<T>& a) {
  detail::require(a.rank() == 2, "col_sum expects rank-2, got " + shape_str(a.shape()));
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(n, T(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += a.value()[i * n + j];
  auto an = a.node();
  return detail::make_result<T>({n}, std::move(out), "col_sum", {a},
                                [an, m, n](TensorNode<T>& node) {
                                  auto& da = detail::grad_buffer(*an);
                                  for (std::size_t i = 0; i < m; ++i)
                                    for (std::size_t j = 0; j < n; ++j)
                                      da[i * n + j] += node.grad[j];
                                });
}

template <typename T>
Tensor<T> row_mean(const Tensor<T>& a) {
  detail::require(a.rank() == 2 && a.cols() > 0, "row_mean expects non-empty rank-2");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<T> out(m, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    T acc = 0;
    for (std::size_t j = 0; j < n; ++j) acc += a.value()[i * n + j];
    out[i] = acc / static_cast<T>(n);
  }
  auto an = a.node();
  return detail::make_result<T>({m}, std::move(out), "row_mean", {a},
                                [an, m, n](TensorNode<T>& node) {
                                  auto& da = detail::grad_buffer(*an);
                                  for (std::size_t i = 0; i < m; ++i)
                                    for (std::size_t j = 0; j < n; ++j)
                                      da[i * n + j] += node.grad[i] / static_cast<T>(n);
                                });
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& a) {
  T acc = 0;
  for (T v : a.value()) acc += v;
  auto an = a.node();
  return detail::make_result<T>({}, {acc}, "sum_all", {a}, [an](TensorNode<T>& node) {
    auto& da = detail::grad_buffer(*an);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += node.grad[0];
  });
}

// (T . T^t) / sqrt(d)
template <typename T>
Tensor<T> scaled_dot(const Tensor<T>& t, std::size_t d) {
  detail::require(d > 0, "scaled_dot: d must be positive");
  return scale(matmul(t, transposed(t)), static_cast<T>(1.0 / std::sqrt(static_cast<double>(d))));
}

enum class Reduction { Mean, Sum };

// Cross entropy from raw logits. Rank-1 logits take a single label; rank-2
// logits take one label per row. Stable via the log-sum-exp shift.
template <typename T>
Tensor<T> cross_entropy_with_logits(const Tensor<T>& logits, const std::vector<int>& labels,
                                    Reduction reduction = Reduction::Mean) {
  const std::size_t m = logits.rank() == 1 ? 1 : logits.rows();
  const std::size_t c = logits.rank() == 1 ? logits.size() : logits.cols();
  detail::require(c >= 2, "cross_entropy needs >= 2 classes, got " + shape_str(logits.shape()));
  detail::require(labels.size() == m, "cross_entropy: " + std::to_string(labels.size()) +
                                          " labels for " + std::to_string(m) + " rows");
  for (int l : labels)
    detail::require(l >= 0 && static_cast<std::size_t>(l) < c,
                    "cross_entropy: label " + std::to_string(l) + " out of range");
  auto probs = std::make_shared<std::vector<T>>(m * c);
  T total = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const T* x = &logits.value()[i * c];
    T mx = x[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x[j]);
    T sum = 0;
    for (std::size_t j = 0; j < c; ++j) {
      (*probs)[i * c + j] = std::exp(x[j] - mx);
      sum += (*probs)[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] /= sum;
    total += std::log(sum) + mx - x[labels[i]];
  }
  const T w = reduction == Reduction::Mean ? T(1) / static_cast<T>(m) : T(1);
  auto ln = logits.node();
  return detail::make_result<T>(
      {}, {total * w}, "cross_entropy", {logits},
      [ln, probs, labels, m, c, w](TensorNode<T>& node) {
        auto& dl = detail::grad_buffer(*ln);
        const T g = node.grad[0] * w;
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            const T onehot = static_cast<std::size_t>(labels[i]) == j ? T(1) : T(0);
            dl[i * c + j] += g * ((*probs)[i * c + j] - onehot);
          }
      });
}

// ---------------------------------------------------------------------------
// Backward pass
// ---------------------------------------------------------------------------

// Reverse-mode sweep from a scalar loss. Gradients of every reachable node
// are freshly zeroed, the loss seed is 1, and each node's closure runs
// exactly once in reverse topological order.
template <typename T>
void backward(const Tensor<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ArgumentError("backward expects a scalar loss tensor");
  }
  using Node = TensorNode<T>;
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  // Iterative post-order DFS; keeps deep graphs off the call stack.
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(loss.node().get(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next_child] = stack.back();
    if (next_child < node->parents.size()) {
      Node* child = node->parents[next_child++].get();
      if (visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) n->grad.assign(n->value.size(), T(0));
  loss.node()->grad[0] = T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backprop) (*it)->backprop(**it);
  }
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> init_uniform(Shape shape, double scale, Rng& rng, bool requires_grad = true) {
  Tensor<T> t = Tensor<T>::zeros(std::move(shape), requires_grad);
  for (T& v : t.mutable_value()) v = static_cast<T>(uniform(rng, -scale, scale));
  return t;
}

inline double glorot_scale(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

template <typename T>
Tensor<T> glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng,
                         bool requires_grad = true) {
  return init_uniform<T>({fan_in, fan_out}, glorot_scale(fan_in, fan_out), rng, requires_grad);
}

}  // namespace punnet
