#pragma once

// Fusion of contextual and pronunciation embeddings. The self-attentive
// encoder scores the joint matrix against itself (single head, no learned
// projections) and produces per-token attended embeddings plus a sentence
// vector:
//
//   G       = row_softmax(TJ . TJ^t / sqrt(d_J)) . TJ
//   alpha   = per-dimension softmax of G across tokens   (vector variant)
//   att_i   = alpha_i (*) TJ_i
//   sent    = sum_i att_i
//
// The scalar variant reduces each G row to its mean, softmaxes the N scalars
// over tokens and scales rows by them.

#include <string>
#include <vector>

#include "punnet/common.hpp"
#include "punnet/tensor.hpp"

namespace punnet {

enum class AttnVariant { Vector, Scalar };

inline const char* to_string(AttnVariant v) {
  return v == AttnVariant::Vector ? "vector" : "scalar";
}

template <typename T>
struct JointEncoding {
  Tensor<T> joint;      // T^J           [N, d_J]
  Tensor<T> alpha;      // alpha^S       [N, d_J] (vector) or [N, 1] (scalar)
  Tensor<T> attended;   // T^J_{i,[ATT]} [N, d_J]
  Tensor<T> sentence;   // T^J_[ATT]     {d_J}
  Tensor<T> cls_joint;  // T^J_[CLS]     {d_C + d_J}
};

// Row-wise [T^C_i ; T^P_i].
template <typename T>
Tensor<T> joint_concat(const Tensor<T>& context_tokens, const Tensor<T>& pron_tokens) {
  if (context_tokens.rank() != 2 || pron_tokens.rank() != 2 ||
      context_tokens.rows() != pron_tokens.rows()) {
    throw ArgumentError("joint_concat: row mismatch " + shape_str(context_tokens.shape()) +
                        " vs " + shape_str(pron_tokens.shape()));
  }
  return concat(context_tokens, pron_tokens);
}

template <typename T>
struct SelfAttendOut {
  Tensor<T> alpha;
  Tensor<T> attended;
  Tensor<T> sentence;
};

template <typename T>
SelfAttendOut<T> self_attend(const Tensor<T>& joint, AttnVariant variant = AttnVariant::Vector) {
  if (joint.rank() != 2 || joint.rows() == 0) {
    throw ArgumentError("self_attend: need at least one token row, got " +
                        shape_str(joint.shape()));
  }
  const std::size_t d_j = joint.cols();
  Tensor<T> g = matmul(row_softmax(scaled_dot(joint, d_j)), joint);  // [N, d_J]
  SelfAttendOut<T> out;
  if (variant == AttnVariant::Vector) {
    out.alpha = col_softmax(g);
    out.attended = mul(out.alpha, joint);
  } else {
    Tensor<T> weights = row_softmax(row_mean(g));  // {N}
    out.alpha = transposed(stack_rows<T>({weights}));  // [N, 1]
    out.attended = scale_rows(joint, weights);
  }
  out.sentence = col_sum(out.attended);
  return out;
}

// [T^C_[CLS] ; T^J_[ATT]]
template <typename T>
Tensor<T> cls_concat(const Tensor<T>& context_cls, const Tensor<T>& sentence) {
  if (context_cls.rank() != 1 || sentence.rank() != 1) {
    throw ArgumentError("cls_concat expects two vectors, got " + shape_str(context_cls.shape()) +
                        " and " + shape_str(sentence.shape()));
  }
  return concat(context_cls, sentence);
}

}  // namespace punnet
