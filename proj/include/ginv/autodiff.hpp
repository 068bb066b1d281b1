#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ginv {

using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// A trainable tensor with its gradient and Adam moment buffers.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  Mat m;
  Mat v;

  Parameter() = default;
  Parameter(std::string n, Mat init);
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode automatic differentiation over dense matrices. Every operation
// records a node; backward() walks the nodes in reverse creation order and
// accumulates exact gradients into the Parameters that were read.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat value);
  Var param(Parameter& p);

  Var matmul(Var a, Var b);
  // Same shape, or b is a single row broadcast over the rows of a.
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var scale(Var a, double c);
  Var relu(Var a);
  // Sum of all entries (1 x 1).
  Var sum(Var a);
  // Mean of all entries (1 x 1).
  Var mean(Var a);
  // Frobenius norm (1 x 1); the subgradient at 0 is 0.
  Var l2_norm(Var a);
  // Euclidean norm of every row (rows x 1); the subgradient at 0 is 0.
  Var row_l2_norms(Var a);
  // s * a for a constant sparse s.
  Var spmm(std::shared_ptr<const SpMat> s, Var a);
  // [a | b]
  Var concat_cols(Var a, Var b);
  // Rows [begin, begin + count) of a.
  Var slice_rows(Var a, Eigen::Index begin, Eigen::Index count);
  // Mean cross-entropy of softmax(logits) against class targets (1 x 1).
  Var softmax_cross_entropy(Var logits, const std::vector<int>& targets);

  // Seeds d(loss)/d(loss) = 1 and accumulates into Parameter::grad.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;
  struct Node {
    Mat value;
    Mat grad;
    Parameter* param = nullptr;
    bool needs_grad = false;
    std::function<void(Tape&, const Node&)> backprop;
  };

  Var push(Mat value, bool needs_grad, std::function<void(Tape&, const Node&)> backprop);
  const Node& node(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id_].needs_grad; }
  // Adds `delta` to the gradient of node `v` if that node needs one.
  template <typename Expr>
  void accumulate(Var v, const Expr& delta);
  void check_owner(Var v) const;

  std::vector<Node> nodes_;
};

}  // namespace ginv
