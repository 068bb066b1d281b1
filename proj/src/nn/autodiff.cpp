#include "ginv/autodiff.hpp"

#include <cmath>

#include "ginv/errors.hpp"

namespace ginv {

namespace {

std::string shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Parameter::Parameter(std::string n, Mat init) : name(std::move(n)), value(std::move(init)) {
  grad = Mat::Zero(value.rows(), value.cols());
  m = Mat::Zero(value.rows(), value.cols());
  v = Mat::Zero(value.rows(), value.cols());
}

const Mat& Var::value() const { return tape_->node(*this).value; }

double Var::scalar() const {
  const Mat& v = value();
  if (v.size() != 1) throw ShapeMismatch("scalar() on a " + shape(v) + " value");
  return v(0, 0);
}

void Tape::check_owner(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) throw InvariantViolation("variable does not belong to this tape");
}

const Tape::Node& Tape::node(Var v) const {
  check_owner(v);
  return nodes_[v.id_];
}

template <typename Expr>
void Tape::accumulate(Var v, const Expr& delta) {
  Node& n = nodes_[v.id_];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = delta;
  } else {
    n.grad += delta;
  }
}

Var Tape::push(Mat value, bool needs_grad, std::function<void(Tape&, const Node&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Mat value) { return push(std::move(value), false, {}); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value, true, {});
  nodes_.back().param = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.cols() != bv.rows()) throw ShapeMismatch("matmul " + shape(av) + " by " + shape(bv));
  Mat out = av * bv;
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b](Tape& t, const Node& n) {
    if (t.needs_grad(a)) t.accumulate(a, (n.grad * t.nodes_[b.id_].value.transpose()).eval());
    if (t.needs_grad(b)) t.accumulate(b, (t.nodes_[a.id_].value.transpose() * n.grad).eval());
  });
}

Var Tape::add(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() == bv.rows() && av.cols() == bv.cols()) {
    return push(av + bv, needs_grad(a) || needs_grad(b), [a, b](Tape& t, const Node& n) {
      t.accumulate(a, n.grad);
      t.accumulate(b, n.grad);
    });
  }
  if (bv.rows() == 1 && av.cols() == bv.cols()) {
    Mat out = av.rowwise() + bv.row(0);
    return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b](Tape& t, const Node& n) {
      t.accumulate(a, n.grad);
      if (t.needs_grad(b)) t.accumulate(b, n.grad.colwise().sum().eval());
    });
  }
  throw ShapeMismatch("add " + shape(av) + " and " + shape(bv));
}

Var Tape::sub(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw ShapeMismatch("sub " + shape(av) + " and " + shape(bv));
  }
  return push(av - bv, needs_grad(a) || needs_grad(b), [a, b](Tape& t, const Node& n) {
    t.accumulate(a, n.grad);
    if (t.needs_grad(b)) t.accumulate(b, (-n.grad).eval());
  });
}

Var Tape::scale(Var a, double c) {
  return push(node(a).value * c, needs_grad(a), [a, c](Tape& t, const Node& n) {
    t.accumulate(a, (n.grad * c).eval());
  });
}

Var Tape::relu(Var a) {
  Mat out = node(a).value.cwiseMax(0.0);
  return push(std::move(out), needs_grad(a), [a](Tape& t, const Node& n) {
    const Mat& x = t.nodes_[a.id_].value;
    t.accumulate(a, (x.array() > 0.0).select(n.grad, 0.0).eval());
  });
}

Var Tape::sum(Var a) {
  Mat out(1, 1);
  out(0, 0) = node(a).value.sum();
  return push(std::move(out), needs_grad(a), [a](Tape& t, const Node& n) {
    const Mat& x = t.nodes_[a.id_].value;
    t.accumulate(a, Mat::Constant(x.rows(), x.cols(), n.grad(0, 0)));
  });
}

Var Tape::mean(Var a) {
  const Mat& x = node(a).value;
  if (x.size() == 0) throw ShapeMismatch("mean of an empty matrix");
  Mat out(1, 1);
  out(0, 0) = x.mean();
  return push(std::move(out), needs_grad(a), [a](Tape& t, const Node& n) {
    const Mat& x = t.nodes_[a.id_].value;
    t.accumulate(a, Mat::Constant(x.rows(), x.cols(), n.grad(0, 0) / static_cast<double>(x.size())));
  });
}

Var Tape::l2_norm(Var a) {
  Mat out(1, 1);
  out(0, 0) = node(a).value.norm();
  return push(std::move(out), needs_grad(a), [a](Tape& t, const Node& n) {
    const Mat& x = t.nodes_[a.id_].value;
    const double norm = n.value(0, 0);
    if (norm > 0.0) t.accumulate(a, (x * (n.grad(0, 0) / norm)).eval());
  });
}

Var Tape::row_l2_norms(Var a) {
  Mat out = node(a).value.rowwise().norm();
  return push(std::move(out), needs_grad(a), [a](Tape& t, const Node& n) {
    const Mat& x = t.nodes_[a.id_].value;
    Mat g = Mat::Zero(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double norm = n.value(r, 0);
      if (norm > 0.0) g.row(r) = x.row(r) * (n.grad(r, 0) / norm);
    }
    t.accumulate(a, g);
  });
}

Var Tape::spmm(std::shared_ptr<const SpMat> s, Var a) {
  const Mat& x = node(a).value;
  if (s->cols() != x.rows()) {
    throw ShapeMismatch("spmm " + std::to_string(s->rows()) + "x" + std::to_string(s->cols()) + " by " + shape(x));
  }
  Mat out = (*s) * x;
  return push(std::move(out), needs_grad(a), [a, s](Tape& t, const Node& n) {
    t.accumulate(a, (s->transpose() * n.grad).eval());
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Mat& av = node(a).value;
  const Mat& bv = node(b).value;
  if (av.rows() != bv.rows()) throw ShapeMismatch("concat_cols " + shape(av) + " and " + shape(bv));
  Mat out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const Eigen::Index split = av.cols();
  return push(std::move(out), needs_grad(a) || needs_grad(b), [a, b, split](Tape& t, const Node& n) {
    if (t.needs_grad(a)) t.accumulate(a, n.grad.leftCols(split).eval());
    if (t.needs_grad(b)) t.accumulate(b, n.grad.rightCols(n.grad.cols() - split).eval());
  });
}

Var Tape::slice_rows(Var a, Eigen::Index begin, Eigen::Index count) {
  const Mat& x = node(a).value;
  if (begin < 0 || count < 0 || begin + count > x.rows()) {
    throw ShapeMismatch("slice_rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) + ") of " +
                        shape(x));
  }
  Mat out = x.middleRows(begin, count);
  return push(std::move(out), needs_grad(a), [a, begin, count](Tape& t, const Node& n) {
    const Mat& x = t.nodes_[a.id_].value;
    Mat g = Mat::Zero(x.rows(), x.cols());
    g.middleRows(begin, count) = n.grad;
    t.accumulate(a, g);
  });
}

Var Tape::softmax_cross_entropy(Var logits, const std::vector<int>& targets) {
  const Mat& z = node(logits).value;
  if (static_cast<std::size_t>(z.rows()) != targets.size() || z.rows() == 0) {
    throw ShapeMismatch("softmax_cross_entropy: " + shape(z) + " logits for " + std::to_string(targets.size()) +
                        " targets");
  }
  Mat probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const int y = targets[r];
    if (y < 0 || y >= z.cols()) throw ShapeMismatch("target class " + std::to_string(y) + " out of range");
    const double mx = z.row(r).maxCoeff();
    double denom = 0.0;
    for (Eigen::Index c = 0; c < z.cols(); ++c) denom += std::exp(z(r, c) - mx);
    for (Eigen::Index c = 0; c < z.cols(); ++c) probs(r, c) = std::exp(z(r, c) - mx) / denom;
    loss += std::log(denom) + mx - z(r, y);
  }
  const double rows = static_cast<double>(z.rows());
  Mat out(1, 1);
  out(0, 0) = loss / rows;
  return push(std::move(out), needs_grad(logits),
              [logits, targets, probs = std::move(probs), rows](Tape& t, const Node& n) {
                Mat g = probs;
                for (std::size_t r = 0; r < targets.size(); ++r) g(static_cast<Eigen::Index>(r), targets[r]) -= 1.0;
                t.accumulate(logits, (g * (n.grad(0, 0) / rows)).eval());
              });
}

void Tape::backward(Var loss) {
  const Node& root = node(loss);
  if (root.value.size() != 1) throw ShapeMismatch("backward needs a 1x1 loss, got " + shape(root.value));
  nodes_[loss.id_].grad = Mat::Ones(1, 1);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param) {
      if (n.param->grad.size() == 0) n.param->grad = Mat::Zero(n.value.rows(), n.value.cols());
      n.param->grad += n.grad;
    }
    if (n.backprop) n.backprop(*this, n);
    if (!n.param) n.grad.resize(0, 0);
  }
}

}  // namespace ginv
