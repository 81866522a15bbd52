#include "tape.hpp"

#include <cmath>
#include <memory>

#include "common.hpp"

namespace specmine::nn {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

void check_finite_shape(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.cols() == 0) {
    throw Error(Err::ShapeMismatch, std::string(what) + ": empty matrix");
  }
}

}  // namespace

Tape::Var Tape::emplace(Matrix value, std::function<void(Tape&)> backprop) {
  Node node;
  node.grad = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tape::Node& Tape::node(int id) { return nodes_.at(id); }
const Tape::Node& Tape::node(int id) const { return nodes_.at(id); }

Tape::Var Tape::leaf(const Matrix& value) {
  check_finite_shape(value, "leaf");
  return emplace(value, nullptr);
}

void Tape::backward(Var root) {
  if (!root.valid()) throw Error(Err::Internal, "backward on invalid var");
  Node& r = node(root.id);
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw Error(Err::ShapeMismatch, "backward root must be a scalar");
  }
  r.grad(0, 0) = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = node(id);
    if (n.backprop) n.backprop(*this);
  }
}

Tape::Var Tape::matmul(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.cols() != bv.rows()) {
    throw Error(Err::ShapeMismatch, "matmul: inner dimensions disagree");
  }
  Var out = emplace(av * bv, nullptr);
  node(out.id).backprop = [a, b, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    t.node(a.id).grad.noalias() += g * t.node(b.id).value.transpose();
    t.node(b.id).grad.noalias() += t.node(a.id).value.transpose() * g;
  };
  return out;
}

Tape::Var Tape::matmul_nt(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.cols() != bv.cols()) {
    throw Error(Err::ShapeMismatch, "matmul_nt: inner dimensions disagree");
  }
  Var out = emplace(av * bv.transpose(), nullptr);
  node(out.id).backprop = [a, b, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    t.node(a.id).grad.noalias() += g * t.node(b.id).value;
    t.node(b.id).grad.noalias() += g.transpose() * t.node(a.id).value;
  };
  return out;
}

Tape::Var Tape::add(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw Error(Err::ShapeMismatch, "add: shapes disagree");
  }
  Var out = emplace(av + bv, nullptr);
  node(out.id).backprop = [a, b, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    t.node(a.id).grad += g;
    t.node(b.id).grad += g;
  };
  return out;
}

Tape::Var Tape::add_rowvec(Var a, Var row) {
  const Matrix& av = value(a);
  const Matrix& rv = value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw Error(Err::ShapeMismatch, "add_rowvec: row must be 1 x cols");
  }
  Var out = emplace(av.rowwise() + rv.row(0), nullptr);
  node(out.id).backprop = [a, row, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    t.node(a.id).grad += g;
    t.node(row.id).grad.row(0) += g.colwise().sum();
  };
  return out;
}

Tape::Var Tape::scale(Var a, double s) {
  Var out = emplace(value(a) * s, nullptr);
  node(out.id).backprop = [a, out, s](Tape& t) {
    t.node(a.id).grad += s * t.node(out.id).grad;
  };
  return out;
}

Tape::Var Tape::concat_cols(Var a, Var b) {
  const Matrix& av = value(a);
  const Matrix& bv = value(b);
  if (av.rows() != bv.rows()) {
    throw Error(Err::ShapeMismatch, "concat_cols: row counts disagree");
  }
  // Hoisted before emplace: av/bv reference node storage that may move.
  const int ac = static_cast<int>(av.cols());
  const int bc = static_cast<int>(bv.cols());
  Matrix v(av.rows(), ac + bc);
  v << av, bv;
  Var out = emplace(std::move(v), nullptr);
  node(out.id).backprop = [a, b, out, ac, bc](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    t.node(a.id).grad += g.leftCols(ac);
    t.node(b.id).grad += g.rightCols(bc);
  };
  return out;
}

Tape::Var Tape::slice_cols(Var a, int begin, int len) {
  const Matrix& av = value(a);
  if (begin < 0 || len <= 0 || begin + len > av.cols()) {
    throw Error(Err::ShapeMismatch, "slice_cols: range out of bounds");
  }
  Var out = emplace(av.middleCols(begin, len), nullptr);
  node(out.id).backprop = [a, out, begin, len](Tape& t) {
    t.node(a.id).grad.middleCols(begin, len) += t.node(out.id).grad;
  };
  return out;
}

Tape::Var Tape::softmax_rows(Var a) {
  const Matrix& av = value(a);
  Matrix y(av.rows(), av.cols());
  for (Eigen::Index i = 0; i < av.rows(); ++i) {
    const double m = av.row(i).maxCoeff();
    Eigen::RowVectorXd e = (av.row(i).array() - m).exp();
    y.row(i) = e / e.sum();
  }
  Var out = emplace(std::move(y), nullptr);
  node(out.id).backprop = [a, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    const Matrix& y = t.node(out.id).value;
    Matrix& ga = t.node(a.id).grad;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      ga.row(i).array() += (g.row(i).array() - dot) * y.row(i).array();
    }
  };
  return out;
}

Tape::Var Tape::layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  const Matrix& xv = value(x);
  const Matrix& gv = value(gain);
  const Matrix& bv = value(bias);
  if (gv.rows() != 1 || bv.rows() != 1 || gv.cols() != xv.cols() ||
      bv.cols() != xv.cols()) {
    throw Error(Err::ShapeMismatch, "layer_norm: gain/bias must be 1 x cols");
  }
  const Eigen::Index rows = xv.rows();
  const Eigen::Index cols = xv.cols();
  Matrix xhat(rows, cols);
  Eigen::VectorXd inv_std(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = xv.row(i).mean();
    Eigen::RowVectorXd centered = xv.row(i).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(cols);
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = centered * inv_std(i);
  }
  Matrix y = (xhat.array().rowwise() * gv.row(0).array()).rowwise() +
             bv.row(0).array();
  Var out = emplace(std::move(y), nullptr);
  // Cache the normalized activations and inverse std for the backward pass.
  auto xhat_cache = std::make_shared<Matrix>(std::move(xhat));
  auto inv_cache = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
  node(out.id).backprop = [x, gain, bias, out, xhat_cache, inv_cache](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    const Matrix& xh = *xhat_cache;
    const Eigen::VectorXd& inv = *inv_cache;
    const Eigen::RowVectorXd gn = t.node(gain.id).value.row(0);
    t.node(gain.id).grad.row(0) +=
        (g.array() * xh.array()).colwise().sum().matrix();
    t.node(bias.id).grad.row(0) += g.colwise().sum();
    Matrix& gx = t.node(x.id).grad;
    const double cols = static_cast<double>(xh.cols());
    for (Eigen::Index i = 0; i < xh.rows(); ++i) {
      Eigen::RowVectorXd dxhat =
          (g.row(i).array() * gn.array()).matrix();
      const double mean_dxhat = dxhat.mean();
      const double mean_dxhat_xhat =
          (dxhat.array() * xh.row(i).array()).sum() / cols;
      gx.row(i).array() +=
          inv(i) * (dxhat.array() - mean_dxhat -
                    xh.row(i).array() * mean_dxhat_xhat);
    }
  };
  return out;
}

Tape::Var Tape::gelu(Var a) {
  const Matrix& av = value(a);
  Matrix y = av.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2));
  });
  Var out = emplace(std::move(y), nullptr);
  node(out.id).backprop = [a, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    const Matrix& x = t.node(a.id).value;
    Matrix dydx = x.unaryExpr([](double v) {
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = kInvSqrt2Pi * std::exp(-0.5 * v * v);
      return cdf + v * pdf;
    });
    t.node(a.id).grad.array() += g.array() * dydx.array();
  };
  return out;
}

Tape::Var Tape::relu(Var a) {
  const Matrix& av = value(a);
  Var out = emplace(av.cwiseMax(0.0), nullptr);
  node(out.id).backprop = [a, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    const Matrix& x = t.node(a.id).value;
    t.node(a.id).grad.array() +=
        g.array() * (x.array() > 0.0).cast<double>();
  };
  return out;
}

Tape::Var Tape::tanh(Var a) {
  Var out = emplace(value(a).array().tanh().matrix(), nullptr);
  node(out.id).backprop = [a, out](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    const Matrix& y = t.node(out.id).value;
    t.node(a.id).grad.array() += g.array() * (1.0 - y.array().square());
  };
  return out;
}

Tape::Var Tape::embedding_rows(Var table, std::vector<int> ids) {
  const Matrix& tv = value(table);
  Matrix v(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.rows()) {
      throw Error(Err::ShapeMismatch,
                  "embedding: id " + std::to_string(ids[i]) + " out of range");
    }
    v.row(static_cast<Eigen::Index>(i)) = tv.row(ids[i]);
  }
  Var out = emplace(std::move(v), nullptr);
  node(out.id).backprop = [table, out, ids = std::move(ids)](Tape& t) {
    const Matrix& g = t.node(out.id).grad;
    Matrix& gt = t.node(table.id).grad;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
    }
  };
  return out;
}

Tape::Var Tape::cross_entropy_sum(Var logits, std::vector<int> labels,
                                  int* scorable_rows) {
  const Matrix& lv = value(logits);
  if (static_cast<Eigen::Index>(labels.size()) != lv.rows()) {
    throw Error(Err::ShapeMismatch, "cross_entropy: one label per row");
  }
  auto probs = std::make_shared<Matrix>(softmax_rows_value(lv));
  double sum = 0.0;
  int scorable = 0;
  for (Eigen::Index i = 0; i < lv.rows(); ++i) {
    const int label = labels[i];
    if (label < 0) continue;
    if (label >= lv.cols()) {
      throw Error(Err::ShapeMismatch,
                  "cross_entropy: label " + std::to_string(label) +
                      " out of range");
    }
    const double m = lv.row(i).maxCoeff();
    const double lse = m + std::log((lv.row(i).array() - m).exp().sum());
    sum += lse - lv(i, label);
    ++scorable;
  }
  if (scorable_rows) *scorable_rows = scorable;
  Matrix v(1, 1);
  v(0, 0) = sum;
  Var out = emplace(std::move(v), nullptr);
  node(out.id).backprop = [logits, out, probs,
                           labels = std::move(labels)](Tape& t) {
    const double g = t.node(out.id).grad(0, 0);
    Matrix& gl = t.node(logits.id).grad;
    for (Eigen::Index i = 0; i < gl.rows(); ++i) {
      const int label = labels[i];
      if (label < 0) continue;
      gl.row(i) += g * probs->row(i);
      gl(i, label) -= g;
    }
  };
  return out;
}

Matrix softmax_rows_value(const Matrix& logits) {
  Matrix y(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    y.row(i) = e / e.sum();
  }
  return y;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index best = 0;
    logits.row(i).maxCoeff(&best);
    out[i] = static_cast<int>(best);
  }
  return out;
}

}  // namespace specmine::nn
