#ifndef SPECMINE_TAPE_HPP
#define SPECMINE_TAPE_HPP

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace specmine::nn {

using Matrix = Eigen::MatrixXd;

// Reverse-mode autodiff over dense double matrices. Nodes are created in
// topological order during the forward pass; backward() replays them in
// reverse. Double precision keeps central-difference checks tight.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  // Leaf with gradient storage (parameters and inputs).
  Var leaf(const Matrix& value);

  const Matrix& value(Var v) const { return node(v.id).value; }
  const Matrix& grad(Var v) const { return node(v.id).grad; }

  // Seeds the (1x1) root with 1 and accumulates gradients into every
  // ancestor leaf.
  void backward(Var root);

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a * b^T
  Var add(Var a, Var b);
  Var add_rowvec(Var a, Var row);  // broadcast a 1xC row over all rows
  Var scale(Var a, double s);
  Var concat_cols(Var a, Var b);
  Var slice_cols(Var a, int begin, int len);
  Var softmax_rows(Var a);
  Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-5);
  Var gelu(Var a);
  Var relu(Var a);
  Var tanh(Var a);
  Var embedding_rows(Var table, std::vector<int> ids);

  // Sum of -log softmax(logits)[i, labels[i]] over rows whose label is
  // >= 0; negative labels are ignore markers. scorable_rows reports how
  // many rows contributed.
  Var cross_entropy_sum(Var logits, std::vector<int> labels,
                        int* scorable_rows = nullptr);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> backprop;  // nullptr for leaves
  };

  Var emplace(Matrix value, std::function<void(Tape&)> backprop);
  Node& node(int id);
  const Node& node(int id) const;

  std::vector<Node> nodes_;
};

// Row-wise softmax without tape bookkeeping (prediction-time use).
Matrix softmax_rows_value(const Matrix& logits);

// Per-row argmax; ties resolve to the lowest index.
std::vector<int> argmax_rows(const Matrix& logits);

}  // namespace specmine::nn

#endif  // SPECMINE_TAPE_HPP
