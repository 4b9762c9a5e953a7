// Copyright 2026 The ackmmea Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Reverse-mode automatic differentiation over dense row-major tables.
//
// A Tape records every intermediate matrix of a forward pass together with a
// closure that pushes the output gradient back into its inputs. Rows of a
// table are graph nodes (entities, attributes, edges); columns are features.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ackmmea {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix&)>;

  Var constant(Matrix value) { return push(std::move(value), false, {}); }

  // A leaf whose gradient is accumulated by backward().
  Var parameter(Matrix value) { return push(std::move(value), true, {}); }

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }

  // Zero-filled matrix of the right shape if nothing flowed into v.
  Matrix grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  std::size_t size() const { return nodes_.size(); }

  // Smallest |x| seen at the input of a piecewise-linear op (ReLU, LeakyReLU,
  // abs), ignoring exact zeros. Finite-difference checks are only meaningful
  // when this is comfortably away from zero.
  double min_kink_margin() const { return min_kink_; }

  void backward(Var root) {
    const Matrix& v = value(root);
    if (v.rows() != 1 || v.cols() != 1) {
      throw std::invalid_argument("backward() needs a 1x1 root");
    }
    for (Node& n : nodes_) n.grad.resize(0, 0);
    nodes_[root.id].grad = Matrix::Ones(1, 1);
    for (int i = root.id; i >= 0; --i) {
      Node& n = nodes_[i];
      if (!n.backward || n.grad.size() == 0) continue;
      // Copy: the closure may accumulate into nodes_ and reallocate nothing,
      // but n.grad must not alias its own destination.
      const Matrix g = n.grad;
      n.backward(*this, g);
    }
  }

  // ---- structural ops -----------------------------------------------------

  Var matmul(Var a, Var b) {
    Matrix out = value(a) * value(b);
    return op(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
      if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
    });
  }

  Var add(Var a, Var b) {
    check_same_shape(a, b, "add");
    Matrix out = value(a) + value(b);
    return op(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g);
      if (t.requires_grad(b)) t.accumulate(b, g);
    });
  }

  Var sub(Var a, Var b) {
    check_same_shape(a, b, "sub");
    Matrix out = value(a) - value(b);
    return op(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, g);
      if (t.requires_grad(b)) t.accumulate(b, -g);
    });
  }

  Var scale(Var a, double s) {
    Matrix out = value(a) * s;
    return op(std::move(out), {a}, [a, s](Tape& t, const Matrix& g) {
      t.accumulate(a, g * s);
    });
  }

  Var add_scalar(Var a, double c) {
    Matrix out = value(a).array() + c;
    return op(std::move(out), {a},
              [a](Tape& t, const Matrix& g) { t.accumulate(a, g); });
  }

  // Column-wise concatenation [a | b | ...]; all inputs share the row count.
  Var concat_cols(std::span<const Var> parts) {
    Eigen::Index rows = value(parts[0]).rows();
    Eigen::Index cols = 0;
    for (Var p : parts) {
      if (value(p).rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
      cols += value(p).cols();
    }
    Matrix out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
      out.middleCols(at, value(p).cols()) = value(p);
      at += value(p).cols();
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    return op(std::move(out), ps, [ps](Tape& t, const Matrix& g) {
      Eigen::Index at = 0;
      for (Var p : ps) {
        Eigen::Index c = t.value(p).cols();
        if (t.requires_grad(p)) t.accumulate(p, g.middleCols(at, c));
        at += c;
      }
    });
  }
  Var concat_cols(std::initializer_list<Var> parts) {
    return concat_cols(std::span<const Var>(parts.begin(), parts.size()));
  }

  Var concat_rows(std::span<const Var> parts) {
    Eigen::Index cols = value(parts[0]).cols();
    Eigen::Index rows = 0;
    for (Var p : parts) {
      if (value(p).cols() != cols) throw std::invalid_argument("concat_rows: column mismatch");
      rows += value(p).rows();
    }
    Matrix out(rows, cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
      out.middleRows(at, value(p).rows()) = value(p);
      at += value(p).rows();
    }
    std::vector<Var> ps(parts.begin(), parts.end());
    return op(std::move(out), ps, [ps](Tape& t, const Matrix& g) {
      Eigen::Index at = 0;
      for (Var p : ps) {
        Eigen::Index r = t.value(p).rows();
        if (t.requires_grad(p)) t.accumulate(p, g.middleRows(at, r));
        at += r;
      }
    });
  }

  // out[i] = a[index[i]]
  Var gather_rows(Var a, std::vector<int> index) {
    const Matrix& av = value(a);
    Matrix out(static_cast<Eigen::Index>(index.size()), av.cols());
    for (std::size_t i = 0; i < index.size(); ++i) {
      check_row(index[i], av.rows(), "gather_rows");
      out.row(static_cast<Eigen::Index>(i)) = av.row(index[i]);
    }
    return op(std::move(out), {a}, [a, index = std::move(index)](Tape& t, const Matrix& g) {
      Matrix ga = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
      for (std::size_t i = 0; i < index.size(); ++i) {
        ga.row(index[i]) += g.row(static_cast<Eigen::Index>(i));
      }
      t.accumulate(a, ga);
    });
  }

  // out[s] = sum of rows i with segment[i] == s; out has n_segments rows.
  Var segment_sum(Var a, std::vector<int> segment, int n_segments) {
    const Matrix& av = value(a);
    check_segments(av.rows(), segment, n_segments);
    Matrix out = Matrix::Zero(n_segments, av.cols());
    for (std::size_t i = 0; i < segment.size(); ++i) {
      out.row(segment[i]) += av.row(static_cast<Eigen::Index>(i));
    }
    return op(std::move(out), {a}, [a, segment = std::move(segment)](Tape& t, const Matrix& g) {
      Matrix ga(static_cast<Eigen::Index>(segment.size()), g.cols());
      for (std::size_t i = 0; i < segment.size(); ++i) {
        ga.row(static_cast<Eigen::Index>(i)) = g.row(segment[i]);
      }
      t.accumulate(a, ga);
    });
  }

  // Mean per segment. Empty segments produce a zero row.
  Var segment_mean(Var a, std::vector<int> segment, int n_segments) {
    std::vector<double> count(static_cast<std::size_t>(n_segments), 0.0);
    for (int s : segment) {
      if (s >= 0 && s < n_segments) count[s] += 1.0;
    }
    Matrix inv(static_cast<Eigen::Index>(segment.size()), 1);
    for (std::size_t i = 0; i < segment.size(); ++i) {
      inv(static_cast<Eigen::Index>(i), 0) =
          (segment[i] >= 0 && segment[i] < n_segments) ? 1.0 / count[segment[i]] : 0.0;
    }
    Var weights = constant(std::move(inv));
    return segment_sum(row_scale(a, weights), std::move(segment), n_segments);
  }

  // Mean over all rows, as a single row.
  Var mean_rows(Var a) {
    return segment_mean(a, std::vector<int>(static_cast<std::size_t>(value(a).rows()), 0), 1);
  }

  // Softmax of a column of scores within each segment.
  Var segment_softmax(Var scores, std::vector<int> segment, int n_segments) {
    const Matrix& sv = value(scores);
    if (sv.cols() != 1) throw std::invalid_argument("segment_softmax: scores must be a column");
    check_segments(sv.rows(), segment, n_segments);
    std::vector<double> mx(static_cast<std::size_t>(n_segments),
                           -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < segment.size(); ++i) {
      mx[segment[i]] = std::max(mx[segment[i]], sv(static_cast<Eigen::Index>(i), 0));
    }
    std::vector<double> z(static_cast<std::size_t>(n_segments), 0.0);
    Matrix out(sv.rows(), 1);
    for (std::size_t i = 0; i < segment.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      out(r, 0) = std::exp(sv(r, 0) - mx[segment[i]]);
      z[segment[i]] += out(r, 0);
    }
    for (std::size_t i = 0; i < segment.size(); ++i) {
      out(static_cast<Eigen::Index>(i), 0) /= z[segment[i]];
    }
    return op(std::move(out), {scores},
              [scores, segment = std::move(segment), n_segments, this_id = next_id()](
                  Tape& t, const Matrix& g) {
                const Matrix& p = t.nodes_[this_id].value;
                std::vector<double> dot(static_cast<std::size_t>(n_segments), 0.0);
                for (std::size_t i = 0; i < segment.size(); ++i) {
                  const auto r = static_cast<Eigen::Index>(i);
                  dot[segment[i]] += g(r, 0) * p(r, 0);
                }
                Matrix gs(p.rows(), 1);
                for (std::size_t i = 0; i < segment.size(); ++i) {
                  const auto r = static_cast<Eigen::Index>(i);
                  gs(r, 0) = p(r, 0) * (g(r, 0) - dot[segment[i]]);
                }
                t.accumulate(scores, gs);
              });
  }

  // Row i of a multiplied by the scalar s[i] (s is a column).
  Var row_scale(Var a, Var s) {
    const Matrix& av = value(a);
    const Matrix& sv = value(s);
    if (sv.cols() != 1 || sv.rows() != av.rows()) {
      throw std::invalid_argument("row_scale: scale must be a column matching rows");
    }
    Matrix out = sv.col(0).asDiagonal() * av;
    return op(std::move(out), {a, s}, [a, s](Tape& t, const Matrix& g) {
      if (t.requires_grad(a)) t.accumulate(a, t.value(s).col(0).asDiagonal() * g);
      if (t.requires_grad(s)) {
        Matrix gs = (g.array() * t.value(a).array()).rowwise().sum();
        t.accumulate(s, gs);
      }
    });
  }

  // ---- elementwise ---------------------------------------------------------

  Var relu(Var a) { return leaky_relu(a, 0.0); }

  Var leaky_relu(Var a, double slope) {
    const Matrix& av = value(a);
    note_kinks(av);
    Matrix out = av.unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
    return op(std::move(out), {a}, [a, slope](Tape& t, const Matrix& g) {
      Matrix d = t.value(a).unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
      t.accumulate(a, g.cwiseProduct(d));
    });
  }

  Var abs(Var a) {
    const Matrix& av = value(a);
    note_kinks(av);
    Matrix out = av.cwiseAbs();
    return op(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
      Matrix d = t.value(a).unaryExpr(
          [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
      t.accumulate(a, g.cwiseProduct(d));
    });
  }

  Var exp(Var a) {
    Matrix out = value(a).array().exp();
    const int self = next_id();
    return op(std::move(out), {a}, [a, self](Tape& t, const Matrix& g) {
      t.accumulate(a, g.cwiseProduct(t.nodes_[self].value));
    });
  }

  Var log(Var a) {
    Matrix out = value(a).array().log();
    return op(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
      t.accumulate(a, g.cwiseQuotient(t.value(a)));
    });
  }

  // ---- reductions ------------------------------------------------------------

  Var sum(Var a) {
    Matrix out(1, 1);
    out(0, 0) = value(a).sum();
    return op(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
      t.accumulate(a, Matrix::Constant(t.value(a).rows(), t.value(a).cols(), g(0, 0)));
    });
  }

  Var mean(Var a) {
    const double n = static_cast<double>(value(a).size());
    if (n == 0) return constant(Matrix::Zero(1, 1));
    return scale(sum(a), 1.0 / n);
  }

  // Cosine similarity between matching rows of a and b, as a column. A row
  // with zero norm on either side has similarity 0 and no gradient.
  Var rowwise_cosine(Var a, Var b) {
    check_same_shape(a, b, "rowwise_cosine");
    const Matrix& av = value(a);
    const Matrix& bv = value(b);
    Matrix out(av.rows(), 1);
    for (Eigen::Index i = 0; i < av.rows(); ++i) {
      const double na = av.row(i).norm();
      const double nb = bv.row(i).norm();
      out(i, 0) = (na == 0.0 || nb == 0.0) ? 0.0 : av.row(i).dot(bv.row(i)) / (na * nb);
    }
    const int self = next_id();
    return op(std::move(out), {a, b}, [a, b, self](Tape& t, const Matrix& g) {
      const Matrix& av = t.value(a);
      const Matrix& bv = t.value(b);
      const Matrix& c = t.nodes_[self].value;
      Matrix ga = Matrix::Zero(av.rows(), av.cols());
      Matrix gb = Matrix::Zero(bv.rows(), bv.cols());
      for (Eigen::Index i = 0; i < av.rows(); ++i) {
        const double na = av.row(i).norm();
        const double nb = bv.row(i).norm();
        if (na == 0.0 || nb == 0.0) continue;
        // d cos / d a = b/(|a||b|) - cos * a/|a|^2
        ga.row(i) = g(i, 0) * (bv.row(i) / (na * nb) - c(i, 0) * av.row(i) / (na * na));
        gb.row(i) = g(i, 0) * (av.row(i) / (na * nb) - c(i, 0) * bv.row(i) / (nb * nb));
      }
      if (t.requires_grad(a)) t.accumulate(a, ga);
      if (t.requires_grad(b)) t.accumulate(b, gb);
    });
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };

  int next_id() const { return static_cast<int>(nodes_.size()); }

  Var push(Matrix value, bool requires_grad, Backward bw) {
    nodes_.push_back(Node{std::move(value), Matrix(), requires_grad, std::move(bw)});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Var op(Matrix value, std::initializer_list<Var> inputs, Backward bw) {
    return op(std::move(value), std::vector<Var>(inputs), std::move(bw));
  }

  Var op(Matrix value, const std::vector<Var>& inputs, Backward bw) {
    bool rg = false;
    for (Var v : inputs) rg = rg || requires_grad(v);
    return push(std::move(value), rg, rg ? std::move(bw) : Backward{});
  }

  void accumulate(Var v, const Matrix& g) {
    Node& n = nodes_[v.id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  void note_kinks(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double x = std::abs(m.data()[i]);
      if (x > 0.0 && x < min_kink_) min_kink_ = x;
    }
  }

  void check_same_shape(Var a, Var b, const char* what) const {
    if (value(a).rows() != value(b).rows() || value(a).cols() != value(b).cols()) {
      throw std::invalid_argument(std::string(what) + ": shape mismatch");
    }
  }

  static void check_row(int r, Eigen::Index rows, const char* what) {
    if (r < 0 || r >= rows) throw std::out_of_range(std::string(what) + ": row index out of range");
  }

  static void check_segments(Eigen::Index rows, const std::vector<int>& segment, int n) {
    if (static_cast<Eigen::Index>(segment.size()) != rows) {
      throw std::invalid_argument("segment vector does not match row count");
    }
    for (int s : segment) {
      if (s < 0 || s >= n) throw std::out_of_range("segment id out of range");
    }
  }

  std::vector<Node> nodes_;
  double min_kink_ = std::numeric_limits<double>::infinity();
};

}  // namespace ackmmea
