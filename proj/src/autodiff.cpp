#include "adnet/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adnet/error.hpp"

namespace adnet {

const Tensor& Var::value() const {
  if (!tape_) throw Error(ErrorCode::ShapeMismatch, "use of an unbound Var");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  if (!value.all_finite()) throw Error(ErrorCode::NonFiniteValue, "constant contains NaN/Inf");
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::view(const Tensor& value) {
  if (!value.all_finite()) throw Error(ErrorCode::NonFiniteValue, "constant contains NaN/Inf");
  Node node;
  node.external = &value;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const Tensor& value, Tensor& grad_sink) {
  if (grad_sink.shape() != value.shape())
    throw Error(ErrorCode::ShapeMismatch, "gradient buffer " + shape_string(grad_sink.shape()) +
                                              " does not match parameter " + shape_string(value.shape()));
  Node node;
  node.external = &value;
  node.sink = &grad_sink;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.value;
}

Tensor& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(value(id).shape());
  return n.grad;
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) throw Error(ErrorCode::NonFiniteValue, "primitive produced NaN/Inf");
  bool needs = false;
  for (const Var& in : inputs) {
    if (in.tape() != this) throw Error(ErrorCode::ShapeMismatch, "operands recorded on different tapes");
    needs = needs || nodes_[in.id()].requires_grad;
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(Var loss) {
  if (loss.tape() != this) throw Error(ErrorCode::NotScalarLoss, "loss is not recorded on this tape");
  if (value(loss.id()).size() != 1)
    throw Error(ErrorCode::NotScalarLoss, "loss has shape " + shape_string(value(loss.id()).shape()));
  if (!nodes_[loss.id()].requires_grad) return;
  grad(loss.id()).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, i);
    if (n.sink) {
      if (!n.grad.all_finite()) throw Error(ErrorCode::NonFiniteValue, "gradient contains NaN/Inf");
      auto dst = n.sink->data();
      auto src = n.grad.data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

namespace {

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw Error(ErrorCode::ShapeMismatch, std::string(op) + " expects a matrix, got " + shape_string(t.shape()));
}

Tape& same_tape(Var a, Var b) {
  if (!a.tape() || a.tape() != b.tape()) throw Error(ErrorCode::ShapeMismatch, "operands recorded on different tapes");
  return *a.tape();
}

template <class Forward, class Derivative>
Var unary(Var a, Forward f, Derivative df) {
  Tape& tape = *a.tape();
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id();
  Var inputs[] = {a};
  return tape.record(std::move(y), inputs, [ia, df](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& gy = t.grad(self);
    Tensor& gx = t.grad(ia);
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * df(x[i], y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_matrix(A, "matmul");
  require_matrix(B, "matmul");
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k)
    throw Error(ErrorCode::ShapeMismatch, "matmul " + shape_string(A.shape()) + " x " + shape_string(B.shape()));
  Tensor C({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = &C.at(i, 0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.at(i, p);
      if (aip == 0.0) continue;
      const double* brow = &B.at(p, 0);
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  const std::size_t ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return tape.record(std::move(C), inputs, [ia, ib, m, k, n](Tape& t, std::size_t self) {
    const Tensor& A = t.value(ia);
    const Tensor& B = t.value(ib);
    const Tensor& G = t.grad(self);
    if (t.requires_grad(ia)) {
      Tensor& GA = t.grad(ia);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &G.at(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = &B.at(p, 0);
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          GA.at(i, p) += acc;
        }
      }
    }
    if (t.requires_grad(ib)) {
      Tensor& GB = t.grad(ib);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = &G.at(i, 0);
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A.at(i, p);
          if (aip == 0.0) continue;
          double* gbrow = &GB.at(p, 0);
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  if (A.shape() == B.shape()) {
    Tensor C = A;
    for (std::size_t i = 0; i < C.size(); ++i) C[i] += B[i];
    return tape.record(std::move(C), inputs, [ia, ib](Tape& t, std::size_t self) {
      const Tensor& G = t.grad(self);
      for (std::size_t id : {ia, ib}) {
        if (!t.requires_grad(id)) continue;
        Tensor& g = t.grad(id);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i];
      }
    });
  }
  if (A.rank() == 2 && B.rank() == 2 && B.rows() == 1 && B.cols() == A.cols()) {
    const std::size_t m = A.rows(), n = A.cols();
    Tensor C = A;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) C.at(i, j) += B[j];
    return tape.record(std::move(C), inputs, [ia, ib, m, n](Tape& t, std::size_t self) {
      const Tensor& G = t.grad(self);
      if (t.requires_grad(ia)) {
        Tensor& g = t.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i];
      }
      if (t.requires_grad(ib)) {
        Tensor& g = t.grad(ib);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < n; ++j) g[j] += G.at(i, j);
      }
    });
  }
  throw Error(ErrorCode::ShapeMismatch, "add " + shape_string(A.shape()) + " + " + shape_string(B.shape()));
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape())
    throw Error(ErrorCode::ShapeMismatch, "sub " + shape_string(A.shape()) + " - " + shape_string(B.shape()));
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] -= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return tape.record(std::move(C), inputs, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(ia)) {
      Tensor& g = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i];
    }
    if (t.requires_grad(ib)) {
      Tensor& g = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= G[i];
    }
  });
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.shape() != B.shape())
    throw Error(ErrorCode::ShapeMismatch, "mul " + shape_string(A.shape()) + " * " + shape_string(B.shape()));
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
  const std::size_t ia = a.id(), ib = b.id();
  Var inputs[] = {a, b};
  return tape.record(std::move(C), inputs, [ia, ib](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(ia)) {
      const Tensor& B = t.value(ib);
      Tensor& g = t.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i] * B[i];
    }
    if (t.requires_grad(ib)) {
      const Tensor& A = t.value(ia);
      Tensor& g = t.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += G[i] * A[i];
    }
  });
}

Var affine(Var a, double scale, double shift) {
  return unary(
      a, [scale, shift](double x) { return scale * x + shift; },
      [scale](double, double) { return scale; });
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw Error(ErrorCode::ShapeMismatch, "concat of zero tensors");
  if (axis > 1) throw Error(ErrorCode::ShapeMismatch, "concat axis must be 0 or 1");
  Tape& tape = *parts.front().tape();
  const std::size_t other = 1 - axis;
  const std::size_t fixed = parts.front().value().rank() == 2 ? parts.front().value().dim(other) : 0;
  std::size_t total = 0;
  std::vector<std::size_t> ids, extents;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    require_matrix(v, "concat");
    if (v.dim(other) != fixed) throw Error(ErrorCode::ShapeMismatch, "concat operands disagree off-axis");
    ids.push_back(p.id());
    extents.push_back(v.dim(axis));
    total += v.dim(axis);
  }
  const std::size_t rows = axis == 0 ? total : fixed;
  const std::size_t cols = axis == 0 ? fixed : total;
  Tensor out({rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < v.rows(); ++r)
      for (std::size_t c = 0; c < v.cols(); ++c)
        out.at(axis == 0 ? r + offset : r, axis == 0 ? c : c + offset) = v.at(r, c);
    offset += v.dim(axis);
  }
  return tape.record(std::move(out), parts, [ids, extents, axis](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(ids[k])) {
        Tensor& g = t.grad(ids[k]);
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c)
            g.at(r, c) += G.at(axis == 0 ? r + offset : r, axis == 0 ? c : c + offset);
      }
      offset += extents[k];
    }
  });
}

Var slice(Var a, std::size_t axis, std::size_t start, std::size_t length) {
  Tape& tape = *a.tape();
  const Tensor& A = a.value();
  require_matrix(A, "slice");
  if (axis > 1 || length == 0 || start + length > A.dim(axis))
    throw Error(ErrorCode::ShapeMismatch, "slice [" + std::to_string(start) + ", +" + std::to_string(length) +
                                              ") out of range for " + shape_string(A.shape()));
  const std::size_t rows = axis == 0 ? length : A.rows();
  const std::size_t cols = axis == 0 ? A.cols() : length;
  const std::size_t r0 = axis == 0 ? start : 0, c0 = axis == 0 ? 0 : start;
  Tensor out({rows, cols});
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(&A.at(r + r0, c0), cols, &out.at(r, 0));
  const std::size_t ia = a.id();
  Var inputs[] = {a};
  return tape.record(std::move(out), inputs, [ia, rows, cols, r0, c0](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& G = t.grad(self);
    Tensor& g = t.grad(ia);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) g.at(r + r0, c + c0) += G.at(r, c);
  });
}

Var transpose(Var a) {
  Tape& tape = *a.tape();
  const Tensor& A = a.value();
  require_matrix(A, "transpose");
  Tensor out({A.cols(), A.rows()});
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t c = 0; c < A.cols(); ++c) out.at(c, r) = A.at(r, c);
  const std::size_t ia = a.id();
  Var inputs[] = {a};
  return tape.record(std::move(out), inputs, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& G = t.grad(self);
    Tensor& g = t.grad(ia);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) g.at(r, c) += G.at(c, r);
  });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var clamp(Var a, double lo, double hi) {
  return unary(
      a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
      [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
}

Var softmax(Var a, std::size_t axis, std::optional<std::span<const double>> mask) {
  Tape& tape = *a.tape();
  const Tensor& A = a.value();
  require_matrix(A, "softmax");
  if (axis > 1) throw Error(ErrorCode::ShapeMismatch, "softmax axis must be 0 or 1");
  const std::size_t len = A.dim(axis);
  const std::size_t groups = A.dim(1 - axis);
  std::vector<char> keep(len, 1);
  if (mask) {
    if (mask->size() != len)
      throw Error(ErrorCode::ShapeMismatch, "softmax mask length " + std::to_string(mask->size()) +
                                                " != axis length " + std::to_string(len));
    for (std::size_t i = 0; i < len; ++i) {
      const double m = (*mask)[i];
      if (m != 0.0 && m != 1.0) throw Error(ErrorCode::ShapeMismatch, "softmax mask entries must be 0 or 1");
      keep[i] = m != 0.0;
    }
    if (std::none_of(keep.begin(), keep.end(), [](char k) { return k; }))
      throw Error(ErrorCode::ShapeMismatch, "softmax mask excludes every position");
  }
  auto index = [&A, axis](std::size_t g, std::size_t i) { return axis == 0 ? i * A.cols() + g : g * A.cols() + i; };
  Tensor out(A.shape());
  for (std::size_t g = 0; g < groups; ++g) {
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < len; ++i)
      if (keep[i]) hi = std::max(hi, A[index(g, i)]);
    double z = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double e = keep[i] ? std::exp(A[index(g, i)] - hi) : 0.0;
      out[index(g, i)] = e;
      z += e;
    }
    for (std::size_t i = 0; i < len; ++i) out[index(g, i)] /= z;
  }
  const std::size_t ia = a.id();
  const std::size_t stride_cols = A.cols();
  Var inputs[] = {a};
  return tape.record(std::move(out), inputs, [ia, axis, len, groups, stride_cols](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    auto index = [axis, stride_cols](std::size_t g, std::size_t i) {
      return axis == 0 ? i * stride_cols + g : g * stride_cols + i;
    };
    const Tensor& Y = t.value(self);
    const Tensor& G = t.grad(self);
    Tensor& gx = t.grad(ia);
    for (std::size_t g = 0; g < groups; ++g) {
      double dot = 0.0;
      for (std::size_t i = 0; i < len; ++i) dot += Y[index(g, i)] * G[index(g, i)];
      for (std::size_t i = 0; i < len; ++i) gx[index(g, i)] += Y[index(g, i)] * (G[index(g, i)] - dot);
    }
  });
}

Var conv1d(Var input, Var kernels) {
  Tape& tape = same_tape(input, kernels);
  const Tensor& X = input.value();
  const Tensor& K = kernels.value();
  require_matrix(X, "conv1d");
  if (K.rank() != 3 || K.dim(2) != X.cols())
    throw Error(ErrorCode::ShapeMismatch, "conv1d kernels " + shape_string(K.shape()) + " vs input " + shape_string(X.shape()));
  const std::size_t T = X.rows(), C = X.cols(), F = K.dim(0), w = K.dim(1);
  if (w % 2 == 0) throw Error(ErrorCode::ShapeMismatch, "conv1d kernel width must be odd, got " + std::to_string(w));
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(w / 2);
  Tensor Y({T, F});
  const double* x = X.data().data();
  const double* k = K.data().data();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < w; ++j) {
      const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t + j) - half;
      if (s < 0 || s >= static_cast<std::ptrdiff_t>(T)) continue;
      const double* xrow = x + static_cast<std::size_t>(s) * C;
      for (std::size_t f = 0; f < F; ++f) {
        const double* krow = k + (f * w + j) * C;
        double acc = 0.0;
        for (std::size_t c = 0; c < C; ++c) acc += xrow[c] * krow[c];
        Y.at(t, f) += acc;
      }
    }
  }
  const std::size_t ix = input.id(), ik = kernels.id();
  Var inputs[] = {input, kernels};
  return tape.record(std::move(Y), inputs, [ix, ik, T, C, F, w, half](Tape& t, std::size_t self) {
    const Tensor& G = t.grad(self);
    const bool gx_needed = t.requires_grad(ix), gk_needed = t.requires_grad(ik);
    const double* x = t.value(ix).data().data();
    const double* k = t.value(ik).data().data();
    double* gx = gx_needed ? t.grad(ix).data().data() : nullptr;
    double* gk = gk_needed ? t.grad(ik).data().data() : nullptr;
    for (std::size_t tt = 0; tt < T; ++tt) {
      for (std::size_t j = 0; j < w; ++j) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(tt + j) - half;
        if (s < 0 || s >= static_cast<std::ptrdiff_t>(T)) continue;
        const std::size_t row = static_cast<std::size_t>(s) * C;
        for (std::size_t f = 0; f < F; ++f) {
          const double g = G.at(tt, f);
          if (g == 0.0) continue;
          const std::size_t kofs = (f * w + j) * C;
          if (gk)
            for (std::size_t c = 0; c < C; ++c) gk[kofs + c] += g * x[row + c];
          if (gx)
            for (std::size_t c = 0; c < C; ++c) gx[row + c] += g * k[kofs + c];
        }
      }
    }
  });
}

Var max_pool1d(Var a, std::size_t width) {
  Tape& tape = *a.tape();
  const Tensor& A = a.value();
  require_matrix(A, "max_pool1d");
  if (width == 0 || width > A.rows())
    throw Error(ErrorCode::ShapeMismatch, "max_pool1d width " + std::to_string(width) + " for " + shape_string(A.shape()));
  const std::size_t out_rows = A.rows() / width, C = A.cols();
  Tensor out({out_rows, C});
  std::vector<std::size_t> argmax(out_rows * C);
  for (std::size_t r = 0; r < out_rows; ++r)
    for (std::size_t c = 0; c < C; ++c) {
      std::size_t best = r * width;
      for (std::size_t i = r * width + 1; i < (r + 1) * width; ++i)
        if (A.at(i, c) > A.at(best, c)) best = i;
      argmax[r * C + c] = best;
      out.at(r, c) = A.at(best, c);
    }
  const std::size_t ia = a.id();
  Var inputs[] = {a};
  return tape.record(std::move(out), inputs, [ia, argmax = std::move(argmax), C](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const Tensor& G = t.grad(self);
    Tensor& g = t.grad(ia);
    for (std::size_t i = 0; i < argmax.size(); ++i) g.at(argmax[i], i % C) += G[i];
  });
}

Var sum(Var a) {
  Tape& tape = *a.tape();
  const Tensor& A = a.value();
  double s = 0.0;
  for (double v : A.data()) s += v;
  const std::size_t ia = a.id();
  Var inputs[] = {a};
  return tape.record(Tensor::scalar(s), inputs, [ia](Tape& t, std::size_t self) {
    if (!t.requires_grad(ia)) return;
    const double g = t.grad(self)[0];
    for (double& v : t.grad(ia).data()) v += g;
  });
}

Var mean(Var a) { return affine(sum(a), 1.0 / static_cast<double>(a.value().size())); }

}  // namespace adnet
