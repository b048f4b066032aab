#include "fitb/graph.hpp"

#include <algorithm>
#include <cmath>

#include "fitb/error.hpp"
#include "fitb/rng.hpp"

namespace fitb {

template <class S>
typename Graph<S>::Node& Graph<S>::node(int id) {
  if (id < 0 || id >= static_cast<int>(nodes_.size())) throw StateError("invalid graph value handle");
  return nodes_[static_cast<std::size_t>(id)];
}

template <class S>
const typename Graph<S>::Node& Graph<S>::node(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size())) throw StateError("invalid graph value handle");
  return nodes_[static_cast<std::size_t>(id)];
}

template <class S>
void Graph<S>::check(const Tensor<S>& t, const char* op) const {
  if (checked_) t.check_finite(op);
}

template <class S>
Value Graph<S>::push(Tensor<S> value, bool needs_grad, std::function<void()> back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

template <class S>
Tensor<S>& Graph<S>::grad_buf(int id) {
  Node& n = node(id);
  if (n.grad.size() != n.value.size()) n.grad = Tensor<S>::zeros(n.value.shape());
  return n.grad;
}

template <class S>
Value Graph<S>::input(Tensor<S> t) {
  check(t, "input");
  return push(std::move(t), false);
}

template <class S>
Value Graph<S>::param(ParameterStore<S>& store, const std::string& name) {
  ParamEntry<S>& e = store.entry(name);
  check(e.value, "param");
  Value v = push(e.value, true);
  nodes_.back().param = &e;
  return v;
}

template <class S>
Value Graph<S>::matmul(Value a, Value b) {
  const Tensor<S>& A = node(a.id).value;
  const Tensor<S>& B = node(b.id).value;
  const std::size_t m = A.rows(), k = A.cols(), k2 = B.rows(), n = B.cols();
  if (k != k2)
    throw ShapeError("matmul: inner dimensions disagree, " + A.shape_str() + " vs " + B.shape_str());
  Tensor<S> C({m, n});
  kernels::matmul(A.data(), B.data(), C.data(), m, k, n);
  check(C, "matmul");
  const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, b, oid, m, k, n]() {
    const Tensor<S>& G = node(oid).grad;
    if (node(a.id).needs_grad)
      kernels::matmul_nt_acc(G.data(), node(b.id).value.data(), grad_buf(a.id).data(), m, n, k);
    if (node(b.id).needs_grad)
      kernels::matmul_tn_acc(node(a.id).value.data(), G.data(), grad_buf(b.id).data(), m, k, n);
  };
  return out;
}

template <class S>
Value Graph<S>::matmul_nt(Value a, Value b) {
  const Tensor<S>& A = node(a.id).value;
  const Tensor<S>& B = node(b.id).value;
  const std::size_t m = A.rows(), n = A.cols(), p = B.rows();
  if (n != B.cols())
    throw ShapeError("matmul_nt: column counts disagree, " + A.shape_str() + " vs " + B.shape_str());
  Tensor<S> C({m, p});
  kernels::matmul_nt_acc(A.data(), B.data(), C.data(), m, n, p);
  check(C, "matmul_nt");
  const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, b, oid, m, n, p]() {
    const Tensor<S>& G = node(oid).grad;  // m x p
    if (node(a.id).needs_grad) {
      // dA += G * B  (m x p)(p x n)
      Tensor<S> tmp({m, n});
      kernels::matmul(G.data(), node(b.id).value.data(), tmp.data(), m, p, n);
      Tensor<S>& da = grad_buf(a.id);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += tmp[i];
    }
    if (node(b.id).needs_grad)
      // dB += G^T * A  (p x m)(m x n)
      kernels::matmul_tn_acc(G.data(), node(a.id).value.data(), grad_buf(b.id).data(), m, p, n);
  };
  return out;
}

template <class S>
Value Graph<S>::add(Value a, Value b) {
  const Tensor<S>& A = node(a.id).value;
  const Tensor<S>& B = node(b.id).value;
  const bool broadcast = !A.same_shape(B);
  if (broadcast && !(B.rows() == 1 && B.cols() == A.cols()))
    throw ShapeError("add: shapes " + A.shape_str() + " and " + B.shape_str() +
                     " are neither equal nor row-broadcastable");
  Tensor<S> C(A.shape());
  const std::size_t rows = A.rows(), cols = A.cols();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      C[i * cols + j] = A[i * cols + j] + (broadcast ? B[j] : B[i * cols + j]);
  check(C, "add");
  const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, b, oid, broadcast, rows, cols]() {
    const Tensor<S>& G = node(oid).grad;
    if (node(a.id).needs_grad) {
      Tensor<S>& da = grad_buf(a.id);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += G[i];
    }
    if (node(b.id).needs_grad) {
      Tensor<S>& db = grad_buf(b.id);
      if (broadcast) {
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < cols; ++j) db[j] += G[i * cols + j];
      } else {
        for (std::size_t i = 0; i < db.size(); ++i) db[i] += G[i];
      }
    }
  };
  return out;
}

template <class S>
Value Graph<S>::mul(Value a, Value b) {
  const Tensor<S>& A = node(a.id).value;
  const Tensor<S>& B = node(b.id).value;
  if (!A.same_shape(B))
    throw ShapeError("mul: shapes disagree, " + A.shape_str() + " vs " + B.shape_str());
  Tensor<S> C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * B[i];
  check(C, "mul");
  const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, b, oid]() {
    const Tensor<S>& G = node(oid).grad;
    if (node(a.id).needs_grad) {
      Tensor<S>& da = grad_buf(a.id);
      const Tensor<S>& bv = node(b.id).value;
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += G[i] * bv[i];
    }
    if (node(b.id).needs_grad) {
      Tensor<S>& db = grad_buf(b.id);
      const Tensor<S>& av = node(a.id).value;
      for (std::size_t i = 0; i < db.size(); ++i) db[i] += G[i] * av[i];
    }
  };
  return out;
}

template <class S>
Value Graph<S>::scale(Value a, S k) {
  const Tensor<S>& A = node(a.id).value;
  Tensor<S> C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * k;
  check(C, "scale");
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid, k]() {
    const Tensor<S>& G = node(oid).grad;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += G[i] * k;
  };
  return out;
}

template <class S>
Value Graph<S>::tanh(Value a) {
  const Tensor<S>& A = node(a.id).value;
  Tensor<S> C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = std::tanh(A[i]);
  check(C, "tanh");
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid]() {
    const Tensor<S>& G = node(oid).grad;
    const Tensor<S>& Y = node(oid).value;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += G[i] * (S(1) - Y[i] * Y[i]);
  };
  return out;
}

template <class S>
Value Graph<S>::relu(Value a) {
  const Tensor<S>& A = node(a.id).value;
  Tensor<S> C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] > S(0) ? A[i] : S(0);
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid]() {
    const Tensor<S>& G = node(oid).grad;
    const Tensor<S>& X = node(a.id).value;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < da.size(); ++i)
      if (X[i] > S(0)) da[i] += G[i];
  };
  return out;
}

template <class S>
Value Graph<S>::softmax_rows(Value a) {
  const Tensor<S>& A = node(a.id).value;
  if (A.ndim() > 2 || A.empty()) throw ShapeError("softmax_rows: expected non-empty 1-D or 2-D input");
  const std::size_t rows = A.rows(), cols = A.cols();
  Tensor<S> C(A.shape());
  for (std::size_t i = 0; i < rows; ++i) {
    const S* x = A.data() + i * cols;
    S* y = C.data() + i * cols;
    S mx = x[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    S sum = S(0);
    for (std::size_t j = 0; j < cols; ++j) {
      y[j] = std::exp(x[j] - mx);
      sum += y[j];
    }
    for (std::size_t j = 0; j < cols; ++j) y[j] /= sum;
  }
  check(C, "softmax_rows");
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid, rows, cols]() {
    const Tensor<S>& G = node(oid).grad;
    const Tensor<S>& Y = node(oid).value;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < rows; ++i) {
      const S* g = G.data() + i * cols;
      const S* y = Y.data() + i * cols;
      S dot = S(0);
      for (std::size_t j = 0; j < cols; ++j) dot += g[j] * y[j];
      S* d = da.data() + i * cols;
      for (std::size_t j = 0; j < cols; ++j) d[j] += y[j] * (g[j] - dot);
    }
  };
  return out;
}

template <class S>
Value Graph<S>::concat_cols(const std::vector<Value>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const std::size_t rows = node(parts[0].id).value.rows();
  std::size_t total = 0;
  bool ng = false;
  for (Value p : parts) {
    const Tensor<S>& t = node(p.id).value;
    if (t.rows() != rows) throw ShapeError("concat_cols: row counts disagree");
    total += t.cols();
    ng = ng || node(p.id).needs_grad;
  }
  Tensor<S> C({rows, total});
  std::size_t off = 0;
  for (Value p : parts) {
    const Tensor<S>& t = node(p.id).value;
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(t.data() + i * t.cols(), t.data() + (i + 1) * t.cols(), C.data() + i * total + off);
    off += t.cols();
  }
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  std::vector<Value> parts_copy = parts;
  nodes_.back().back = [this, parts_copy, oid, rows, total]() {
    const Tensor<S>& G = node(oid).grad;
    std::size_t off = 0;
    for (Value p : parts_copy) {
      const std::size_t c = node(p.id).value.cols();
      if (node(p.id).needs_grad) {
        Tensor<S>& d = grad_buf(p.id);
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < c; ++j) d[i * c + j] += G[i * total + off + j];
      }
      off += c;
    }
  };
  return out;
}

template <class S>
Value Graph<S>::concat_rows(const std::vector<Value>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const std::size_t cols = node(parts[0].id).value.cols();
  std::size_t total_rows = 0;
  bool ng = false;
  for (Value p : parts) {
    const Tensor<S>& t = node(p.id).value;
    if (t.cols() != cols) throw ShapeError("concat_rows: column counts disagree");
    total_rows += t.rows();
    ng = ng || node(p.id).needs_grad;
  }
  Tensor<S> C({total_rows, cols});
  std::size_t off = 0;
  for (Value p : parts) {
    const Tensor<S>& t = node(p.id).value;
    std::copy(t.data(), t.data() + t.size(), C.data() + off);
    off += t.size();
  }
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  std::vector<Value> parts_copy = parts;
  nodes_.back().back = [this, parts_copy, oid]() {
    const Tensor<S>& G = node(oid).grad;
    std::size_t off = 0;
    for (Value p : parts_copy) {
      const std::size_t sz = node(p.id).value.size();
      if (node(p.id).needs_grad) {
        Tensor<S>& d = grad_buf(p.id);
        for (std::size_t i = 0; i < sz; ++i) d[i] += G[off + i];
      }
      off += sz;
    }
  };
  return out;
}

template <class S>
Value Graph<S>::reshape(Value a, std::vector<std::size_t> shape) {
  const Tensor<S>& A = node(a.id).value;
  if (Tensor<S>::count(shape) != A.size()) throw ShapeError("reshape: element count mismatch");
  Tensor<S> C(std::move(shape), std::vector<S>(A.raw()));
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid]() {
    const Tensor<S>& G = node(oid).grad;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += G[i];
  };
  return out;
}

template <class S>
Value Graph<S>::slice_cols(Value a, std::size_t c0, std::size_t c1) {
  const Tensor<S>& A = node(a.id).value;
  const std::size_t rows = A.rows(), cols = A.cols();
  if (!(c0 < c1 && c1 <= cols)) throw ShapeError("slice_cols: bad range");
  const std::size_t w = c1 - c0;
  Tensor<S> C({rows, w});
  for (std::size_t i = 0; i < rows; ++i)
    std::copy(A.data() + i * cols + c0, A.data() + i * cols + c1, C.data() + i * w);
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid, c0, w, rows, cols]() {
    const Tensor<S>& G = node(oid).grad;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < w; ++j) da[i * cols + c0 + j] += G[i * w + j];
  };
  return out;
}

template <class S>
Value Graph<S>::slice_rows(Value a, std::size_t r0, std::size_t r1) {
  const Tensor<S>& A = node(a.id).value;
  const std::size_t rows = A.rows(), cols = A.cols();
  if (!(r0 < r1 && r1 <= rows)) throw ShapeError("slice_rows: bad range");
  const std::size_t h = r1 - r0;
  Tensor<S> C({h, cols});
  std::copy(A.data() + r0 * cols, A.data() + r1 * cols, C.data());
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid, r0, h, cols]() {
    const Tensor<S>& G = node(oid).grad;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < h * cols; ++i) da[r0 * cols + i] += G[i];
  };
  return out;
}

template <class S>
Value Graph<S>::lookup_rows(Value table, const std::vector<std::size_t>& ids) {
  const Tensor<S>& T = node(table.id).value;
  const std::size_t rows = T.rows(), cols = T.cols();
  if (ids.empty()) throw ShapeError("lookup_rows: no indices");
  for (std::size_t id : ids)
    if (id >= rows) throw IndexError("lookup_rows: index " + std::to_string(id) + " out of range");
  Tensor<S> C({ids.size(), cols});
  for (std::size_t i = 0; i < ids.size(); ++i)
    std::copy(T.data() + ids[i] * cols, T.data() + (ids[i] + 1) * cols, C.data() + i * cols);
  const bool ng = node(table.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  std::vector<std::size_t> ids_copy = ids;
  nodes_.back().back = [this, table, oid, ids_copy, cols]() {
    const Tensor<S>& G = node(oid).grad;
    Tensor<S>& dt = grad_buf(table.id);
    for (std::size_t i = 0; i < ids_copy.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) dt[ids_copy[i] * cols + j] += G[i * cols + j];
  };
  return out;
}

template <class S>
Value Graph<S>::layer_norm(Value x, Value gain, Value bias, S eps) {
  const Tensor<S>& X = node(x.id).value;
  const Tensor<S>& Gn = node(gain.id).value;
  const Tensor<S>& Bs = node(bias.id).value;
  const std::size_t rows = X.rows(), cols = X.cols();
  if (Gn.size() != cols || Bs.size() != cols)
    throw ShapeError("layer_norm: gain/bias must have one entry per column");
  Tensor<S> Y(X.shape());
  std::vector<S> rstd(rows), xhat(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const S* xr = X.data() + i * cols;
    S mean = S(0);
    for (std::size_t j = 0; j < cols; ++j) mean += xr[j];
    mean /= static_cast<S>(cols);
    S var = S(0);
    for (std::size_t j = 0; j < cols; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<S>(cols);
    const S r = S(1) / std::sqrt(var + eps);
    rstd[i] = r;
    for (std::size_t j = 0; j < cols; ++j) {
      const S xh = (xr[j] - mean) * r;
      xhat[i * cols + j] = xh;
      Y[i * cols + j] = Gn[j] * xh + Bs[j];
    }
  }
  check(Y, "layer_norm");
  const bool ng = node(x.id).needs_grad || node(gain.id).needs_grad || node(bias.id).needs_grad;
  Value out = push(std::move(Y), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, x, gain, bias, oid, rows, cols, rstd = std::move(rstd),
                        xhat = std::move(xhat)]() {
    const Tensor<S>& G = node(oid).grad;
    const Tensor<S>& Gn = node(gain.id).value;
    if (node(gain.id).needs_grad) {
      Tensor<S>& dg = grad_buf(gain.id);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) dg[j] += G[i * cols + j] * xhat[i * cols + j];
    }
    if (node(bias.id).needs_grad) {
      Tensor<S>& db = grad_buf(bias.id);
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) db[j] += G[i * cols + j];
    }
    if (node(x.id).needs_grad) {
      Tensor<S>& dx = grad_buf(x.id);
      for (std::size_t i = 0; i < rows; ++i) {
        S sum_d = S(0), sum_dx = S(0);
        for (std::size_t j = 0; j < cols; ++j) {
          const S dh = G[i * cols + j] * Gn[j];
          sum_d += dh;
          sum_dx += dh * xhat[i * cols + j];
        }
        const S inv_n = S(1) / static_cast<S>(cols);
        for (std::size_t j = 0; j < cols; ++j) {
          const S dh = G[i * cols + j] * Gn[j];
          dx[i * cols + j] +=
              rstd[i] * (dh - inv_n * sum_d - xhat[i * cols + j] * inv_n * sum_dx);
        }
      }
    }
  };
  return out;
}

template <class S>
Value Graph<S>::cross_entropy_from_logits(Value logits, const std::vector<std::size_t>& targets,
                                          const std::vector<std::uint8_t>* mask) {
  const Tensor<S>& X = node(logits.id).value;
  const std::size_t rows = X.rows(), cols = X.cols();
  if (targets.size() != rows) throw ShapeError("cross_entropy: one target per logits row required");
  if (mask && mask->size() != rows) throw ShapeError("cross_entropy: mask length mismatch");
  for (std::size_t t : targets)
    if (t >= cols) throw IndexError("cross_entropy: target " + std::to_string(t) + " out of range");
  std::size_t active = 0;
  for (std::size_t i = 0; i < rows; ++i)
    if (!mask || (*mask)[i]) ++active;
  if (active == 0) throw DataError("cross_entropy: all rows masked out");

  // Cache softmax rows for backward.
  std::vector<S> probs(rows * cols);
  double loss = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    const S* x = X.data() + i * cols;
    S mx = x[0];
    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, x[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) sum += std::exp(static_cast<double>(x[j] - mx));
    const double lse = static_cast<double>(mx) + std::log(sum);
    for (std::size_t j = 0; j < cols; ++j)
      probs[i * cols + j] = static_cast<S>(std::exp(static_cast<double>(x[j]) - lse));
    if (!mask || (*mask)[i]) loss += lse - static_cast<double>(x[targets[i]]);
  }
  loss /= static_cast<double>(active);
  Tensor<S> out_t({std::size_t(1)}, {static_cast<S>(loss)});
  check(out_t, "cross_entropy");
  const bool ng = node(logits.id).needs_grad;
  Value out = push(std::move(out_t), ng);
  if (!ng) return out;
  const int oid = out.id;
  std::vector<std::size_t> targets_copy = targets;
  std::vector<std::uint8_t> mask_copy = mask ? *mask : std::vector<std::uint8_t>();
  nodes_.back().back = [this, logits, oid, rows, cols, active, probs = std::move(probs),
                        targets_copy = std::move(targets_copy), mask_copy = std::move(mask_copy)]() {
    const S g = node(oid).grad[0];
    Tensor<S>& dx = grad_buf(logits.id);
    const S w = g / static_cast<S>(active);
    for (std::size_t i = 0; i < rows; ++i) {
      if (!mask_copy.empty() && !mask_copy[i]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        S p = probs[i * cols + j];
        if (j == targets_copy[i]) p -= S(1);
        dx[i * cols + j] += w * p;
      }
    }
  };
  return out;
}

template <class S>
Value Graph<S>::dropout(Value a, double p, std::uint64_t seed) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: p must be in [0, 1)");
  if (p == 0.0) return a;
  const Tensor<S>& A = node(a.id).value;
  Rng rng(seed);
  std::vector<S> mask(A.size());
  const S keep_scale = static_cast<S>(1.0 / (1.0 - p));
  for (auto& m : mask) m = rng.bernoulli(p) ? S(0) : keep_scale;
  Tensor<S> C(A.shape());
  for (std::size_t i = 0; i < C.size(); ++i) C[i] = A[i] * mask[i];
  const bool ng = node(a.id).needs_grad;
  Value out = push(std::move(C), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid, mask = std::move(mask)]() {
    const Tensor<S>& G = node(oid).grad;
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += G[i] * mask[i];
  };
  return out;
}

template <class S>
Value Graph<S>::sum_all(Value a) {
  const Tensor<S>& A = node(a.id).value;
  double s = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) s += static_cast<double>(A[i]);
  const bool ng = node(a.id).needs_grad;
  Value out = push(Tensor<S>({std::size_t(1)}, {static_cast<S>(s)}), ng);
  if (!ng) return out;
  const int oid = out.id;
  nodes_.back().back = [this, a, oid]() {
    const S g = node(oid).grad[0];
    Tensor<S>& da = grad_buf(a.id);
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
  };
  return out;
}

template <class S>
Value Graph<S>::mean_all(Value a) {
  const std::size_t n = node(a.id).value.size();
  return scale(sum_all(a), S(1) / static_cast<S>(n));
}

template <class S>
void Graph<S>::backward(Value loss) {
  Node& ln = node(loss.id);
  if (ln.value.size() != 1) throw ShapeError("backward: loss must be a scalar");
  if (!ln.needs_grad) throw StateError("backward: loss does not depend on any parameter");
  grad_buf(loss.id)[0] = S(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad || n.grad.size() != n.value.size()) continue;  // grad never reached
    if (n.back) n.back();
    if (n.param) {
      Tensor<S>& g = n.param->grad;
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
      n.param->grad_populated = true;
    }
  }
}

template class Graph<float>;
template class Graph<double>;

template <class S>
Value scaled_dot_product_attention(Graph<S>& g, Value q, Value k, Value v, Value mask, S scale) {
  Value scores = g.scale(g.matmul_nt(q, k), scale);
  if (mask.valid()) scores = g.add(scores, mask);
  return g.matmul(g.softmax_rows(scores), v);
}

template Value scaled_dot_product_attention<float>(Graph<float>&, Value, Value, Value, Value, float);
template Value scaled_dot_product_attention<double>(Graph<double>&, Value, Value, Value, Value,
                                                    double);

}  // namespace fitb
