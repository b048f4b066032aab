#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "fitb/error.hpp"

namespace fitb {

// Dense row-major real array. Values are plain data; gradients live in
// the autodiff graph nodes and in ParameterStore entries.
template <class S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    data_.assign(count(shape_), S(0));
  }

  Tensor(std::vector<std::size_t> shape, std::vector<S> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != count(shape_))
      throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_str());
  }

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<std::size_t> shape, S value) {
    Tensor t(std::move(shape));
    for (auto& x : t.data_) x = value;
    return t;
  }

  static Tensor row(std::initializer_list<S> values) {
    return Tensor({std::size_t(1), values.size()}, std::vector<S>(values));
  }

  static Tensor vec(std::vector<S> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<S> values) {
    return Tensor({rows, cols}, std::move(values));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Matrix view: a 1-D tensor counts as a single row.
  std::size_t rows() const {
    if (shape_.size() <= 1) return shape_.empty() ? 0 : 1;
    return shape_[0];
  }
  std::size_t cols() const {
    if (shape_.empty()) return 0;
    return shape_.size() == 1 ? shape_[0] : shape_[1];
  }

  S* data() { return data_.data(); }
  const S* data() const { return data_.data(); }
  std::vector<S>& raw() { return data_; }
  const std::vector<S>& raw() const { return data_; }

  S& operator[](std::size_t i) { return data_[i]; }
  S operator[](std::size_t i) const { return data_[i]; }

  S& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  S at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const;

  // Throws NumericError naming `context` if any value is NaN/Inf.
  void check_finite(const std::string& context) const;

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape_[i]);
    }
    return s + "]";
  }

  template <class T>
  Tensor<T> cast() const {
    std::vector<T> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<T>(data_[i]);
    return Tensor<T>(shape_, std::move(out));
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
      if (d == 0) throw ShapeError("tensor: zero-sized dimension");
      n *= d;
    }
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<std::size_t> shape_;
  std::vector<S> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

// Raw matmul kernels shared by forward and backward passes.
// All matrices are dense row-major; `acc` variants accumulate into c.
namespace kernels {

// c = a(m x k) * b(k x n)
template <class S>
void matmul(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n);

// c += a(m x n) * b(p x n)^T   -> (m x p)
template <class S>
void matmul_nt_acc(const S* a, const S* b, S* c, std::size_t m, std::size_t n, std::size_t p);

// c += a(m x k)^T * b(m x n)   -> (k x n)
template <class S>
void matmul_tn_acc(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n);

}  // namespace kernels

}  // namespace fitb
