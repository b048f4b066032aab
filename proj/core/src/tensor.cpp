#include "fitb/tensor.hpp"

#include <cmath>

namespace fitb {

template <class S>
bool Tensor<S>::all_finite() const {
  for (S x : data_)
    if (!std::isfinite(static_cast<double>(x))) return false;
  return true;
}

template <class S>
void Tensor<S>::check_finite(const std::string& context) const {
  if (!all_finite()) throw NumericError("non-finite value in " + context);
}

template class Tensor<float>;
template class Tensor<double>;

namespace kernels {

template <class S>
void matmul(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    S* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = S(0);
    const S* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const S av = arow[p];
      const S* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template <class S>
void matmul_nt_acc(const S* a, const S* b, S* c, std::size_t m, std::size_t n, std::size_t p) {
  for (std::size_t i = 0; i < m; ++i) {
    const S* arow = a + i * n;
    S* crow = c + i * p;
    for (std::size_t j = 0; j < p; ++j) {
      const S* brow = b + j * n;
      S acc = S(0);
      for (std::size_t t = 0; t < n; ++t) acc += arow[t] * brow[t];
      crow[j] += acc;
    }
  }
}

template <class S>
void matmul_tn_acc(const S* a, const S* b, S* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < m; ++p) {
    const S* arow = a + p * k;
    const S* brow = b + p * n;
    for (std::size_t i = 0; i < k; ++i) {
      const S av = arow[i];
      if (av == S(0)) continue;
      S* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

template void matmul<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t);
template void matmul<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
template void matmul_nt_acc<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t);
template void matmul_nt_acc<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
template void matmul_tn_acc<float>(const float*, const float*, float*, std::size_t, std::size_t, std::size_t);
template void matmul_tn_acc<double>(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);

}  // namespace kernels

}  // namespace fitb
