#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/jet.hpp"

namespace nonholo {

using cplx = std::complex<double>;

// Dense row-major multi-index array.
template <class T>
class Array {
 public:
  Array() = default;
  Array(std::initializer_list<int> dims, const T& init = T{}) : dims_(dims) { allocate(init); }
  explicit Array(std::vector<int> dims, const T& init = T{}) : dims_(std::move(dims)) { allocate(init); }

  const std::vector<int>& dims() const { return dims_; }
  int rank() const { return static_cast<int>(dims_.size()); }
  int dim(int k) const { return dims_[k]; }
  std::size_t size() const { return data_.size(); }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator()(int i) { return data_[i]; }
  const T& operator()(int i) const { return data_[i]; }
  T& operator()(int i, int j) { return data_[i * dims_[1] + j]; }
  const T& operator()(int i, int j) const { return data_[i * dims_[1] + j]; }
  T& operator()(int i, int j, int k) { return data_[(i * dims_[1] + j) * dims_[2] + k]; }
  const T& operator()(int i, int j, int k) const { return data_[(i * dims_[1] + j) * dims_[2] + k]; }
  T& operator()(int i, int j, int k, int l) { return data_[((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l]; }
  const T& operator()(int i, int j, int k, int l) const {
    return data_[((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l];
  }
  T& operator()(int i, int j, int k, int l, int m) {
    return data_[(((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l) * dims_[4] + m];
  }
  const T& operator()(int i, int j, int k, int l, int m) const {
    return data_[(((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l) * dims_[4] + m];
  }
  T& at(std::span<const int> idx) { return data_[flat(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[flat(idx)]; }

  std::size_t flat(std::span<const int> idx) const {
    std::size_t f = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) f = f * dims_[k] + idx[k];
    return f;
  }

 private:
  void allocate(const T& init) {
    std::size_t n = 1;
    for (int d : dims_) n *= static_cast<std::size_t>(d);
    data_.assign(n, init);
  }
  std::vector<int> dims_;
  std::vector<T> data_;
};

using JetArray = Array<Jet>;
using RealArray = Array<double>;
using CplxArray = Array<cplx>;

// Values of a jet array at the base point.
inline RealArray values(const JetArray& a) {
  RealArray r(a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i].value();
  return r;
}

inline int min_order(const JetArray& a) {
  int p = Jet::kExactOrder;
  for (const Jet& j : a.data()) p = std::min(p, j.order());
  return p;
}

template <class T>
double max_abs(const Array<T>& a) {
  double m = 0.0;
  for (const auto& x : a.data()) m = std::max(m, static_cast<double>(std::abs(x)));
  return m;
}

template <class T>
double max_abs_diff(const Array<T>& a, const Array<T>& b) {
  if (a.dims() != b.dims()) fail(ErrorCode::InvalidArgument, "shape mismatch in comparison");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, static_cast<double>(std::abs(a[i] - b[i])));
  return m;
}

enum class Variance { Up, Down };
enum class IndexRole { H, V, Total, SpinorUnprimed, SpinorPrimed };

// Dense multi-index array at a point, tagged per index with variance and role.
// h-indices occupy slots 0..n-1 and v-indices n..n+m-1 of a total index.
struct TensorBlock {
  std::string name;
  std::vector<Variance> variance;
  std::vector<IndexRole> roles;
  RealArray values;
};

inline TensorBlock make_block(std::string name, std::vector<Variance> var, std::vector<IndexRole> roles,
                              RealArray values) {
  return TensorBlock{std::move(name), std::move(var), std::move(roles), std::move(values)};
}

}  // namespace nonholo
