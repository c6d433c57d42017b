#pragma once

#include <algorithm>
#include <vector>

#include "core/jet.hpp"

namespace kundt {

enum class Slot : std::uint8_t { Cov, Con };

/// Dense point-evaluated tensor. Components are jets sharing one base point
/// and order; a plain scalar is an order-zero jet. Storage is row-major with
/// the first slot most significant.
template <class S>
class Tensor {
 public:
  Tensor() = default;

  Tensor(int dim, std::vector<Slot> variance, Jet<S> fill)
      : dim_(dim), var_(std::move(variance)) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < var_.size(); ++i) n *= dim_;
    c_.assign(n, fill);
  }

  static Tensor scalar(Jet<S> v) {
    Tensor t;
    t.dim_ = 0;
    t.c_ = {std::move(v)};
    return t;
  }

  int dim() const { return dim_; }
  int rank() const { return static_cast<int>(var_.size()); }
  const std::vector<Slot>& variance() const { return var_; }
  Slot slot(int i) const { return var_[i]; }
  std::size_t size() const { return c_.size(); }

  const Jet<S>& at(std::size_t flat) const { return c_[flat]; }
  Jet<S>& at(std::size_t flat) { return c_[flat]; }

  const Jet<S>& operator()(const std::vector<int>& idx) const { return c_[flatten(idx)]; }
  Jet<S>& operator()(const std::vector<int>& idx) { return c_[flatten(idx)]; }

  std::size_t flatten(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * dim_ + i;
    return f;
  }

  const std::vector<Jet<S>>& components() const { return c_; }

  int jet_order() const { return c_.empty() ? 0 : c_[0].order(); }

  bool is_zero() const {
    for (const auto& j : c_)
      if (!j.is_zero()) return false;
    return true;
  }

  /// Largest |component value| (the constant coefficient), as a double.
  double max_abs_value() const {
    double m = 0;
    for (const auto& j : c_)
      m = std::max(m, std::fabs(ScalarTraits<S>::to_double(j.value())));
    return m;
  }

  bool values_all_zero() const {
    for (const auto& j : c_)
      if (!ScalarTraits<S>::is_zero(j.value())) return false;
    return true;
  }

  Tensor& operator+=(const Tensor& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  Tensor operator-() const {
    Tensor r = *this;
    for (auto& j : r.c_) j = -j;
    return r;
  }
  Tensor& operator*=(const S& s) {
    for (auto& j : c_) j *= s;
    return *this;
  }
  friend Tensor operator*(Tensor a, const S& s) { return a *= s; }
  friend Tensor operator*(const S& s, Tensor a) { return a *= s; }

  Tensor scaled(const Jet<S>& f) const {
    Tensor r = *this;
    for (auto& j : r.c_) j = j * f;
    return r;
  }

  void require_same_shape(const Tensor& o) const {
    if (dim_ != o.dim_ || var_ != o.var_)
      throw Error(ErrorKind::Shape, "tensor shape mismatch");
  }

 private:
  int dim_ = 0;
  std::vector<Slot> var_;
  std::vector<Jet<S>> c_;
};

/// Advances a multi-digit index in row-major order; false after wrap-around.
inline bool next_index(std::vector<int>& idx, int dim) {
  for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
    if (++idx[i] < dim) return true;
    idx[i] = 0;
  }
  return false;
}

template <class S>
Tensor<S> tensor_product(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::Shape, "tensor dimension mismatch");
  std::vector<Slot> var = a.variance();
  var.insert(var.end(), b.variance().begin(), b.variance().end());
  Tensor<S> r(a.dim(), var, a.at(0) * S(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      r.at(i * b.size() + j) = a.at(i) * b.at(j);
  return r;
}

/// Contracts two slots of opposite variance by summing the paired index.
template <class S>
Tensor<S> contract(const Tensor<S>& a, int s1, int s2) {
  if (s1 == s2 || s1 < 0 || s2 < 0 || s1 >= a.rank() || s2 >= a.rank())
    throw Error(ErrorKind::Shape, "bad contraction slots");
  if (a.slot(s1) == a.slot(s2))
    throw Error(ErrorKind::Shape, "contraction requires opposite variance");
  if (s1 > s2) std::swap(s1, s2);

  std::vector<Slot> var;
  for (int i = 0; i < a.rank(); ++i)
    if (i != s1 && i != s2) var.push_back(a.slot(i));

  Jet<S> zero = a.at(0) * S(0);
  Tensor<S> r(a.dim(), var, zero);
  std::vector<int> out(var.size(), 0);
  std::vector<int> in(a.rank(), 0);
  do {
    Jet<S> sum = zero;
    int oi = 0;
    for (int i = 0; i < a.rank(); ++i)
      if (i != s1 && i != s2) in[i] = out[oi++];
    for (int k = 0; k < a.dim(); ++k) {
      in[s1] = k;
      in[s2] = k;
      sum += a(in);
    }
    r(out) = sum;
  } while (next_index(out, a.dim()));
  return r;
}

/// Musical isomorphism on one slot: pass the inverse metric to raise a
/// covariant slot, the metric to lower a contravariant one.
template <class S>
Tensor<S> apply_metric_to_slot(const Tensor<S>& a, int slot, const Tensor<S>& metric2) {
  if (slot < 0 || slot >= a.rank()) throw Error(ErrorKind::Shape, "slot out of range");
  bool raising = (a.slot(slot) == Slot::Cov);
  if (raising && (metric2.slot(0) != Slot::Con || metric2.slot(1) != Slot::Con))
    throw Error(ErrorKind::Shape, "raising a slot needs the inverse metric");
  if (!raising && (metric2.slot(0) != Slot::Cov || metric2.slot(1) != Slot::Cov))
    throw Error(ErrorKind::Shape, "lowering a slot needs the metric");

  std::vector<Slot> var = a.variance();
  var[slot] = raising ? Slot::Con : Slot::Cov;
  Jet<S> zero = a.at(0) * S(0);
  Tensor<S> r(a.dim(), var, zero);
  std::vector<int> out(a.rank(), 0);
  std::vector<int> in(a.rank(), 0);
  std::vector<int> gi(2, 0);
  do {
    Jet<S> sum = zero;
    in = out;
    for (int k = 0; k < a.dim(); ++k) {
      in[slot] = k;
      gi[0] = out[slot];
      gi[1] = k;
      sum += metric2(gi) * a(in);
    }
    r(out) = sum;
  } while (next_index(out, a.dim()));
  return r;
}

template <class S>
Tensor<S> raise_slot(const Tensor<S>& a, int slot, const Tensor<S>& inverse_metric) {
  return apply_metric_to_slot(a, slot, inverse_metric);
}

template <class S>
Tensor<S> lower_slot(const Tensor<S>& a, int slot, const Tensor<S>& metric) {
  return apply_metric_to_slot(a, slot, metric);
}

template <class S>
Tensor<S> lower_all(Tensor<S> a, const Tensor<S>& metric) {
  for (int s = 0; s < a.rank(); ++s)
    if (a.slot(s) == Slot::Con) a = lower_slot(a, s, metric);
  return a;
}

/// Symmetric part of a rank-2 tensor.
template <class S>
Tensor<S> symmetrize2(const Tensor<S>& a) {
  if (a.rank() != 2) throw Error(ErrorKind::Shape, "symmetrize2 needs rank 2");
  Tensor<S> r = a;
  std::vector<int> ij(2), ji(2);
  S half = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(2);
  for (ij[0] = 0; ij[0] < a.dim(); ++ij[0])
    for (ij[1] = 0; ij[1] < a.dim(); ++ij[1]) {
      ji = {ij[1], ij[0]};
      r(ij) = (a(ij) + a(ji)) * half;
    }
  return r;
}

/// Copies a tensor down to a lower jet order so differently truncated
/// tensors can enter one expression.
template <class S>
Tensor<S> truncate_to_order(const Tensor<S>& a, int order) {
  if (a.jet_order() == order) return a;
  Tensor<S> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.at(i) = a.at(i).truncated(order);
  return r;
}

}  // namespace kundt
