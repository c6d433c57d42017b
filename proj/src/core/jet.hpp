#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "core/error.hpp"
#include "core/rational.hpp"

namespace kundt {

/// Enumeration of multi-indices of total degree <= order over a fixed number
/// of variables, in graded lexicographic order, plus the lookup tables the
/// truncated-product needs. Shared immutably between all jets of one shape.
class JetLayout {
 public:
  int vars() const { return vars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(alphas_.size()); }

  const std::vector<std::uint8_t>& alpha(int i) const { return alphas_[i]; }
  int degree(int i) const { return degree_[i]; }

  int index_of(const std::vector<std::uint8_t>& a) const {
    auto it = pos_.find(pack(a));
    if (it == pos_.end())
      throw Error(ErrorKind::JetOrder, "multi-index exceeds truncation order");
    return it->second;
  }

  /// Index of alpha(i) + alpha(j), or -1 if the sum exceeds the order.
  int product_index(int i, int j) const {
    std::call_once(prod_once_, [this] { build_product_table(); });
    return prod_[static_cast<std::size_t>(i) * alphas_.size() + j];
  }

  /// Index of alpha(i) + e_axis, or -1 if out of range.
  int bump_index(int i, int axis) const {
    std::call_once(bump_once_, [this] { build_bump_table(); });
    return bump_[static_cast<std::size_t>(i) * vars_ + axis];
  }

  static std::shared_ptr<const JetLayout> get(int vars, int order) {
    if (vars < 1 || vars > 12 || order < 0 || order > 16)
      throw Error(ErrorKind::Invalid, "unsupported jet shape");
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(vars, order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto lay = std::shared_ptr<const JetLayout>(new JetLayout(vars, order));
    cache.emplace(key, lay);
    return lay;
  }

 private:
  JetLayout(int vars, int order) : vars_(vars), order_(order) {
    std::vector<std::uint8_t> a(vars, 0);
    for (int d = 0; d <= order; ++d) emit(a, 0, d);
    for (std::size_t i = 0; i < alphas_.size(); ++i)
      pos_.emplace(pack(alphas_[i]), static_cast<int>(i));
  }

  void emit(std::vector<std::uint8_t>& a, int from, int remaining) {
    if (from == vars_ - 1) {
      a[from] = static_cast<std::uint8_t>(remaining);
      alphas_.push_back(a);
      degree_.push_back(std::accumulate(a.begin(), a.end(), 0));
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      a[from] = static_cast<std::uint8_t>(v);
      emit(a, from + 1, remaining - v);
    }
    a[from] = 0;
  }

  static std::uint64_t pack(const std::vector<std::uint8_t>& a) {
    std::uint64_t key = 0;
    for (std::uint8_t v : a) key = (key << 5) | v;
    return key;
  }

  void build_product_table() const {
    const std::size_t n = alphas_.size();
    prod_.assign(n * n, -1);
    std::vector<std::uint8_t> sum(vars_);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (degree_[i] + degree_[j] > order_) continue;
        for (int v = 0; v < vars_; ++v) sum[v] = alphas_[i][v] + alphas_[j][v];
        prod_[i * n + j] = pos_.at(pack(sum));
      }
    }
  }

  void build_bump_table() const {
    const std::size_t n = alphas_.size();
    bump_.assign(n * vars_, -1);
    std::vector<std::uint8_t> sum(vars_);
    for (std::size_t i = 0; i < n; ++i) {
      if (degree_[i] + 1 > order_) continue;
      for (int axis = 0; axis < vars_; ++axis) {
        sum = alphas_[i];
        ++sum[axis];
        bump_[i * vars_ + axis] = pos_.at(pack(sum));
      }
    }
  }

  int vars_;
  int order_;
  std::vector<std::vector<std::uint8_t>> alphas_;
  std::vector<int> degree_;
  std::unordered_map<std::uint64_t, int> pos_;

  mutable std::once_flag prod_once_, bump_once_;
  mutable std::vector<int> prod_;
  mutable std::vector<int> bump_;
};

/// Truncated multivariate Taylor expansion at a base point. coefficient(alpha)
/// stores the alpha-th Taylor coefficient, i.e. the partial derivative divided
/// by alpha!. Arithmetic requires identical base point and order; scalar mode
/// is fixed by the template parameter.
template <class S>
class Jet {
 public:
  using Point = std::shared_ptr<const std::vector<S>>;

  Jet() = default;

  static Jet constant(std::shared_ptr<const JetLayout> lay, Point base, S value) {
    Jet j(std::move(lay), std::move(base));
    j.c_[0] = std::move(value);
    return j;
  }

  static Jet variable(std::shared_ptr<const JetLayout> lay, Point base, int axis) {
    if (axis < 0 || axis >= lay->vars())
      throw Error(ErrorKind::Invalid, "jet variable axis out of range");
    Jet j(lay, base);
    j.c_[0] = (*j.base_)[axis];
    if (lay->order() >= 1) {
      std::vector<std::uint8_t> e(lay->vars(), 0);
      e[axis] = 1;
      j.c_[lay->index_of(e)] = ScalarTraits<S>::from_long(1);
    }
    return j;
  }

  static Point make_point(std::vector<S> coords) {
    return std::make_shared<const std::vector<S>>(std::move(coords));
  }

  static Jet from_coefficients(std::shared_ptr<const JetLayout> lay, Point base,
                               std::vector<S> coeffs) {
    Jet j(std::move(lay), std::move(base));
    if (coeffs.size() != j.c_.size())
      throw Error(ErrorKind::Shape, "coefficient count mismatch");
    j.c_ = std::move(coeffs);
    return j;
  }

  /// Copy restricted to a lower truncation order.
  Jet truncated(int order) const {
    if (order == lay_->order()) return *this;
    if (order > lay_->order())
      throw Error(ErrorKind::JetOrder, "cannot extend a jet to higher order");
    auto lower = JetLayout::get(lay_->vars(), order);
    std::vector<S> coeffs(lower->size());
    for (int i = 0; i < lower->size(); ++i)
      coeffs[i] = c_[lay_->index_of(lower->alpha(i))];
    return from_coefficients(lower, base_, std::move(coeffs));
  }

  bool empty() const { return !lay_; }
  int order() const { return lay_->order(); }
  int vars() const { return lay_->vars(); }
  const JetLayout& layout() const { return *lay_; }
  const std::shared_ptr<const JetLayout>& layout_ptr() const { return lay_; }
  const Point& base() const { return base_; }
  const std::vector<S>& coefficients() const { return c_; }

  const S& value() const { return c_[0]; }

  const S& coefficient(const std::vector<std::uint8_t>& alpha) const {
    return c_[lay_->index_of(alpha)];
  }

  /// Raw partial derivative: alpha! times the stored coefficient.
  S partial(const std::vector<std::uint8_t>& alpha) const {
    if (static_cast<int>(alpha.size()) != lay_->vars())
      throw Error(ErrorKind::Shape, "multi-index arity mismatch");
    int total = 0;
    for (auto v : alpha) total += v;
    if (total > lay_->order())
      throw Error(ErrorKind::JetOrder, "partial derivative order exceeds jet order");
    S f = ScalarTraits<S>::from_long(1);
    for (auto v : alpha)
      for (int k = 2; k <= v; ++k) f *= ScalarTraits<S>::from_long(k);
    return c_[lay_->index_of(alpha)] * f;
  }

  bool is_zero() const {
    for (const auto& v : c_)
      if (!ScalarTraits<S>::is_zero(v)) return false;
    return true;
  }

  double max_abs_coefficient() const {
    double m = 0;
    for (const auto& v : c_) m = std::max(m, std::fabs(ScalarTraits<S>::to_double(v)));
    return m;
  }

  Jet operator-() const {
    Jet r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
  }

  Jet& operator+=(const Jet& o) {
    require_compatible(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    require_compatible(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    a.require_compatible(b);
    const JetLayout& L = *a.lay_;
    Jet r(a.lay_, a.base_);
    const int n = L.size();
    for (int i = 0; i < n; ++i) {
      if (ScalarTraits<S>::is_zero(a.c_[i])) continue;
      for (int j = 0; j < n; ++j) {
        int t = L.product_index(i, j);
        if (t < 0) continue;
        if (ScalarTraits<S>::is_zero(b.c_[j])) continue;
        r.c_[t] += a.c_[i] * b.c_[j];
      }
    }
    return r;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }

  Jet& operator*=(const S& s) {
    for (auto& v : c_) v *= s;
    return *this;
  }
  friend Jet operator*(Jet a, const S& s) { return a *= s; }
  friend Jet operator*(const S& s, Jet a) { return a *= s; }

  friend Jet operator/(const Jet& a, const Jet& b) { return a * b.inverse(); }
  Jet& operator/=(const Jet& o) { return *this = *this * o.inverse(); }

  /// Multiplicative inverse via the geometric series in (x - x0)/x0.
  Jet inverse() const {
    if (ScalarTraits<S>::is_zero(c_[0]))
      throw Error(ErrorKind::Domain, "division by zero");
    S inv0 = ScalarTraits<S>::from_long(1) / c_[0];
    Jet e = *this;
    e *= inv0;
    e.c_[0] = S(0);  // e = x/x0 - 1, no constant term
    // 1/x = (1/x0) * sum_k (-e)^k, Horner form
    int D = lay_->order();
    Jet r = constant(lay_, base_, ScalarTraits<S>::from_long((D % 2 == 0) ? 1 : -1));
    for (int k = D - 1; k >= 0; --k) {
      r = r * e;
      r.c_[0] += ScalarTraits<S>::from_long((k % 2 == 0) ? 1 : -1);
    }
    r *= inv0;
    return r;
  }

  Jet pow_int(long p) const {
    if (p == 0) return constant(lay_, base_, ScalarTraits<S>::from_long(1));
    if (p < 0) return inverse().pow_int(-p);
    Jet base = *this;
    Jet r = constant(lay_, base_, ScalarTraits<S>::from_long(1));
    while (p > 0) {
      if (p & 1) r = r * base;
      p >>= 1;
      if (p) base = base * base;
    }
    return r;
  }

  /// Partial derivative as a jet of order one less.
  Jet derivative(int axis) const {
    if (lay_->order() == 0)
      throw Error(ErrorKind::JetOrder, "jet order exhausted by differentiation");
    auto lower = JetLayout::get(lay_->vars(), lay_->order() - 1);
    Jet r(lower, base_);
    for (int i = 0; i < lower->size(); ++i) {
      int src = lay_->bump_index(lay_->index_of(lower->alpha(i)), axis);
      r.c_[i] = c_[src] * ScalarTraits<S>::from_long(lower->alpha(i)[axis] + 1);
    }
    return r;
  }

  /// f(x) computed as the Horner sum of series[k] * (x - x0)^k.
  Jet compose_series(const std::vector<S>& series) const {
    Jet e = *this;
    e.c_[0] = S(0);
    Jet r = constant(lay_, base_, series[lay_->order()]);
    for (int k = lay_->order() - 1; k >= 0; --k) {
      r = r * e;
      r.c_[0] += series[k];
    }
    return r;
  }

  Jet sqrt_jet() const;

  void require_compatible(const Jet& o) const {
    if (lay_ != o.lay_)
      throw Error(ErrorKind::Shape, "jet arithmetic requires equal order and variables");
    if (base_ != o.base_ && *base_ != *o.base_)
      throw Error(ErrorKind::Shape, "jet arithmetic requires equal base point");
  }

 private:
  Jet(std::shared_ptr<const JetLayout> lay, Point base)
      : lay_(std::move(lay)), base_(std::move(base)), c_(lay_->size(), S(0)) {
    if (static_cast<int>(base_->size()) != lay_->vars())
      throw Error(ErrorKind::Shape, "base point dimension mismatch");
  }

  std::shared_ptr<const JetLayout> lay_;
  Point base_;
  std::vector<S> c_;
};

inline Jet<double> exp(const Jet<double>& x) {
  int D = x.order();
  std::vector<double> s(D + 1);
  double e = std::exp(x.value());
  double f = 1;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) f *= k;
    s[k] = e / f;
  }
  return x.compose_series(s);
}

inline Jet<double> log(const Jet<double>& x) {
  if (!(x.value() > 0)) throw Error(ErrorKind::Domain, "ln of non-positive value");
  int D = x.order();
  std::vector<double> s(D + 1);
  s[0] = std::log(x.value());
  double p = 1;
  for (int k = 1; k <= D; ++k) {
    p *= x.value();
    s[k] = ((k % 2) ? 1.0 : -1.0) / (k * p);
  }
  return x.compose_series(s);
}

inline Jet<double> sin(const Jet<double>& x) {
  int D = x.order();
  std::vector<double> s(D + 1);
  double sv = std::sin(x.value()), cv = std::cos(x.value());
  double f = 1;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) f *= k;
    double d = (k % 4 == 0) ? sv : (k % 4 == 1) ? cv : (k % 4 == 2) ? -sv : -cv;
    s[k] = d / f;
  }
  return x.compose_series(s);
}

inline Jet<double> cos(const Jet<double>& x) {
  int D = x.order();
  std::vector<double> s(D + 1);
  double sv = std::sin(x.value()), cv = std::cos(x.value());
  double f = 1;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) f *= k;
    double d = (k % 4 == 0) ? cv : (k % 4 == 1) ? -sv : (k % 4 == 2) ? -cv : sv;
    s[k] = d / f;
  }
  return x.compose_series(s);
}

template <>
inline Jet<double> Jet<double>::sqrt_jet() const {
  if (!(value() > 0)) throw Error(ErrorKind::Domain, "sqrt of non-positive value");
  int D = order();
  std::vector<double> s(D + 1);
  double r0 = std::sqrt(value());
  // binom(1/2, k) * x0^(1/2 - k)
  double coef = 1;
  double p = r0;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) {
      coef *= (0.5 - (k - 1)) / k;
      p /= value();
    }
    s[k] = coef * p;
  }
  return compose_series(s);
}

template <>
inline Jet<Rational> Jet<Rational>::sqrt_jet() const {
  auto r0 = exact_sqrt(value());
  if (!r0 || sgn(value()) <= 0)
    throw Error(ErrorKind::Domain,
                "sqrt in rational mode requires a positive perfect square, got " +
                    value().get_str());
  int D = order();
  std::vector<Rational> s(D + 1);
  Rational coef(1);
  Rational p = *r0;
  for (int k = 0; k <= D; ++k) {
    if (k > 0) {
      coef *= Rational(1, 2) - Rational(k - 1);
      coef /= Rational(k);
      p /= value();
    }
    s[k] = coef * p;
  }
  return compose_series(s);
}

inline Jet<double> sqrt(const Jet<double>& x) { return x.sqrt_jet(); }
inline Jet<Rational> sqrt(const Jet<Rational>& x) { return x.sqrt_jet(); }

}  // namespace kundt
