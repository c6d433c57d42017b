#pragma once

#include <optional>

#include "core/metric.hpp"

namespace kundt {

/// Inverts a rank-2 covariant jet matrix by Gauss-Jordan elimination over the
/// jet ring. Pivots on the entry with the largest constant term; throws on a
/// singular constant part.
template <class S>
Tensor<S> invert_metric(const Tensor<S>& g) {
  int n = g.dim();
  std::vector<std::vector<Jet<S>>> a(n), inv(n);
  Jet<S> zero = g.at(0) * S(0);
  Jet<S> one = zero;
  {
    auto lay = zero.layout_ptr();
    one = Jet<S>::constant(lay, zero.base(), ScalarTraits<S>::from_long(1));
  }
  std::vector<int> idx(2);
  for (int i = 0; i < n; ++i) {
    a[i].assign(n, zero);
    inv[i].assign(n, zero);
    inv[i][i] = one;
    for (int j = 0; j < n; ++j) {
      idx = {i, j};
      a[i][j] = g(idx);
    }
  }
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    double best = 0;
    for (int r = col; r < n; ++r) {
      double m = std::fabs(ScalarTraits<S>::to_double(a[r][col].value()));
      if (pivot < 0 || m > best) {
        pivot = r;
        best = m;
      }
    }
    if (ScalarTraits<S>::is_zero(a[pivot][col].value()))
      throw Error(ErrorKind::Singular, "metric is singular at the evaluation point");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    Jet<S> d = a[col][col].inverse();
    for (int j = 0; j < n; ++j) {
      a[col][j] = a[col][j] * d;
      inv[col][j] = inv[col][j] * d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      Jet<S> f = a[r][col];
      if (f.is_zero()) continue;
      for (int j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  Tensor<S> r(n, {Slot::Con, Slot::Con}, zero);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      idx = {i, j};
      r(idx) = inv[i][j];
    }
  return r;
}

/// Curvature engine at one evaluation point. Construction fixes the metric
/// jet order D; derived objects then carry what that order supports:
/// Christoffel D-1, Riemann D-2, nabla^m Riemann D-2-m. Pure apart from
/// internal lazy caches, so distinct points can run on distinct instances
/// concurrently.
template <class S>
class Geometry {
 public:
  Geometry(const MetricSpec& spec, typename Jet<S>::Point base, int metric_order)
      : spec_(&spec), base_(std::move(base)), order_(metric_order) {
    g_ = eval_metric<S>(spec, base_, order_);
    ginv_ = invert_metric(g_);
  }

  static int metric_order_for_nabla_m_riemann(int m) { return m + 2; }

  int dim() const { return spec_->dim(); }
  int metric_order() const { return order_; }
  const typename Jet<S>::Point& base() const { return base_; }
  const MetricSpec& spec() const { return *spec_; }

  const Tensor<S>& metric() const { return g_; }
  const Tensor<S>& inverse_metric() const { return ginv_; }

  Tensor<S> metric_at_order(int order) const { return truncate_to_order(g_, order); }
  Tensor<S> inverse_metric_at_order(int order) const { return truncate_to_order(ginv_, order); }

  /// Gamma^a_{bc}, symmetric in (b, c), jets of order D-1.
  const Tensor<S>& christoffel() const {
    if (!gamma_) {
      int n = dim();
      Tensor<S> dg = partial_of(g_);  // dg[c][a][b] = d_c g_ab with slot order (c,a,b)
      Jet<S> zero = dg.at(0) * S(0);
      Tensor<S> ginv = truncate_to_order(ginv_, order_ - 1);
      Tensor<S> gam(n, {Slot::Con, Slot::Cov, Slot::Cov}, zero);
      S half = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(2);
      std::vector<int> abc(3), g2(2), d3(3);
      for (abc[0] = 0; abc[0] < n; ++abc[0])
        for (abc[1] = 0; abc[1] < n; ++abc[1])
          for (abc[2] = abc[1]; abc[2] < n; ++abc[2]) {
            Jet<S> sum = zero;
            for (int d = 0; d < n; ++d) {
              g2 = {abc[0], d};
              d3 = {abc[1], d, abc[2]};
              Jet<S> term = dg(d3);
              d3 = {abc[2], d, abc[1]};
              term += dg(d3);
              d3 = {d, abc[1], abc[2]};
              term -= dg(d3);
              sum += ginv(g2) * term;
            }
            sum *= half;
            gam(abc) = sum;
            if (abc[1] != abc[2]) {
              std::vector<int> acb = {abc[0], abc[2], abc[1]};
              gam(acb) = sum;
            }
          }
      gamma_ = std::move(gam);
    }
    return *gamma_;
  }

  /// R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
  ///           + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb}.
  const Tensor<S>& riemann_mixed() const {
    if (!riemann_mixed_) {
      int n = dim();
      const Tensor<S>& gam = christoffel();
      Tensor<S> dgam = partial_of(gam);  // slots (deriv, a, b, c)
      Tensor<S> gam2 = truncate_to_order(gam, gam.jet_order() - 1);
      Jet<S> zero = dgam.at(0) * S(0);
      Tensor<S> r(n, {Slot::Con, Slot::Cov, Slot::Cov, Slot::Cov}, zero);
      std::vector<int> abcd(4), i4(4), i3(3), j3(3);
      for (abcd[0] = 0; abcd[0] < n; ++abcd[0])
        for (abcd[1] = 0; abcd[1] < n; ++abcd[1])
          for (abcd[2] = 0; abcd[2] < n; ++abcd[2])
            for (abcd[3] = 0; abcd[3] < n; ++abcd[3]) {
              int a = abcd[0], b = abcd[1], c = abcd[2], d = abcd[3];
              if (c == d) continue;
              i4 = {c, a, d, b};
              Jet<S> sum = dgam(i4);
              i4 = {d, a, c, b};
              sum -= dgam(i4);
              for (int e = 0; e < n; ++e) {
                i3 = {a, c, e};
                j3 = {e, d, b};
                sum += gam2(i3) * gam2(j3);
                i3 = {a, d, e};
                j3 = {e, c, b};
                sum -= gam2(i3) * gam2(j3);
              }
              r(abcd) = sum;
            }
      riemann_mixed_ = std::move(r);
    }
    return *riemann_mixed_;
  }

  /// Fully covariant Riemann tensor, jets of order D-2.
  const Tensor<S>& riemann() const {
    if (!riemann_) {
      const Tensor<S>& rm = riemann_mixed();
      Tensor<S> g2 = truncate_to_order(g_, rm.jet_order());
      riemann_ = lower_slot(rm, 0, g2);
    }
    return *riemann_;
  }

  /// Ricci_{ab} = R^c_{acb}.
  Tensor<S> ricci() const {
    const Tensor<S>& rm = riemann_mixed();
    return contract(rm, 0, 2);
  }

  Jet<S> ricci_scalar() const {
    Tensor<S> ric = ricci();
    Tensor<S> ginv = truncate_to_order(ginv_, ric.jet_order());
    Tensor<S> mixed = raise_slot(ric, 0, ginv);
    return contract(mixed, 0, 1).at(0);
  }

  /// Covariant derivative with the new index first: (nabla T)_{a b...}.
  /// Consumes one jet order.
  Tensor<S> covariant_derivative(const Tensor<S>& T) const {
    int n = dim();
    int out_order = T.jet_order() - 1;
    if (out_order < 0) throw Error(ErrorKind::JetOrder, "jet order exhausted in nabla");
    const Tensor<S>& gam_full = christoffel();
    if (gam_full.jet_order() < out_order)
      throw Error(ErrorKind::JetOrder, "metric jet order too low for nabla");
    Tensor<S> gam = truncate_to_order(gam_full, out_order);
    Tensor<S> Tl = truncate_to_order(T, out_order);
    Tensor<S> dT = partial_of(T);  // slots (deriv, ...)
    std::vector<Slot> var;
    var.push_back(Slot::Cov);
    for (int i = 0; i < T.rank(); ++i) var.push_back(T.slot(i));
    Jet<S> zero = dT.at(0) * S(0);
    Tensor<S> r(n, var, zero);
    std::vector<int> out(var.size(), 0), tin(T.rank(), 0), g3(3, 0);
    do {
      Jet<S> sum = dT(out);
      int a = out[0];
      for (int s = 0; s < T.rank(); ++s) {
        for (int e = 0; e < n; ++e) {
          for (int i = 0; i < T.rank(); ++i) tin[i] = out[i + 1];
          tin[s] = e;
          if (T.slot(s) == Slot::Cov) {
            g3 = {e, a, out[s + 1]};
            sum -= gam(g3) * Tl(tin);
          } else {
            g3 = {out[s + 1], a, e};
            sum += gam(g3) * Tl(tin);
          }
        }
      }
      r(out) = sum;
    } while (next_index(out, n));
    return r;
  }

  const Tensor<S>& nabla_m_riemann(int m) const {
    if (nabla_rm_.empty()) nabla_rm_.push_back(riemann());
    while (static_cast<int>(nabla_rm_.size()) <= m)
      nabla_rm_.push_back(covariant_derivative(nabla_rm_.back()));
    return nabla_rm_[m];
  }

  /// Lie derivative of a jet tensor field along a jet vector field; consumes
  /// one jet order of each.
  static Tensor<S> lie_derivative(const Tensor<S>& X, const Tensor<S>& T) {
    int n = T.dim();
    int out_order = std::min(X.jet_order(), T.jet_order()) - 1;
    if (out_order < 0) throw Error(ErrorKind::JetOrder, "jet order exhausted in Lie derivative");
    Tensor<S> Xt = truncate_to_order(X, out_order + 1);
    Tensor<S> Tt = truncate_to_order(T, out_order + 1);
    Tensor<S> dT = partial_tensor(Tt, n);
    Tensor<S> dX = partial_tensor(Xt, n);  // dX[b][a] = d_b X^a
    Tensor<S> Xl = truncate_to_order(X, out_order);
    Tensor<S> Tl = truncate_to_order(T, out_order);
    Jet<S> zero = dT.at(0) * S(0);
    Tensor<S> r(n, T.variance(), zero);
    std::vector<int> out(T.rank(), 0), din(T.rank() + 1, 0), tin(T.rank(), 0), x2(2, 0);
    if (T.rank() == 0) {
      // scalar field: X(f)
      Jet<S> sum = zero;
      for (int a = 0; a < n; ++a) {
        din = {a};
        sum += Xl.at(a) * dT(din);
      }
      r.at(0) = sum;
      return r;
    }
    do {
      Jet<S> sum = zero;
      for (int a = 0; a < n; ++a) {
        din[0] = a;
        for (int i = 0; i < T.rank(); ++i) din[i + 1] = out[i];
        sum += Xl.at(a) * dT(din);
      }
      for (int s = 0; s < T.rank(); ++s) {
        for (int e = 0; e < n; ++e) {
          tin = out;
          tin[s] = e;
          if (T.slot(s) == Slot::Cov) {
            x2 = {out[s], e};
            sum += dX(x2) * Tl(tin);
          } else {
            x2 = {e, out[s]};
            sum -= dX(x2) * Tl(tin);
          }
        }
      }
      r(out) = sum;
    } while (next_index(out, n));
    return r;
  }

  /// [X, Y]^a = X^b d_b Y^a - Y^b d_b X^a; consumes one jet order.
  static Tensor<S> lie_bracket(const Tensor<S>& X, const Tensor<S>& Y) {
    return lie_derivative(X, Y);
  }

  /// Component-wise partial derivatives: result slot order (deriv, ...).
  /// Differentiates along the chart coordinates only, never parameters.
  Tensor<S> partial_of(const Tensor<S>& T) const { return partial_tensor(T, dim()); }

  static Tensor<S> partial_tensor(const Tensor<S>& T, int n) {
    std::vector<Slot> var;
    var.push_back(Slot::Cov);
    for (int i = 0; i < T.rank(); ++i) var.push_back(T.slot(i));
    Jet<S> zero = T.at(0).derivative(0) * S(0);
    Tensor<S> r(n, var, zero);
    std::vector<int> out(var.size(), 0), tin(T.rank(), 0);
    do {
      for (int i = 0; i < T.rank(); ++i) tin[i] = out[i + 1];
      r(out) = T(tin).derivative(out[0]);
    } while (next_index(out, n));
    return r;
  }

 private:
  const MetricSpec* spec_;
  typename Jet<S>::Point base_;
  int order_;
  Tensor<S> g_, ginv_;
  mutable std::optional<Tensor<S>> gamma_;
  mutable std::optional<Tensor<S>> riemann_mixed_;
  mutable std::optional<Tensor<S>> riemann_;
  mutable std::vector<Tensor<S>> nabla_rm_;
};

}  // namespace kundt
