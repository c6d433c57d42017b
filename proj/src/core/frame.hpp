#pragma once

#include <map>

#include "core/geometry.hpp"

namespace kundt {

constexpr int kBoostOrderNegInf = std::numeric_limits<int>::min();

/// Null frame (k, l, m_1..m_{n-2}) at a point, with jet-valued vector fields
/// so Lie derivatives of the frame itself are available. Pairings satisfy
/// g(k,l) = 1, g(m_i,m_j) = delta, all other products zero.
///
/// Boost-weight convention: a covariant slot evaluated on k counts +1, on l
/// counts -1, on m_i counts 0; contravariant tensors are lowered first. This
/// makes du(x)du carry weight -2 on Kundt charts.
template <class S>
class NullFrame {
 public:
  NullFrame(std::vector<Tensor<S>> vectors, Tensor<S> metric, Tensor<S> inverse_metric)
      : e_(std::move(vectors)), g_(std::move(metric)), ginv_(std::move(inverse_metric)) {
    n_ = g_.dim();
    if (static_cast<int>(e_.size()) != n_)
      throw Error(ErrorKind::Shape, "frame needs dim vectors");
    build_coframe();
  }

  int dim() const { return n_; }
  const Tensor<S>& vec(int a) const { return e_[a]; }
  const Tensor<S>& k() const { return e_[0]; }
  const Tensor<S>& l() const { return e_[1]; }
  const Tensor<S>& m(int i) const { return e_[2 + i]; }
  const Tensor<S>& metric() const { return g_; }
  const Tensor<S>& inverse_metric() const { return ginv_; }

  /// Coframe 1-form dual to frame vector a (w^a(e_b) = delta^a_b), covariant.
  const Tensor<S>& coframe(int a) const { return w_[a]; }

  static int slot_weight(int frame_index) {
    if (frame_index == 0) return 1;   // k
    if (frame_index == 1) return -1;  // l
    return 0;                         // m_i
  }

  /// Residuals of the defining pairings; all zero for a valid frame.
  std::vector<double> pairing_residuals() const {
    std::vector<double> r;
    for (int a = 0; a < n_; ++a)
      for (int b = a; b < n_; ++b) {
        double expect = 0;
        if ((a == 0 && b == 1)) expect = 1;
        if (a >= 2 && a == b) expect = 1;
        double got = ScalarTraits<S>::to_double(pair(e_[a], e_[b]).value());
        r.push_back(std::fabs(got - expect));
      }
    return r;
  }

  Jet<S> pair(const Tensor<S>& x, const Tensor<S>& y) const {
    Jet<S> sum = g_.at(0) * S(0);
    std::vector<int> ij(2);
    int order = std::min({x.jet_order(), y.jet_order(), g_.jet_order()});
    Tensor<S> gl = truncate_to_order(g_, order);
    Tensor<S> xl = truncate_to_order(x, order);
    Tensor<S> yl = truncate_to_order(y, order);
    sum = gl.at(0) * S(0);
    for (ij[0] = 0; ij[0] < n_; ++ij[0])
      for (ij[1] = 0; ij[1] < n_; ++ij[1]) sum += gl(ij) * xl.at(ij[0]) * yl.at(ij[1]);
    return sum;
  }

  /// Coefficients of a contravariant vector in this frame.
  std::vector<Jet<S>> frame_coefficients(const Tensor<S>& v) const {
    std::vector<Jet<S>> c;
    int order = std::min(v.jet_order(), w_[0].jet_order());
    Tensor<S> vl = truncate_to_order(v, order);
    for (int a = 0; a < n_; ++a) {
      Tensor<S> wl = truncate_to_order(w_[a], order);
      Jet<S> sum = wl.at(0) * S(0);
      for (int i = 0; i < n_; ++i) sum += wl.at(i) * vl.at(i);
      c.push_back(sum);
    }
    return c;
  }

 private:
  void build_coframe() {
    // rows of the inverse of the column matrix [e_0 ... e_{n-1}]
    int order = e_[0].jet_order();
    Jet<S> zero = e_[0].at(0).truncated(order) * S(0);
    Tensor<S> M(n_, {Slot::Cov, Slot::Cov}, zero);  // M[a][col] = e_col^a
    std::vector<int> ij(2);
    for (ij[0] = 0; ij[0] < n_; ++ij[0])
      for (ij[1] = 0; ij[1] < n_; ++ij[1]) M(ij) = e_[ij[1]].at(ij[0]).truncated(order);
    Tensor<S> Minv = invert_metric(M);  // plain matrix inversion over jets
    for (int a = 0; a < n_; ++a) {
      Tensor<S> wa(n_, {Slot::Cov}, zero);
      for (int i = 0; i < n_; ++i) {
        ij = {a, i};
        wa.at(i) = Minv(ij);
      }
      w_.push_back(std::move(wa));
    }
  }

  int n_;
  std::vector<Tensor<S>> e_;
  std::vector<Tensor<S>> w_;
  Tensor<S> g_, ginv_;
};

/// Frame components of a fully covariant tensor: T(e_{a_1},...,e_{a_r}),
/// computed by one slot-wise basis change per slot.
template <class S>
Tensor<S> to_frame_components(const Tensor<S>& T, const NullFrame<S>& F) {
  Tensor<S> cur = truncate_to_order(T, std::min(T.jet_order(), F.vec(0).jet_order()));
  int n = F.dim();
  for (int s = 0; s < cur.rank(); ++s) {
    if (cur.slot(s) != Slot::Cov)
      throw Error(ErrorKind::Shape, "frame components need a fully covariant tensor");
    Jet<S> zero = cur.at(0) * S(0);
    Tensor<S> next(n, cur.variance(), zero);
    std::vector<int> out(cur.rank(), 0), in(cur.rank(), 0);
    do {
      Jet<S> sum = zero;
      in = out;
      for (int a = 0; a < n; ++a) {
        in[s] = a;
        sum += cur(in) * F.vec(out[s]).at(a).truncated(cur.jet_order());
      }
      next(out) = sum;
    } while (next_index(out, n));
    cur = std::move(next);
  }
  return cur;
}

/// Inverse of to_frame_components: rebuild coordinate components from frame
/// components using the coframe.
template <class S>
Tensor<S> from_frame_components(const Tensor<S>& Tf, const NullFrame<S>& F) {
  Tensor<S> cur = Tf;
  int n = F.dim();
  for (int s = 0; s < cur.rank(); ++s) {
    Jet<S> zero = cur.at(0) * S(0);
    Tensor<S> next(n, cur.variance(), zero);
    std::vector<int> out(cur.rank(), 0), in(cur.rank(), 0);
    do {
      Jet<S> sum = zero;
      in = out;
      for (int a = 0; a < n; ++a) {
        in[s] = a;
        sum += cur(in) * F.coframe(a).at(out[s]).truncated(cur.jet_order());
      }
      next(out) = sum;
    } while (next_index(out, n));
    cur = std::move(next);
  }
  return cur;
}

template <class S>
int component_weight(const std::vector<int>& frame_index) {
  int w = 0;
  for (int a : frame_index) w += NullFrame<S>::slot_weight(a);
  return w;
}

/// Boost-weight blocks of a tensor, keyed by weight, in the coordinate basis.
template <class S>
std::map<int, Tensor<S>> boost_decompose(const Tensor<S>& T, const NullFrame<S>& F) {
  Tensor<S> covariant = lower_all(T, F.metric());
  Tensor<S> tf = to_frame_components(covariant, F);
  int n = F.dim();
  std::map<int, Tensor<S>> blocks;
  std::vector<int> idx(tf.rank(), 0);
  Jet<S> zero = tf.at(0) * S(0);
  do {
    int w = component_weight<S>(idx);
    auto it = blocks.find(w);
    if (it == blocks.end()) {
      Tensor<S> empty(n, tf.variance(), zero);
      it = blocks.emplace(w, std::move(empty)).first;
    }
    it->second(idx) = tf(idx);
  } while (next_index(idx, n));
  std::map<int, Tensor<S>> out;
  for (auto& [w, blk] : blocks) {
    if (blk.is_zero()) continue;
    out.emplace(w, from_frame_components(blk, F));
  }
  return out;
}

/// Largest boost weight carried by a numerically nonzero frame block;
/// kBoostOrderNegInf for the zero tensor. Zero detection in float mode is
/// |component| > threshold * max|component| over the whole tensor.
template <class S>
int boost_order(const Tensor<S>& T, const NullFrame<S>& F, double threshold = 1e-10) {
  Tensor<S> covariant = lower_all(T, F.metric());
  Tensor<S> tf = to_frame_components(covariant, F);
  int n = F.dim();
  double scale = tf.max_abs_value();
  double cut = ScalarTraits<S>::exact ? 0.0 : threshold * scale;
  int best = kBoostOrderNegInf;
  std::vector<int> idx(tf.rank(), 0);
  do {
    const S& v = tf(idx).value();
    bool nonzero = ScalarTraits<S>::exact
                       ? !ScalarTraits<S>::is_zero(v)
                       : std::fabs(ScalarTraits<S>::to_double(v)) > cut;
    if (nonzero) best = std::max(best, component_weight<S>(idx));
  } while (next_index(idx, n));
  return best;
}

/// Norm of all frame components at weights >= min_weight; the residual for
/// "boost order <= min_weight - 1" claims.
template <class S>
double off_type_residual(const Tensor<S>& T, const NullFrame<S>& F, int min_weight) {
  Tensor<S> covariant = lower_all(T, F.metric());
  Tensor<S> tf = to_frame_components(covariant, F);
  int n = F.dim();
  double r = 0;
  std::vector<int> idx(tf.rank(), 0);
  do {
    if (component_weight<S>(idx) >= min_weight)
      r = std::max(r, std::fabs(ScalarTraits<S>::to_double(tf(idx).value())));
  } while (next_index(idx, n));
  return r;
}

/// Exactness-aware companion to off_type_residual: true when every component
/// at weight >= min_weight is exactly zero (rational mode only).
template <class S>
bool off_type_exactly_zero(const Tensor<S>& T, const NullFrame<S>& F, int min_weight) {
  Tensor<S> covariant = lower_all(T, F.metric());
  Tensor<S> tf = to_frame_components(covariant, F);
  int n = F.dim();
  std::vector<int> idx(tf.rank(), 0);
  do {
    if (component_weight<S>(idx) >= min_weight &&
        !ScalarTraits<S>::is_zero(tf(idx).value()))
      return false;
  } while (next_index(idx, n));
  return true;
}

/// Kundt frame from the normal form: k = d_v, m_i by Gram-Schmidt of the
/// transverse coordinate directions under gt, l = d_u + a d_v + b^i d_i with
/// b^i = -gt^{ij} W_j and a = -H + (1/2) gt^{ij} W_i W_j.
template <class S>
NullFrame<S> build_kundt_frame(const MetricSpec& g, const typename Jet<S>::Point& base,
                               int order) {
  if (!g.kundt) throw Error(ErrorKind::Invalid, "metric has no Kundt form");
  const KundtForm& kf = *g.kundt;
  int n = g.dim();
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  Jet<S> zero = Jet<S>::constant(lay, base, S(0));
  Jet<S> one = Jet<S>::constant(lay, base, ScalarTraits<S>::from_long(1));

  if (n < 3) throw Error(ErrorKind::Invalid, "Kundt form needs dimension >= 3");
  Tensor<S> gt(n - 2, {Slot::Cov, Slot::Cov}, zero);
  std::vector<int> ij(2);
  for (ij[0] = 0; ij[0] < n - 2; ++ij[0])
    for (ij[1] = 0; ij[1] < n - 2; ++ij[1])
      gt(ij) = eval_jet<S>(kf.gt[ij[0]][ij[1]], base, order);

  // transverse frame by Gram-Schmidt in gt; sign fixed by positive leading
  // component
  std::vector<std::vector<Jet<S>>> m;  // transverse components only
  auto dot = [&](const std::vector<Jet<S>>& x, const std::vector<Jet<S>>& y) {
    Jet<S> s = zero;
    for (int i = 0; i < n - 2; ++i)
      for (int j = 0; j < n - 2; ++j) {
        ij = {i, j};
        s += gt(ij) * x[i] * y[j];
      }
    return s;
  };
  for (int i = 0; i < n - 2; ++i) {
    std::vector<Jet<S>> cand(n - 2, zero);
    cand[i] = one;
    for (const auto& prev : m) {
      Jet<S> c = dot(cand, prev);
      for (int j = 0; j < n - 2; ++j) cand[j] -= c * prev[j];
    }
    Jet<S> norm2 = dot(cand, cand);
    if (ScalarTraits<S>::to_double(norm2.value()) <= 0)
      throw Error(ErrorKind::Singular, "transverse metric is not positive definite");
    Jet<S> inv_norm = sqrt(norm2).inverse();
    for (int j = 0; j < n - 2; ++j) cand[j] = cand[j] * inv_norm;
    for (int j = 0; j < n - 2; ++j) {
      double lead = ScalarTraits<S>::to_double(cand[j].value());
      if (std::fabs(lead) > 1e-14) {
        if (lead < 0)
          for (auto& cj : cand) cj = -cj;
        break;
      }
    }
    m.push_back(std::move(cand));
  }

  Tensor<S> gtinv = invert_metric(gt);
  Jet<S> H = eval_jet<S>(kf.H, base, order);
  std::vector<Jet<S>> W;
  for (int i = 0; i < n - 2; ++i) W.push_back(eval_jet<S>(kf.W[i], base, order));

  std::vector<Jet<S>> b(n - 2, zero);
  Jet<S> wnorm2 = zero;
  for (int i = 0; i < n - 2; ++i)
    for (int j = 0; j < n - 2; ++j) {
      ij = {i, j};
      b[i] -= gtinv(ij) * W[j];
      wnorm2 += gtinv(ij) * W[i] * W[j];
    }
  Jet<S> a = -H + wnorm2 * (ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(2));

  auto vec = [&](std::vector<Jet<S>> comps) {
    Tensor<S> v(n, {Slot::Con}, zero);
    for (int i = 0; i < n; ++i) v.at(i) = comps[i];
    return v;
  };
  std::vector<Tensor<S>> e;
  {
    std::vector<Jet<S>> kc(n, zero);
    kc[1] = one;
    e.push_back(vec(kc));
  }
  {
    std::vector<Jet<S>> lc(n, zero);
    lc[0] = one;
    lc[1] = a;
    for (int i = 0; i < n - 2; ++i) lc[2 + i] = b[i];
    e.push_back(vec(lc));
  }
  for (int i = 0; i < n - 2; ++i) {
    std::vector<Jet<S>> mc(n, zero);
    for (int j = 0; j < n - 2; ++j) mc[2 + j] = m[i][j];
    e.push_back(vec(mc));
  }

  Tensor<S> gfull = eval_metric<S>(g, base, order);
  return NullFrame<S>(std::move(e), gfull, invert_metric(gfull));
}

/// Completes a given null vector to a null frame for an arbitrary metric.
/// Deterministic pivots: l seed is the coordinate direction with the largest
/// pairing against k, transverse directions processed in coordinate order.
template <class S>
NullFrame<S> complete_null_frame(const MetricSpec& g, const Tensor<S>& kvec,
                                 const typename Jet<S>::Point& base, int order,
                                 double tol = 1e-9) {
  int n = g.dim();
  Tensor<S> gm = eval_metric<S>(g, base, order);
  Tensor<S> ginv = invert_metric(gm);
  Tensor<S> k = truncate_to_order(kvec, order);
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  Jet<S> zero = Jet<S>::constant(lay, base, S(0));
  Jet<S> one = Jet<S>::constant(lay, base, ScalarTraits<S>::from_long(1));

  auto pair = [&](const Tensor<S>& x, const Tensor<S>& y) {
    Jet<S> s = zero;
    std::vector<int> ij(2);
    for (ij[0] = 0; ij[0] < n; ++ij[0])
      for (ij[1] = 0; ij[1] < n; ++ij[1]) s += gm(ij) * x.at(ij[0]) * y.at(ij[1]);
    return s;
  };

  if (std::fabs(ScalarTraits<S>::to_double(pair(k, k).value())) > tol)
    throw Error(ErrorKind::Invalid, "frame completion needs a null vector");

  auto basis_vec = [&](int a) {
    Tensor<S> v(n, {Slot::Con}, zero);
    v.at(a) = one;
    return v;
  };

  int seed = -1;
  double best = 0;
  for (int a = 0; a < n; ++a) {
    double p = std::fabs(ScalarTraits<S>::to_double(pair(k, basis_vec(a)).value()));
    if (p > best + 1e-15) {
      best = p;
      seed = a;
    }
  }
  if (seed < 0 || best <= tol)
    throw Error(ErrorKind::Singular, "null vector pairs to zero with every direction");

  Tensor<S> l = basis_vec(seed);
  {
    Jet<S> kl = pair(k, l);
    Jet<S> inv = kl.inverse();
    for (int a = 0; a < n; ++a) l.at(a) = l.at(a) * inv;
    Jet<S> ll = pair(l, l);
    S half = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(2);
    for (int a = 0; a < n; ++a) l.at(a) = l.at(a) - (ll * half) * k.at(a);
  }

  std::vector<Tensor<S>> ms;
  for (int a = 0; a < n && static_cast<int>(ms.size()) < n - 2; ++a) {
    Tensor<S> c = basis_vec(a);
    // project out span(k, l) using the null pairing, then earlier m's
    Jet<S> cl = pair(c, l);
    Jet<S> ck = pair(c, k);
    for (int b = 0; b < n; ++b) c.at(b) = c.at(b) - cl * k.at(b) - ck * l.at(b);
    for (const auto& prev : ms) {
      Jet<S> cm = pair(c, prev);
      for (int b = 0; b < n; ++b) c.at(b) = c.at(b) - cm * prev.at(b);
    }
    Jet<S> norm2 = pair(c, c);
    if (ScalarTraits<S>::to_double(norm2.value()) <= tol) continue;
    Jet<S> inv_norm = sqrt(norm2).inverse();
    for (int b = 0; b < n; ++b) c.at(b) = c.at(b) * inv_norm;
    for (int b = 0; b < n; ++b) {
      double lead = ScalarTraits<S>::to_double(c.at(b).value());
      if (std::fabs(lead) > 1e-14) {
        if (lead < 0)
          for (int bb = 0; bb < n; ++bb) c.at(bb) = -c.at(bb);
        break;
      }
    }
    ms.push_back(std::move(c));
  }
  if (static_cast<int>(ms.size()) != n - 2)
    throw Error(ErrorKind::Singular, "could not complete the null frame");

  std::vector<Tensor<S>> e;
  e.push_back(k);
  e.push_back(l);
  for (auto& mvec : ms) e.push_back(std::move(mvec));
  return NullFrame<S>(std::move(e), gm, ginv);
}

}  // namespace kundt
