#pragma once

#include <random>

#include "core/frame.hpp"
#include "core/report.hpp"

namespace kundt {

struct ClassifyOptions {
  double tolerance = 1e-9;
  double zero_threshold = 1e-10;
};

template <class S>
std::string point_to_string(const std::vector<S>& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ",";
    s += ScalarTraits<S>::to_string(p[i]);
  }
  return s + ")";
}

namespace detail {

template <class S>
void record_jet(Clause& c, const Jet<S>& v) {
  c.add(std::fabs(ScalarTraits<S>::to_double(v.value())), ScalarTraits<S>::is_zero(v.value()));
}

inline void record_value(Clause& c, double r, bool exact) { c.add(r, exact); }

template <class S>
void record_tensor_zero(Clause& c, const Tensor<S>& t) {
  c.add(t.max_abs_value(), t.values_all_zero());
}

template <class S>
void record_off_type(Clause& c, const Tensor<S>& t, const NullFrame<S>& F, int min_weight) {
  c.add(off_type_residual(t, F, min_weight), off_type_exactly_zero(t, F, min_weight));
}

/// Residual of membership in span(k): every frame coefficient except the
/// k-coefficient.
template <class S>
void record_in_span_k(Clause& c, const Tensor<S>& v, const NullFrame<S>& F) {
  auto coef = F.frame_coefficients(v);
  double r = 0;
  bool exact = true;
  for (int a = 1; a < F.dim(); ++a) {
    r = std::max(r, std::fabs(ScalarTraits<S>::to_double(coef[a].value())));
    exact = exact && ScalarTraits<S>::is_zero(coef[a].value());
  }
  c.add(r, exact);
}

/// Residual of membership in k^perp = span(k, m_i): the l-coefficient.
template <class S>
void record_in_k_perp(Clause& c, const Tensor<S>& v, const NullFrame<S>& F) {
  auto coef = F.frame_coefficients(v);
  c.add(std::fabs(ScalarTraits<S>::to_double(coef[1].value())),
        ScalarTraits<S>::is_zero(coef[1].value()));
}

template <class S>
Tensor<S> constant_vector(int n, int axis, const typename Jet<S>::Point& base, int order) {
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  Tensor<S> v(n, {Slot::Con}, Jet<S>::constant(lay, base, S(0)));
  v.at(axis) = Jet<S>::constant(lay, base, ScalarTraits<S>::from_long(1));
  return v;
}

}  // namespace detail

inline VectorFieldSpec default_kundt_field(const Chart& chart) {
  VectorFieldSpec k;
  k.name = "d_" + chart.coordinates[1];
  for (int i = 0; i < chart.dim(); ++i)
    k.components.push_back(make_const(Rational(i == 1 ? 1 : 0)));
  return k;
}

/// Frame adapted to the null line of k at one point: the explicit Kundt frame
/// when the normal form is available, otherwise completion of k.
template <class S>
NullFrame<S> frame_for(const MetricSpec& g, const VectorFieldSpec* k,
                       const typename Jet<S>::Point& base, int order) {
  if (g.kundt) return build_kundt_frame<S>(g, base, order);
  if (!k) throw Error(ErrorKind::Invalid, "no Kundt structure declared");
  Tensor<S> kv = eval_vector_field<S>(*k, g.dim(), base, order);
  return complete_null_frame<S>(g, kv, base, order);
}

// -------------------------------------------------------------- Kundt vector

/// Geodesic/divergence-free/shear-free residuals for a null field, alongside
/// the equivalent statement that L_k g has boost order <= -1; the two
/// criteria must agree.
template <class S>
CheckReport kundt_vector_check(const MetricSpec& g, const VectorFieldSpec& k,
                               const std::vector<typename Jet<S>::Point>& points,
                               const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "kundt_vector_check";
  rep.subject = k.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  Clause& cnull = rep.clause("g(k,k) = 0");
  Clause& cgeo = rep.clause("geodesic: nabla_k k = 0");
  Clause& cdiv = rep.clause("divergence-free: nabla_a k^a = 0");
  Clause& cshear = rep.clause("shear-free: sym(nabla k) squared = 0");
  Clause& cnil = rep.clause("nil-Killing: boost_order(L_k g) <= -1");
  bool direct_all = true, nil_all = true;

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    Geometry<S> geo(g, base, 2);
    int n = g.dim();
    Tensor<S> kv = eval_vector_field<S>(k, n, base, 2);
    NullFrame<S> F = frame_for<S>(g, &k, base, 2);

    Jet<S> kk = F.pair(kv, kv);
    bool null_ok = ScalarTraits<S>::exact
                       ? ScalarTraits<S>::is_zero(kk.value())
                       : std::fabs(ScalarTraits<S>::to_double(kk.value())) <= opt.tolerance;
    if (!null_ok) throw Error(ErrorKind::Invalid, "kundt_vector_check requires a null field");
    detail::record_jet(cnull, kk);

    Tensor<S> klow = lower_all(kv, geo.metric());
    Tensor<S> dk = geo.covariant_derivative(klow);  // (a, b) -> nabla_a k_b
    int ord = dk.jet_order();
    Tensor<S> kl = truncate_to_order(kv, ord);
    Tensor<S> ginv = geo.inverse_metric_at_order(ord);

    // nabla_k k
    Jet<S> zero = dk.at(0) * S(0);
    double geo_res = 0;
    bool geo_exact = true;
    std::vector<int> ab(2);
    for (int b = 0; b < n; ++b) {
      Jet<S> sum = zero;
      for (int a = 0; a < n; ++a) {
        ab = {a, b};
        sum += kl.at(a) * dk(ab);
      }
      geo_res = std::max(geo_res, std::fabs(ScalarTraits<S>::to_double(sum.value())));
      geo_exact = geo_exact && ScalarTraits<S>::is_zero(sum.value());
    }
    cgeo.add(geo_res, geo_exact);

    // nabla_a k^a
    Tensor<S> dk_up = raise_slot(dk, 1, ginv);
    Jet<S> div = contract(dk_up, 0, 1).at(0);
    detail::record_jet(cdiv, div);

    // sym(nabla k)_{ab} sym(nabla k)^{ab}
    Tensor<S> sym = symmetrize2(dk);
    Tensor<S> sym_up = raise_slot(raise_slot(sym, 0, ginv), 1, ginv);
    Jet<S> shear = zero;
    for (std::size_t i = 0; i < sym.size(); ++i) shear += sym.at(i) * sym_up.at(i);
    detail::record_jet(cshear, shear);

    Tensor<S> lkg = Geometry<S>::lie_derivative(kv, geo.metric());
    detail::record_off_type(cnil, lkg, F, 0);

    auto pass_of = [&](Clause& c) {
      return ScalarTraits<S>::exact ? c.exact.back() : c.residuals.back() <= opt.tolerance;
    };
    bool direct = pass_of(cgeo) && pass_of(cdiv) && pass_of(cshear);
    direct_all = direct_all && direct;
    nil_all = nil_all && pass_of(cnil);
  }
  rep.agreement = (direct_all == nil_all);
  rep.finalize();
  return rep;
}

// --------------------------------------------------------------------- twist

template <class S>
CheckReport twist_check(const MetricSpec& g, const VectorFieldSpec& k,
                        const std::vector<typename Jet<S>::Point>& points,
                        const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "twist_check";
  rep.subject = k.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  Clause& ctw = rep.clause("twist: antisym(k wedge nabla k) = 0");
  Clause& cint = rep.clause("nabla over k^perp keeps k in span(k)");
  bool tw_all = true, int_all = true;

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    Geometry<S> geo(g, base, 2);
    int n = g.dim();
    Tensor<S> kv = eval_vector_field<S>(k, n, base, 2);
    NullFrame<S> F = frame_for<S>(g, &k, base, 2);

    Tensor<S> klow = lower_all(kv, geo.metric());
    Tensor<S> dk = geo.covariant_derivative(klow);  // nabla_a k_b
    int ord = dk.jet_order();
    Tensor<S> kl = truncate_to_order(klow, ord);

    // W_{cab} = k_c nabla_a k_b, antisymmetrized over (c,a,b)
    Jet<S> zero = dk.at(0) * S(0);
    double res = 0;
    bool exact = true;
    std::vector<int> cab(3), ab(2);
    S sixth = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(6);
    const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    const int sign[6] = {1, 1, 1, -1, -1, -1};
    do {
      Jet<S> sum = zero;
      for (int pi = 0; pi < 6; ++pi) {
        int c = cab[perms[pi][0]], a = cab[perms[pi][1]], b = cab[perms[pi][2]];
        ab = {a, b};
        Jet<S> term = kl.at(c) * dk(ab);
        if (sign[pi] > 0)
          sum += term;
        else
          sum -= term;
      }
      sum *= sixth;
      res = std::max(res, std::fabs(ScalarTraits<S>::to_double(sum.value())));
      exact = exact && ScalarTraits<S>::is_zero(sum.value());
    } while (next_index(cab, n));
    ctw.add(res, exact);

    // for w in {k, m_i}: nabla_w k in span(k)
    Tensor<S> dk_up = raise_slot(dk, 1, geo.inverse_metric_at_order(ord));
    double res2 = 0;
    bool exact2 = true;
    for (int fi : {0, 2, 3}) {
      if (fi >= n) continue;
      Tensor<S> w = truncate_to_order(F.vec(fi), ord);
      Tensor<S> grad(n, {Slot::Con}, zero);
      std::vector<int> ab2(2);
      for (int b = 0; b < n; ++b) {
        Jet<S> sum = zero;
        for (int a = 0; a < n; ++a) {
          ab2 = {a, b};
          sum += w.at(a) * dk_up(ab2);
        }
        grad.at(b) = sum;
      }
      auto coef = F.frame_coefficients(grad);
      for (int fa = 1; fa < n; ++fa) {
        res2 = std::max(res2, std::fabs(ScalarTraits<S>::to_double(coef[fa].value())));
        exact2 = exact2 && ScalarTraits<S>::is_zero(coef[fa].value());
      }
    }
    cint.add(res2, exact2);

    auto pass_of = [&](Clause& c) {
      return ScalarTraits<S>::exact ? c.exact.back() : c.residuals.back() <= opt.tolerance;
    };
    tw_all = tw_all && pass_of(ctw);
    int_all = int_all && pass_of(cint);
  }
  rep.agreement = (tw_all == int_all);
  rep.finalize();
  return rep;
}

// --------------------------------------------------------------- nil-Killing

template <class S>
CheckReport nil_killing_check(const MetricSpec& g, const VectorFieldSpec& X,
                              const VectorFieldSpec* kfield,
                              const std::vector<typename Jet<S>::Point>& points,
                              bool algebra_preserving, const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "nil_killing_check";
  rep.subject = X.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  Clause& ctype = rep.clause("boost_order(L_X g) <= -1");
  Clause* clk = nullptr;
  Clause* clperp = nullptr;
  if (algebra_preserving) {
    clk = &rep.clause("[X,k] in span(k)");
    clperp = &rep.clause("[X,m_i] in k^perp");
  }
  const bool coord = g.kundt.has_value();
  Clause* cAv = coord ? &rep.clause("A_v = 0") : nullptr;
  Clause* cCv = coord ? &rep.clause("C_v = 0") : nullptr;
  Clause* cBv = coord ? &rep.clause("B_v + A_u = 0") : nullptr;
  Clause* cAx = coord ? &rep.clause("A_x = 0") : nullptr;
  Clause* cCeq = coord ? &rep.clause("Ceq") : nullptr;

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    const int D = 2;
    Geometry<S> geo(g, base, D);
    Tensor<S> Xv = eval_vector_field<S>(X, n, base, D);
    NullFrame<S> F = frame_for<S>(g, kfield, base, D);

    Tensor<S> lxg = Geometry<S>::lie_derivative(Xv, geo.metric());
    detail::record_off_type(ctype, lxg, F, 0);

    if (algebra_preserving) {
      Tensor<S> kv = truncate_to_order(F.k(), D);
      Tensor<S> br = Geometry<S>::lie_bracket(Xv, kv);
      detail::record_in_span_k(*clk, br, F);
      double r = 0;
      bool exact = true;
      for (int i = 0; i + 2 < n; ++i) {
        Tensor<S> mi = truncate_to_order(F.m(i), D);
        Tensor<S> bm = Geometry<S>::lie_bracket(Xv, mi);
        auto coef = F.frame_coefficients(bm);
        r = std::max(r, std::fabs(ScalarTraits<S>::to_double(coef[1].value())));
        exact = exact && ScalarTraits<S>::is_zero(coef[1].value());
      }
      clperp->add(r, exact);
    }

    if (coord) {
      const Jet<S>& A = Xv.at(0);
      const Jet<S>& B = Xv.at(1);
      detail::record_jet(*cAv, A.derivative(1));
      double rc = 0;
      bool ec = true;
      for (int i = 0; i + 2 < n; ++i) {
        Jet<S> d = Xv.at(2 + i).derivative(1);
        rc = std::max(rc, std::fabs(ScalarTraits<S>::to_double(d.value())));
        ec = ec && ScalarTraits<S>::is_zero(d.value());
      }
      cCv->add(rc, ec);
      detail::record_jet(*cBv, B.derivative(1) + A.derivative(0));
      double ra = 0;
      bool ea = true;
      for (int i = 0; i + 2 < n; ++i) {
        Jet<S> d = A.derivative(2 + i);
        ra = std::max(ra, std::fabs(ScalarTraits<S>::to_double(d.value())));
        ea = ea && ScalarTraits<S>::is_zero(d.value());
      }
      cAx->add(ra, ea);

      // C^k d_k gt_ij + gt_jk d_i C^k + gt_ik d_j C^k + A d_u gt_ij + B d_v gt_ij
      const KundtForm& kf2 = *g.kundt;
      double rq = 0;
      bool eq = true;
      std::vector<std::vector<Jet<S>>> gt(n - 2, std::vector<Jet<S>>(n - 2, A * S(0)));
      for (int i = 0; i + 2 < n; ++i)
        for (int j = 0; j + 2 < n; ++j) gt[i][j] = eval_jet<S>(kf2.gt[i][j], base, D);
      for (int i = 0; i + 2 < n; ++i)
        for (int j = i; j + 2 < n; ++j) {
          Jet<S> sum = A.derivative(0).truncated(D - 1) * S(0);
          for (int kx = 0; kx + 2 < n; ++kx) {
            sum += Xv.at(2 + kx).truncated(D - 1) * gt[i][j].derivative(2 + kx);
            sum += gt[j][kx].truncated(D - 1) * Xv.at(2 + kx).derivative(2 + i);
            sum += gt[i][kx].truncated(D - 1) * Xv.at(2 + kx).derivative(2 + j);
          }
          sum += A.truncated(D - 1) * gt[i][j].derivative(0);
          sum += B.truncated(D - 1) * gt[i][j].derivative(1);
          rq = std::max(rq, std::fabs(ScalarTraits<S>::to_double(sum.value())));
          eq = eq && ScalarTraits<S>::is_zero(sum.value());
        }
      cCeq->add(rq, eq);
    }
  }
  rep.finalize();
  return rep;
}

// --------------------------------------------------------- degenerate Kundt

template <class S>
CheckReport degenerate_kundt_check(const MetricSpec& g, const VectorFieldSpec& k,
                                   const std::vector<typename Jet<S>::Point>& points,
                                   const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "degenerate_kundt_check";
  rep.subject = k.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  CheckReport pre = kundt_vector_check<S>(g, k, points, opt);
  if (!pre.verdict) {
    rep.notes.push_back("precondition failed: kundt_vector_check");
    rep.verdict = false;
    return rep;
  }

  Clause& c2 = rep.clause("boost_order((L_k)^2 g) <= -2");
  Clause& c3 = rep.clause("(L_k)^3 g = 0");
  const bool coord = g.kundt.has_value();
  Clause* cH = coord ? &rep.clause("H_vvv = 0") : nullptr;
  Clause* cW = coord ? &rep.clause("W_i_vv = 0") : nullptr;
  bool lie_all = true, coord_all = true;

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    Geometry<S> geo(g, base, 3);
    Tensor<S> kv = eval_vector_field<S>(k, n, base, 3);
    NullFrame<S> F = frame_for<S>(g, &k, base, 3);

    Tensor<S> L1 = Geometry<S>::lie_derivative(kv, geo.metric());
    Tensor<S> L2 = Geometry<S>::lie_derivative(kv, L1);
    Tensor<S> L3 = Geometry<S>::lie_derivative(kv, L2);
    detail::record_off_type(c2, L2, F, -1);
    detail::record_tensor_zero(c3, L3);

    auto pass_of = [&](Clause& c) {
      return ScalarTraits<S>::exact ? c.exact.back() : c.residuals.back() <= opt.tolerance;
    };
    lie_all = lie_all && pass_of(c2) && pass_of(c3);

    if (coord) {
      const KundtForm& kf = *g.kundt;
      Jet<S> H = eval_jet<S>(kf.H, base, 3);
      Jet<S> hv = H.derivative(1).derivative(1).derivative(1);
      detail::record_jet(*cH, hv);
      double rw = 0;
      bool ew = true;
      for (int i = 0; i + 2 < n; ++i) {
        Jet<S> w = eval_jet<S>(kf.W[i], base, 3).derivative(1).derivative(1);
        rw = std::max(rw, std::fabs(ScalarTraits<S>::to_double(w.value())));
        ew = ew && ScalarTraits<S>::is_zero(w.value());
      }
      cW->add(rw, ew);
      coord_all = coord_all && pass_of(*cH) && pass_of(*cW);
    }
  }
  if (coord) rep.agreement = (lie_all == coord_all);
  rep.finalize();
  return rep;
}

// ----------------------------------------------- Lie algebra memberships

/// Conditions for membership in the algebra of fields preserving the null
/// line and its orthogonal complement while moving each listed tensor by
/// boost order <= s. tensor_orders: -1 for the metric, m >= 0 for the m-th
/// covariant derivative of Riemann.
template <class S>
void algebra_membership_clauses(CheckReport& rep, const std::string& prefix,
                                const MetricSpec& g, const VectorFieldSpec& X,
                                const std::vector<int>& tensor_orders, int s,
                                const VectorFieldSpec* kfield,
                                const std::vector<typename Jet<S>::Point>& points,
                                const ClassifyOptions& opt) {
  Clause& ck = rep.clause(prefix + "[X,k] in span(k)");
  Clause& cperp = rep.clause(prefix + "[X,m_i] in k^perp");
  Clause& ct = rep.clause(prefix + "boost_order(L_X T_i) <= s");
  int mmax = -1;
  for (int m : tensor_orders) mmax = std::max(mmax, m);
  const int D = std::max(2, mmax + 3);

  for (const auto& base : points) {
    int n = g.dim();
    Geometry<S> geo(g, base, D);
    Tensor<S> Xv = eval_vector_field<S>(X, n, base, D);
    NullFrame<S> F = frame_for<S>(g, kfield, base, D);

    Tensor<S> kv = truncate_to_order(F.k(), D);
    detail::record_in_span_k(ck, Geometry<S>::lie_bracket(Xv, kv), F);
    double r = 0;
    bool exact = true;
    for (int i = 0; i + 2 < n; ++i) {
      Tensor<S> mi = truncate_to_order(F.m(i), D);
      auto coef = F.frame_coefficients(Geometry<S>::lie_bracket(Xv, mi));
      r = std::max(r, std::fabs(ScalarTraits<S>::to_double(coef[1].value())));
      exact = exact && ScalarTraits<S>::is_zero(coef[1].value());
    }
    cperp.add(r, exact);

    double rt = 0;
    bool et = true;
    for (int m : tensor_orders) {
      Tensor<S> T = (m < 0) ? geo.metric() : geo.nabla_m_riemann(m);
      Tensor<S> lt = Geometry<S>::lie_derivative(Xv, T);
      rt = std::max(rt, off_type_residual(lt, F, s + 1));
      et = et && off_type_exactly_zero(lt, F, s + 1);
    }
    ct.add(rt, et);
  }
  (void)opt;
}

template <class S>
CheckReport lie_algebra_closure_check(const MetricSpec& g, const VectorFieldSpec& X,
                                      const VectorFieldSpec& Y,
                                      const std::vector<int>& tensor_orders, int s,
                                      const VectorFieldSpec* kfield,
                                      const std::vector<typename Jet<S>::Point>& points,
                                      const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "lie_algebra_closure_check";
  rep.subject = "[" + X.name + "," + Y.name + "]";
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;
  for (const auto& base : points) rep.points.push_back(point_to_string(*base));

  CheckReport mx, my;
  mx.tolerance = my.tolerance = opt.tolerance;
  mx.exact_mode = my.exact_mode = ScalarTraits<S>::exact;
  algebra_membership_clauses<S>(mx, "", g, X, tensor_orders, s, kfield, points, opt);
  algebra_membership_clauses<S>(my, "", g, Y, tensor_orders, s, kfield, points, opt);
  mx.finalize();
  my.finalize();
  if (!mx.verdict || !my.verdict) {
    rep.notes.push_back(std::string("precondition failed: ") + (!mx.verdict ? X.name : Y.name) +
                        " is not in the algebra");
    rep.verdict = false;
    return rep;
  }

  int mmax = -1;
  for (int m : tensor_orders) mmax = std::max(mmax, m);
  const int D = std::max(3, mmax + 4);

  Clause& ck = rep.clause("[[X,Y],k] in span(k)");
  Clause& cperp = rep.clause("[[X,Y],m_i] in k^perp");
  Clause& ct = rep.clause("boost_order(L_[X,Y] T_i) <= s");

  for (const auto& base : points) {
    int n = g.dim();
    Geometry<S> geo(g, base, D);
    Tensor<S> Xv = eval_vector_field<S>(X, n, base, D);
    Tensor<S> Yv = eval_vector_field<S>(Y, n, base, D);
    NullFrame<S> F = frame_for<S>(g, kfield, base, D);

    Tensor<S> XY = Geometry<S>::lie_bracket(Xv, Yv);
    Tensor<S> kv = truncate_to_order(F.k(), XY.jet_order());
    detail::record_in_span_k(ck, Geometry<S>::lie_bracket(XY, kv), F);
    double r = 0;
    bool exact = true;
    for (int i = 0; i + 2 < n; ++i) {
      Tensor<S> mi = truncate_to_order(F.m(i), XY.jet_order());
      auto coef = F.frame_coefficients(Geometry<S>::lie_bracket(XY, mi));
      r = std::max(r, std::fabs(ScalarTraits<S>::to_double(coef[1].value())));
      exact = exact && ScalarTraits<S>::is_zero(coef[1].value());
    }
    cperp.add(r, exact);

    // L_[X,Y] T = L_X L_Y T - L_Y L_X T
    double rt = 0;
    bool et = true;
    for (int m : tensor_orders) {
      Tensor<S> T = (m < 0) ? geo.metric() : geo.nabla_m_riemann(m);
      Tensor<S> lt = Geometry<S>::lie_derivative(Xv, Geometry<S>::lie_derivative(Yv, T)) -
                     Geometry<S>::lie_derivative(Yv, Geometry<S>::lie_derivative(Xv, T));
      rt = std::max(rt, off_type_residual(lt, F, s + 1));
      et = et && off_type_exactly_zero(lt, F, s + 1);
    }
    ct.add(rt, et);
  }
  rep.finalize();
  return rep;
}

/// Membership in the spi-preserving subalgebra: algebra-preserving
/// nil-Killing, with L_k L_X g of boost order <= -2 and (L_k)^2 L_X g = 0.
template <class S>
CheckReport spi_preserving_membership_check(const MetricSpec& g, const VectorFieldSpec& X,
                                            const VectorFieldSpec* kfield,
                                            const std::vector<typename Jet<S>::Point>& points,
                                            const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "spi_preserving_membership_check";
  rep.subject = X.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  Clause& ctype = rep.clause("boost_order(L_X g) <= -1");
  Clause& ck = rep.clause("[X,k] in span(k)");
  Clause& c1 = rep.clause("boost_order(L_k L_X g) <= -2");
  Clause& c2 = rep.clause("(L_k)^2 L_X g = 0");

  const int D = 3;
  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    Geometry<S> geo(g, base, D);
    Tensor<S> Xv = eval_vector_field<S>(X, n, base, D);
    NullFrame<S> F = frame_for<S>(g, kfield, base, D);
    Tensor<S> kv = truncate_to_order(F.k(), D);

    Tensor<S> lxg = Geometry<S>::lie_derivative(Xv, geo.metric());
    detail::record_off_type(ctype, lxg, F, 0);
    detail::record_in_span_k(ck, Geometry<S>::lie_bracket(Xv, kv), F);
    Tensor<S> l1 = Geometry<S>::lie_derivative(kv, lxg);
    detail::record_off_type(c1, l1, F, -1);
    Tensor<S> l2 = Geometry<S>::lie_derivative(kv, l1);
    detail::record_tensor_zero(c2, l2);
  }
  rep.finalize();
  return rep;
}

/// Bracket closure of the spi-preserving subalgebra, with the Lie derivative
/// along [X,Y] expanded as a commutator of Lie derivatives.
template <class S>
CheckReport spi_preserving_closure_check(const MetricSpec& g, const VectorFieldSpec& X,
                                         const VectorFieldSpec& Y,
                                         const VectorFieldSpec* kfield,
                                         const std::vector<typename Jet<S>::Point>& points,
                                         const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "spi_preserving_closure_check";
  rep.subject = "[" + X.name + "," + Y.name + "]";
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  CheckReport mx = spi_preserving_membership_check<S>(g, X, kfield, points, opt);
  CheckReport my = spi_preserving_membership_check<S>(g, Y, kfield, points, opt);
  if (!mx.verdict || !my.verdict) {
    rep.notes.push_back(std::string("precondition failed: ") + (!mx.verdict ? X.name : Y.name) +
                        " is not in the subalgebra");
    rep.verdict = false;
    return rep;
  }

  Clause& ctype = rep.clause("boost_order(L_[X,Y] g) <= -1");
  Clause& ck = rep.clause("[[X,Y],k] in span(k)");
  Clause& c1 = rep.clause("boost_order(L_k L_[X,Y] g) <= -2");
  Clause& c2 = rep.clause("(L_k)^2 L_[X,Y] g = 0");

  const int D = 5;
  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    Geometry<S> geo(g, base, D);
    Tensor<S> Xv = eval_vector_field<S>(X, n, base, D);
    Tensor<S> Yv = eval_vector_field<S>(Y, n, base, D);
    NullFrame<S> F = frame_for<S>(g, kfield, base, D);
    Tensor<S> kv = truncate_to_order(F.k(), D);

    Tensor<S> lbg = Geometry<S>::lie_derivative(Xv, Geometry<S>::lie_derivative(Yv, geo.metric())) -
                    Geometry<S>::lie_derivative(Yv, Geometry<S>::lie_derivative(Xv, geo.metric()));
    detail::record_off_type(ctype, lbg, F, 0);
    detail::record_in_span_k(ck, Geometry<S>::lie_bracket(Geometry<S>::lie_bracket(Xv, Yv), kv),
                             F);
    Tensor<S> l1 = Geometry<S>::lie_derivative(kv, lbg);
    detail::record_off_type(c1, l1, F, -1);
    Tensor<S> l2 = Geometry<S>::lie_derivative(kv, l1);
    detail::record_tensor_zero(c2, l2);
  }
  rep.finalize();
  return rep;
}

// ------------------------------------------------------- algebraic stability

enum class StabilityTensor { Metric, DuDu, Riemann };

inline const char* stability_tensor_name(StabilityTensor t) {
  switch (t) {
    case StabilityTensor::Metric: return "g";
    case StabilityTensor::DuDu: return "du.du";
    case StabilityTensor::Riemann: return "Riemann";
  }
  return "?";
}

/// Equivalence test between: (i) (L_k)^j T of boost order <= s-j for
/// j <= m_max+1, and (ii) nabla^m T of boost order <= s for m <= m_max;
/// with the frame-component witness (k)^j A = 0 on weight s+1-j components
/// as a third route.
template <class S>
CheckReport algebraic_stability_check(const MetricSpec& g, StabilityTensor which, int s,
                                      int m_max, const VectorFieldSpec& k,
                                      const std::vector<typename Jet<S>::Point>& points,
                                      const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "algebraic_stability_check";
  rep.subject = stability_tensor_name(which);
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;
  rep.notes.push_back("s = " + std::to_string(s) + ", m_max = " + std::to_string(m_max));

  CheckReport pre = degenerate_kundt_check<S>(g, k, points, opt);
  if (!pre.verdict) {
    rep.notes.push_back("precondition failed: degenerate_kundt_check");
    rep.verdict = false;
    return rep;
  }

  const int D = m_max + 3;
  Clause& cbase = rep.clause("boost_order(T) <= s");
  std::vector<Clause*> side1, side2, side3;
  for (int j = 1; j <= m_max + 1; ++j)
    side1.push_back(&rep.clause("side i: boost_order((L_k)^" + std::to_string(j) +
                                " T) <= s-" + std::to_string(j)));
  for (int m = 1; m <= m_max; ++m)
    side2.push_back(&rep.clause("side ii: boost_order(nabla^" + std::to_string(m) +
                                " T) <= s"));
  for (int j = 1; j <= m_max + 1; ++j)
    side3.push_back(&rep.clause("components: k^" + std::to_string(j) +
                                "(A) = 0 at weight s+1-" + std::to_string(j)));

  bool all1 = true, all2 = true, all3 = true;
  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    Geometry<S> geo(g, base, D);
    Tensor<S> kv = eval_vector_field<S>(k, n, base, D);
    NullFrame<S> F = frame_for<S>(g, &k, base, D);

    Tensor<S> T;
    switch (which) {
      case StabilityTensor::Metric: T = geo.metric(); break;
      case StabilityTensor::DuDu: {
        auto lay = JetLayout::get(static_cast<int>(base->size()), D);
        Jet<S> zero = Jet<S>::constant(lay, base, S(0));
        Tensor<S> t(n, {Slot::Cov, Slot::Cov}, zero);
        std::vector<int> uu = {0, 0};
        t(uu) = Jet<S>::constant(lay, base, ScalarTraits<S>::from_long(1));
        T = t;
        break;
      }
      case StabilityTensor::Riemann: T = geo.riemann(); break;
    }

    detail::record_off_type(cbase, T, F, s + 1);
    auto pass_of = [&](Clause& c) {
      return ScalarTraits<S>::exact ? c.exact.back() : c.residuals.back() <= opt.tolerance;
    };
    all1 = all1 && pass_of(cbase);
    all2 = all2 && pass_of(cbase);
    all3 = all3 && pass_of(cbase);

    // side i
    Tensor<S> cur = T;
    for (int j = 1; j <= m_max + 1; ++j) {
      cur = Geometry<S>::lie_derivative(truncate_to_order(kv, cur.jet_order()), cur);
      detail::record_off_type(*side1[j - 1], cur, F, s - j + 1);
      all1 = all1 && pass_of(*side1[j - 1]);
    }

    // side ii
    Tensor<S> nab = T;
    for (int m = 1; m <= m_max; ++m) {
      nab = geo.covariant_derivative(nab);
      detail::record_off_type(*side2[m - 1], nab, F, s + 1);
      all2 = all2 && pass_of(*side2[m - 1]);
    }

    // component witness: k-directional derivatives of frame components
    Tensor<S> tf = to_frame_components(T, F);
    for (int j = 1; j <= m_max + 1; ++j) {
      int target = s + 1 - j;
      double r = 0;
      bool exact = true;
      std::vector<int> idx(tf.rank(), 0);
      do {
        if (component_weight<S>(idx) != target) continue;
        Jet<S> a = tf(idx);
        for (int it = 0; it < j; ++it) {
          Tensor<S> kl = truncate_to_order(kv, a.order() - 1);
          Jet<S> da = a.derivative(0) * S(0);
          for (int ax = 0; ax < n; ++ax) da += kl.at(ax) * a.derivative(ax);
          a = da;
        }
        r = std::max(r, std::fabs(ScalarTraits<S>::to_double(a.value())));
        exact = exact && ScalarTraits<S>::is_zero(a.value());
      } while (next_index(idx, n));
      side3[j - 1]->add(r, exact);
      all3 = all3 && pass_of(*side3[j - 1]);
    }
  }
  rep.agreement = (all1 == all2) && (all2 == all3);
  rep.finalize();
  return rep;
}

// ------------------------------------------- transverse isometry candidates

/// Residual of C^k d_k gt_ij + gt_jk d_i C^k + gt_ik d_j C^k + A d_u gt_ij,
/// reported per transverse index pair.
template <class S>
CheckReport transverse_killing_residual(const MetricSpec& g,
                                        const std::vector<ExprPtr>& C, const ExprPtr& A,
                                        const std::vector<typename Jet<S>::Point>& points,
                                        const ClassifyOptions& opt = {}) {
  if (!g.kundt) throw Error(ErrorKind::Invalid, "transverse residual needs a Kundt form");
  const KundtForm& kf = *g.kundt;
  int n = g.dim();
  CheckReport rep;
  rep.predicate = "transverse_killing_residual";
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  std::vector<std::vector<Clause*>> cl(n - 2, std::vector<Clause*>(n - 2, nullptr));
  for (int i = 0; i + 2 < n; ++i)
    for (int j = i; j + 2 < n; ++j)
      cl[i][j] = &rep.clause("residual[" + std::to_string(i + 1) + "][" +
                             std::to_string(j + 1) + "]");

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    const int D = 1;
    std::vector<Jet<S>> Cj;
    for (int i = 0; i + 2 < n; ++i) Cj.push_back(eval_jet<S>(C[i], base, D));
    Jet<S> Aj = eval_jet<S>(A, base, D);
    std::vector<std::vector<Jet<S>>> gt(n - 2, std::vector<Jet<S>>(n - 2, Aj * S(0)));
    for (int i = 0; i + 2 < n; ++i)
      for (int j = 0; j + 2 < n; ++j) gt[i][j] = eval_jet<S>(kf.gt[i][j], base, D);
    for (int i = 0; i + 2 < n; ++i)
      for (int j = i; j + 2 < n; ++j) {
        Jet<S> sum = Aj.derivative(0) * S(0);
        for (int kx = 0; kx + 2 < n; ++kx) {
          sum += Cj[kx].truncated(0) * gt[i][j].derivative(2 + kx);
          sum += gt[j][kx].truncated(0) * Cj[kx].derivative(2 + i);
          sum += gt[i][kx].truncated(0) * Cj[kx].derivative(2 + j);
        }
        sum += Aj.truncated(0) * gt[i][j].derivative(0);
        detail::record_jet(*cl[i][j], sum);
      }
  }
  rep.finalize();
  return rep;
}

// --------------------------------------------------- linear map type check

/// Pointwise check that a linear map preserves the null line and its
/// orthogonal complement, plus the three equivalent pullback conditions
/// (isometry on k^perp and along k; pullback difference of type III; trace
/// preservation on even-rank type II tensors).
template <class S>
CheckReport linear_map_type_check(const std::vector<std::vector<S>>& f,
                                  const NullFrame<S>& F1, const NullFrame<S>& F2,
                                  const ClassifyOptions& opt = {}, unsigned seed = 7) {
  int n = F1.dim();
  CheckReport rep;
  rep.predicate = "linear_map_type_check";
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;
  rep.points.push_back("(map)");

  // determinant via double for the invertibility precondition
  {
    std::vector<std::vector<double>> a(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a[i][j] = ScalarTraits<S>::to_double(f[i][j]);
    double det = 1;
    for (int c = 0; c < n; ++c) {
      int p = c;
      for (int r = c + 1; r < n; ++r)
        if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
      if (std::fabs(a[p][c]) < 1e-14) throw Error(ErrorKind::Singular, "map is singular");
      if (p != c) {
        std::swap(a[p], a[c]);
        det = -det;
      }
      det *= a[c][c];
      for (int r = c + 1; r < n; ++r) {
        double m = a[r][c] / a[c][c];
        for (int j = c; j < n; ++j) a[r][j] -= m * a[c][j];
      }
    }
  }

  int order = F1.vec(0).jet_order();
  auto apply = [&](const Tensor<S>& v) {
    Tensor<S> r = v;
    for (int i = 0; i < n; ++i) {
      Jet<S> sum = v.at(0) * S(0);
      for (int j = 0; j < n; ++j) sum += v.at(j) * f[i][j];
      r.at(i) = sum;
    }
    return r;
  };

  Clause& clam = rep.clause("f(span(k)) in span(k)");
  Clause& cperp = rep.clause("f(k^perp) in k^perp");
  detail::record_in_span_k(clam, apply(truncate_to_order(F1.k(), order)), F2);
  {
    double r = 0;
    bool exact = true;
    for (int fi : {0, 2, 3}) {
      if (fi >= n) continue;
      auto coef = F2.frame_coefficients(apply(truncate_to_order(F1.vec(fi), order)));
      r = std::max(r, std::fabs(ScalarTraits<S>::to_double(coef[1].value())));
      exact = exact && ScalarTraits<S>::is_zero(coef[1].value());
    }
    cperp.add(r, exact);
  }
  rep.finalize();
  bool preserves = rep.verdict;
  if (!preserves) {
    rep.notes.push_back("type preservation fails; equivalence conditions skipped");
    return rep;
  }

  // i) isometry on k^perp and pairing preservation along k
  Clause& ci = rep.clause("i: isometry on k^perp and along k");
  {
    double r = 0;
    bool exact = true;
    auto check_pair = [&](int a, int b) {
      Tensor<S> va = truncate_to_order(F1.vec(a), order);
      Tensor<S> vb = truncate_to_order(F1.vec(b), order);
      Jet<S> lhs = F2.pair(apply(va), apply(vb));
      Jet<S> rhs = F1.pair(va, vb);
      Jet<S> d = lhs - rhs;
      r = std::max(r, std::fabs(ScalarTraits<S>::to_double(d.value())));
      exact = exact && ScalarTraits<S>::is_zero(d.value());
    };
    for (int a : {0, 2, 3}) {
      if (a >= n) continue;
      for (int b : {0, 2, 3}) {
        if (b >= n) continue;
        check_pair(a, b);
      }
    }
    for (int b = 0; b < n; ++b) check_pair(0, b);
    ci.add(r, exact);
  }

  // ii) pullback difference of type III
  Clause& cii = rep.clause("ii: boost_order(f*g2 - g1) <= -1");
  {
    Jet<S> zero = F1.metric().at(0).truncated(order) * S(0);
    Tensor<S> pull(n, {Slot::Cov, Slot::Cov}, zero);
    Tensor<S> g2 = truncate_to_order(F2.metric(), order);
    std::vector<int> ab(2), cd(2);
    for (ab[0] = 0; ab[0] < n; ++ab[0])
      for (ab[1] = 0; ab[1] < n; ++ab[1]) {
        Jet<S> sum = zero;
        for (cd[0] = 0; cd[0] < n; ++cd[0])
          for (cd[1] = 0; cd[1] < n; ++cd[1])
            sum += g2(cd) * (f[cd[0]][ab[0]] * f[cd[1]][ab[1]]);
        pull(ab) = sum;
      }
    Tensor<S> diff = pull - truncate_to_order(F1.metric(), order);
    detail::record_off_type(cii, diff, F1, 0);
  }

  // iii) trace preservation on random even-rank type II tensors
  Clause& ciii = rep.clause("iii: Tr(f*T) = Tr(T) for type II T");
  {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> coeff(-3, 3);
    double r = 0;
    bool exact = true;
    for (int rank : {2, 4}) {
      // random type II frame components against F2 (weights <= 0)
      Jet<S> zero = F2.metric().at(0).truncated(0) * S(0);
      Tensor<S> tf(n, std::vector<Slot>(rank, Slot::Cov), zero);
      std::vector<int> idx(rank, 0);
      do {
        if (component_weight<S>(idx) <= 0)
          tf(idx) = Jet<S>::constant(zero.layout_ptr(), zero.base(),
                                     ScalarTraits<S>::from_long(coeff(rng)));
      } while (next_index(idx, n));
      Tensor<S> T = from_frame_components(tf, F2);

      // pullback: (f*T)_{a...} = T_{c...} f^{c_1}_{a_1} ...
      Tensor<S> fT(n, std::vector<Slot>(rank, Slot::Cov), zero);
      std::vector<int> out(rank, 0), in(rank, 0);
      do {
        Jet<S> sum = zero;
        std::fill(in.begin(), in.end(), 0);
        do {
          S w = ScalarTraits<S>::from_long(1);
          for (int sslot = 0; sslot < rank; ++sslot) w = w * f[in[sslot]][out[sslot]];
          if (!ScalarTraits<S>::is_zero(w)) sum += T(in) * w;
        } while (next_index(in, n));
        fT(out) = sum;
      } while (next_index(out, n));

      // all perfect matchings on rank slots
      std::vector<std::vector<std::pair<int, int>>> matchings;
      std::vector<std::pair<int, int>> cur;
      std::vector<bool> used(rank, false);
      std::function<void()> gen = [&]() {
        int first = -1;
        for (int i = 0; i < rank; ++i)
          if (!used[i]) {
            first = i;
            break;
          }
        if (first < 0) {
          matchings.push_back(cur);
          return;
        }
        used[first] = true;
        for (int j = first + 1; j < rank; ++j) {
          if (used[j]) continue;
          used[j] = true;
          cur.emplace_back(first, j);
          gen();
          cur.pop_back();
          used[j] = false;
        }
        used[first] = false;
      };
      gen();

      auto full_trace = [&](const Tensor<S>& t, const NullFrame<S>& Fr,
                            const std::vector<std::pair<int, int>>& match) {
        Tensor<S> cur_t = t;
        // raise the second slot of each pair, tracking slot motion
        std::vector<std::pair<int, int>> pairs = match;
        while (!pairs.empty()) {
          auto [i, j] = pairs.back();
          pairs.pop_back();
          Tensor<S> raised = raise_slot(cur_t, j, truncate_to_order(Fr.inverse_metric(), cur_t.jet_order()));
          cur_t = contract(raised, i, j);
          for (auto& [pi, pj] : pairs) {
            int drop_i = std::min(i, j), drop_j = std::max(i, j);
            auto shift = [&](int s) {
              int d = 0;
              if (s > drop_i) ++d;
              if (s > drop_j) ++d;
              return s - d;
            };
            pi = shift(pi);
            pj = shift(pj);
          }
        }
        return cur_t.at(0);
      };

      for (const auto& match : matchings) {
        Jet<S> lhs = full_trace(T, F2, match);
        Jet<S> rhs = full_trace(fT, F1, match);
        Jet<S> d = lhs - rhs;
        r = std::max(r, std::fabs(ScalarTraits<S>::to_double(d.value())));
        exact = exact && ScalarTraits<S>::is_zero(d.value());
      }
    }
    ciii.add(r, exact);
  }

  rep.finalize();
  bool i_ok = rep.clauses[2].pass, ii_ok = rep.clauses[3].pass, iii_ok = rep.clauses[4].pass;
  rep.agreement = (i_ok == ii_ok) && (ii_ok == iii_ok);
  rep.finalize();
  return rep;
}

// ------------------------------------------------- degenerate frame check

/// Bracket conditions for a degenerate Kundt frame together with the
/// equivalent connection-coefficient conditions; every clause is a residual.
template <class S>
CheckReport degenerate_frame_check(const MetricSpec& g,
                                   const std::vector<typename Jet<S>::Point>& points,
                                   const ClassifyOptions& opt = {}, int order = 5) {
  CheckReport rep;
  rep.predicate = "degenerate_frame_check";
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  Clause& ci = rep.clause("i: [m_i, m_j] in k^perp");
  Clause& cii1 = rep.clause("ii: [k,l] in k^perp");
  Clause& cii2 = rep.clause("ii: [k,[k,l]] in span(k)");
  Clause& cii3 = rep.clause("ii: [k,[k,[k,l]]] = 0");
  Clause& ciii1 = rep.clause("iii: [k,m_i] in span(k)");
  Clause& ciii2 = rep.clause("iii: [k,[k,m_i]] = 0");
  Clause& cg1 = rep.clause("Gamma: positive-weight components vanish");
  Clause& cg2 = rep.clause("Gamma: k^(s+1) Gamma = 0 at weight -s");
  bool bracket_all = true, gamma_all = true;

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    Geometry<S> geo(g, base, order);
    NullFrame<S> F = frame_for<S>(g, nullptr, base, order);

    auto vec = [&](int a) { return truncate_to_order(F.vec(a), order); };
    Tensor<S> kv = vec(0);

    double r_i = 0;
    bool e_i = true;
    for (int i = 0; i + 2 < n; ++i)
      for (int j = i; j + 2 < n; ++j) {
        Tensor<S> br = Geometry<S>::lie_bracket(vec(2 + i), vec(2 + j));
        auto coef = F.frame_coefficients(br);
        r_i = std::max(r_i, std::fabs(ScalarTraits<S>::to_double(coef[1].value())));
        e_i = e_i && ScalarTraits<S>::is_zero(coef[1].value());
      }
    ci.add(r_i, e_i);

    Tensor<S> kl1 = Geometry<S>::lie_bracket(kv, vec(1));
    {
      auto coef = F.frame_coefficients(kl1);
      cii1.add(std::fabs(ScalarTraits<S>::to_double(coef[1].value())),
               ScalarTraits<S>::is_zero(coef[1].value()));
    }
    Tensor<S> kl2 = Geometry<S>::lie_bracket(truncate_to_order(kv, kl1.jet_order()), kl1);
    detail::record_in_span_k(cii2, kl2, F);
    Tensor<S> kl3 = Geometry<S>::lie_bracket(truncate_to_order(kv, kl2.jet_order()), kl2);
    detail::record_tensor_zero(cii3, kl3);

    double r31 = 0, r32 = 0;
    bool e31 = true, e32 = true;
    for (int i = 0; i + 2 < n; ++i) {
      Tensor<S> km1 = Geometry<S>::lie_bracket(kv, vec(2 + i));
      auto coef = F.frame_coefficients(km1);
      for (int a = 1; a < n; ++a) {
        r31 = std::max(r31, std::fabs(ScalarTraits<S>::to_double(coef[a].value())));
        e31 = e31 && ScalarTraits<S>::is_zero(coef[a].value());
      }
      Tensor<S> km2 = Geometry<S>::lie_bracket(truncate_to_order(kv, km1.jet_order()), km1);
      r32 = std::max(r32, km2.max_abs_value());
      e32 = e32 && km2.values_all_zero();
    }
    ciii1.add(r31, e31);
    ciii2.add(r32, e32);

    // connection coefficients Gamma_{abc} = g(e_a, nabla_{e_c} e_b)
    const Tensor<S>& gam = geo.christoffel();
    int gord = gam.jet_order();
    Tensor<S> gm = geo.metric_at_order(gord);
    std::vector<Tensor<S>> ev, ev_hi;
    for (int a = 0; a < n; ++a) {
      ev.push_back(truncate_to_order(F.vec(a), gord));
      ev_hi.push_back(truncate_to_order(F.vec(a), gord + 1));
    }
    std::vector<std::vector<std::vector<Jet<S>>>> G(
        n, std::vector<std::vector<Jet<S>>>(n, std::vector<Jet<S>>(n, gm.at(0) * S(0))));
    {
      std::vector<int> ij(2), g3(3);
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          // nabla_{e_c} e_b = e_c^p (d_p e_b^q + Gamma^q_{pr} e_b^r) d_q
          std::vector<Jet<S>> cov(n, gm.at(0) * S(0));
          for (int q = 0; q < n; ++q) {
            Jet<S> covq = gm.at(0) * S(0);
            for (int p = 0; p < n; ++p) {
              Jet<S> term = ev_hi[b].at(q).derivative(p);
              for (int rr = 0; rr < n; ++rr) {
                g3 = {q, p, rr};
                term += gam(g3) * ev[b].at(rr);
              }
              covq += ev[c].at(p) * term;
            }
            cov[q] = covq;
          }
          for (int a = 0; a < n; ++a) {
            Jet<S> sum = gm.at(0) * S(0);
            for (int aa = 0; aa < n; ++aa)
              for (int q = 0; q < n; ++q) {
                ij = {aa, q};
                sum += gm(ij) * ev[a].at(aa) * cov[q];
              }
            G[a][b][c] = sum;
          }
        }
    }

    double rg1 = 0, rg2 = 0;
    bool eg1 = true, eg2 = true;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          int w = NullFrame<S>::slot_weight(a) + NullFrame<S>::slot_weight(b) +
                  NullFrame<S>::slot_weight(c);
          if (w > 0) {
            rg1 = std::max(rg1, std::fabs(ScalarTraits<S>::to_double(G[a][b][c].value())));
            eg1 = eg1 && ScalarTraits<S>::is_zero(G[a][b][c].value());
          } else {
            int sweight = -w;  // w = -s
            Jet<S> cur = G[a][b][c];
            bool enough = true;
            for (int it = 0; it <= sweight; ++it) {
              if (cur.order() < 1) {
                enough = false;
                break;
              }
              Tensor<S> klow = truncate_to_order(kv, cur.order() - 1);
              Jet<S> d = cur.derivative(0) * S(0);
              for (int ax = 0; ax < n; ++ax) d += klow.at(ax) * cur.derivative(ax);
              cur = d;
            }
            if (!enough)
              throw Error(ErrorKind::JetOrder,
                          "degenerate_frame_check needs higher jet order");
            rg2 = std::max(rg2, std::fabs(ScalarTraits<S>::to_double(cur.value())));
            eg2 = eg2 && ScalarTraits<S>::is_zero(cur.value());
          }
        }
    cg1.add(rg1, eg1);
    cg2.add(rg2, eg2);

    auto pass_of = [&](Clause& c) {
      return ScalarTraits<S>::exact ? c.exact.back() : c.residuals.back() <= opt.tolerance;
    };
    bracket_all = bracket_all && pass_of(ci) && pass_of(cii1) && pass_of(cii2) &&
                  pass_of(cii3) && pass_of(ciii1) && pass_of(ciii2);
    gamma_all = gamma_all && pass_of(cg1) && pass_of(cg2);
  }
  rep.agreement = (bracket_all == gamma_all);
  rep.finalize();
  return rep;
}

}  // namespace kundt
