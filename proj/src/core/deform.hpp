#pragma once

#include "core/invariants.hpp"

namespace kundt {

/// Deformation tensor at a point, jet-valued.
template <class S>
Tensor<S> deformation_tensor(const DeformationSpec& d, const MetricSpec& g,
                             const typename Jet<S>::Point& base, int order) {
  auto comp = deformation_components(d, g.chart);
  return eval_symmetric_table<S>(comp, g.dim(), base, order);
}

/// Verifies the deformation-theorem triangle on a sample:
///   hypothesis: h of type III, L_k h of boost order <= -2;
///   (i)   (L_k)^2 h = 0;
///   (ii)  d/dt nabla^m Riemann of type III for m <= m_max, via an exact
///         derivative in the deformation parameter (t enters the jets as an
///         extra variable);
///   (iii) every invariant in the slice equal across the t grid.
template <class S>
CheckReport def_theorem_check(const MetricSpec& g, const DeformationSpec& d,
                              const std::vector<Rational>& t_values,
                              const std::vector<typename Jet<S>::Point>& points,
                              const std::vector<InvariantSpec>& invariants, int m_max = 2,
                              const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "def_theorem_check";
  rep.subject = d.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = ScalarTraits<S>::exact;

  VectorFieldSpec kf = default_kundt_field(g.chart);
  CheckReport pre = degenerate_kundt_check<S>(g, kf, points, opt);
  if (!pre.verdict) {
    rep.notes.push_back("precondition failed: degenerate_kundt_check on the base metric");
    rep.verdict = false;
    return rep;
  }

  Clause& chyp = rep.clause("hypothesis: boost_order(h) <= -1");
  Clause& chyp2 = rep.clause("hypothesis: boost_order(L_k h) <= -2");
  Clause& c1 = rep.clause("i: (L_k)^2 h = 0");
  std::vector<Clause*> c2;
  for (int m = 0; m <= m_max; ++m)
    c2.push_back(&rep.clause("ii: boost_order(dt nabla^" + std::to_string(m) +
                             " Riemann) <= -1"));
  Clause& c3 = rep.clause("iii: invariants constant across t");

  MetricSpec family = deform_metric_family(g, d);
  int mmax_inv = 0;
  for (const auto& inv : invariants) mmax_inv = std::max(mmax_inv, inv.max_deriv());

  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    int n = g.dim();
    const int D = m_max + 3;
    Geometry<S> geo(g, base, D);
    NullFrame<S> F = frame_for<S>(g, &kf, base, D);
    Tensor<S> kv = detail::constant_vector<S>(n, 1, base, D);

    Tensor<S> h = deformation_tensor<S>(d, g, base, D);
    detail::record_off_type(chyp, h, F, 0);
    Tensor<S> lh = Geometry<S>::lie_derivative(kv, h);
    detail::record_off_type(chyp2, lh, F, -1);
    Tensor<S> llh = Geometry<S>::lie_derivative(truncate_to_order(kv, lh.jet_order()), lh);
    detail::record_tensor_zero(c1, llh);

    // (ii): evaluate the family at each grid value with t as a jet variable
    for (const Rational& t : t_values) {
      std::vector<S> ext = *base;
      ext.push_back(ScalarTraits<S>::from_rational(t));
      auto ext_base = Jet<S>::make_point(ext);
      Geometry<S> geot(family, ext_base, D);
      MetricSpec slice = deform_metric(g, d, t);
      NullFrame<S> Ft = [&]() {
        if (slice.kundt) return build_kundt_frame<S>(slice, ext_base, D);
        Tensor<S> kvt = detail::constant_vector<S>(n, 1, ext_base, D);
        return complete_null_frame<S>(slice, kvt, ext_base, D);
      }();
      for (int m = 0; m <= m_max; ++m) {
        const Tensor<S>& nab = geot.nabla_m_riemann(m);
        // derivative along the parameter axis (last jet variable)
        int axis = static_cast<int>(ext.size()) - 1;
        Tensor<S> dt(nab.dim(), nab.variance(), nab.at(0).derivative(axis) * S(0));
        for (std::size_t i = 0; i < nab.size(); ++i) dt.at(i) = nab.at(i).derivative(axis);
        detail::record_off_type(*c2[m], dt, Ft, 0);
      }
    }
  }

  // (iii): invariants across the t grid
  {
    double r = 0;
    bool exact = true;
    std::vector<std::vector<std::vector<S>>> vals;  // [t][inv][point]
    for (const Rational& t : t_values) {
      MetricSpec gt = deform_metric(g, d, t);
      std::vector<std::vector<S>> per_inv(invariants.size());
      for (const auto& base : points) {
        Geometry<S> geo(gt, base, Geometry<S>::metric_order_for_nabla_m_riemann(mmax_inv));
        for (std::size_t i = 0; i < invariants.size(); ++i)
          per_inv[i].push_back(evaluate_invariant(invariants[i], geo, 0).value());
      }
      vals.push_back(std::move(per_inv));
    }
    for (std::size_t i = 0; i < invariants.size(); ++i)
      for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t t = 1; t < t_values.size(); ++t) {
          S a = vals[0][i][p], b = vals[t][i][p];
          double da = ScalarTraits<S>::to_double(a), db = ScalarTraits<S>::to_double(b);
          double rel = std::fabs(da - db) / std::max({1.0, std::fabs(da), std::fabs(db)});
          r = std::max(r, rel);
          exact = exact && (a == b);
        }
    c3.add(r, exact);
  }

  rep.finalize();
  return rep;
}

/// Linearized scalar-curvature response to dg/dt = h:
/// dR/dt = -h_ab Ric^ab + div div h - box tr h, cross-validated elsewhere
/// against finite differences of R(g + t h).
template <class S>
Jet<S> ricci_scalar_variation(const MetricSpec& g,
                              const std::vector<std::vector<ExprPtr>>& h_exprs,
                              const typename Jet<S>::Point& base) {
  const int D = 3;
  Geometry<S> geo(g, base, D);
  int n = g.dim();
  Tensor<S> h = eval_symmetric_table<S>(h_exprs, n, base, D);

  Tensor<S> ric = geo.ricci();
  int ord = ric.jet_order();
  Tensor<S> ginv = geo.inverse_metric_at_order(ord);
  Tensor<S> ric_up = raise_slot(raise_slot(ric, 0, ginv), 1, ginv);
  Tensor<S> hl = truncate_to_order(h, ord);
  Jet<S> term1 = hl.at(0) * S(0);
  for (std::size_t i = 0; i < hl.size(); ++i) term1 += hl.at(i) * ric_up.at(i);

  Tensor<S> ddh = geo.covariant_derivative(geo.covariant_derivative(h));  // (a,b,c,d)? rank 4
  int ord2 = ddh.jet_order();
  Tensor<S> ginv2 = geo.inverse_metric_at_order(ord2);
  // div div h = g^{ab} g^{cd} nabla_a nabla_c h_{bd}  (slots: a c b d)
  Tensor<S> t = raise_slot(raise_slot(ddh, 0, ginv2), 1, ginv2);
  // slots now (a^, c^, b, d): contract a with b, c with d
  Tensor<S> divdiv = contract(contract(t, 0, 2), 0, 1);
  // box tr h = g^{ab} nabla_a nabla_b (g^{cd} h_{cd})
  Tensor<S> h_up = raise_slot(truncate_to_order(h, geo.metric().jet_order()), 0,
                              geo.inverse_metric());
  Jet<S> trh = contract(h_up, 0, 1).at(0);
  Tensor<S> trh_t = Tensor<S>::scalar(trh);
  Tensor<S> dd_trh = geo.covariant_derivative(geo.covariant_derivative(trh_t));
  Tensor<S> box_trh = contract(raise_slot(dd_trh, 0, ginv2), 0, 1);

  return -term1 + divdiv.at(0) - box_trh.at(0);
}

/// Linearized covariant Riemann response to dg/dt = h:
/// (dR/dt)_{abcd} = (1/2)[R^f_{bcd} h_{fa} - R^f_{acd} h_{fb}]
///   + (1/2)[nabla_c nabla_b h_{ad} - nabla_d nabla_b h_{ac}
///          + nabla_d nabla_a h_{bc} - nabla_c nabla_a h_{bd}].
template <class S>
Tensor<S> riemann_variation(const MetricSpec& g,
                            const std::vector<std::vector<ExprPtr>>& h_exprs,
                            const typename Jet<S>::Point& base) {
  const int D = 3;
  Geometry<S> geo(g, base, D);
  int n = g.dim();
  Tensor<S> h = eval_symmetric_table<S>(h_exprs, n, base, D);
  Tensor<S> ddh = geo.covariant_derivative(geo.covariant_derivative(h));  // (c,b,a,d) order: first deriv outer
  int ord = ddh.jet_order();
  const Tensor<S>& rm_full = geo.riemann_mixed();
  Tensor<S> rm = truncate_to_order(rm_full, ord);
  Tensor<S> hl = truncate_to_order(h, ord);

  Jet<S> zero = ddh.at(0) * S(0);
  Tensor<S> out(n, {Slot::Cov, Slot::Cov, Slot::Cov, Slot::Cov}, zero);
  S half = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(2);
  std::vector<int> abcd(4), i4(4), f2(2);
  for (abcd[0] = 0; abcd[0] < n; ++abcd[0])
    for (abcd[1] = 0; abcd[1] < n; ++abcd[1])
      for (abcd[2] = 0; abcd[2] < n; ++abcd[2])
        for (abcd[3] = 0; abcd[3] < n; ++abcd[3]) {
          int a = abcd[0], b = abcd[1], c = abcd[2], dd = abcd[3];
          Jet<S> sum = zero;
          for (int f = 0; f < n; ++f) {
            i4 = {f, b, c, dd};
            f2 = {f, a};
            sum += rm(i4) * hl(f2);
            i4 = {f, a, c, dd};
            f2 = {f, b};
            sum -= rm(i4) * hl(f2);
          }
          // ddh slot order: (outer deriv, inner deriv, h slots)
          i4 = {c, b, a, dd};
          sum += ddh(i4);
          i4 = {dd, b, a, c};
          sum -= ddh(i4);
          i4 = {dd, a, b, c};
          sum += ddh(i4);
          i4 = {c, a, b, dd};
          sum -= ddh(i4);
          out(abcd) = sum * half;
        }
  return out;
}

// -------------------------------------------------------------- flow checks

/// Pulled-back metric (phi_t^* g)_p via a fixed-step RK4 integration of the
/// flow of X together with its variational equation. 64 steps across [0, t].
template <class S>
Tensor<S> flow_pullback_metric(const MetricSpec& g, const VectorFieldSpec& X, const S& t,
                               const typename Jet<S>::Point& base, int steps = 64) {
  int n = g.dim();
  int vars = static_cast<int>(base->size());
  std::vector<S> y = *base;
  std::vector<std::vector<S>> J(n, std::vector<S>(n, S(0)));
  for (int i = 0; i < n; ++i) J[i][i] = ScalarTraits<S>::from_long(1);

  // state derivative: ydot = X(y), Jdot = DX(y) J
  auto deriv = [&](const std::vector<S>& yy, const std::vector<std::vector<S>>& JJ,
                   std::vector<S>& dy, std::vector<std::vector<S>>& dJ) {
    auto pt = Jet<S>::make_point(yy);
    Tensor<S> Xv = eval_vector_field<S>(X, n, pt, 1);
    for (int i = 0; i < n; ++i) dy[i] = Xv.at(i).value();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        S acc = S(0);
        for (int kx = 0; kx < n; ++kx) {
          std::vector<std::uint8_t> e(vars, 0);
          e[kx] = 1;
          acc += Xv.at(i).coefficient(e) * JJ[kx][j];
        }
        dJ[i][j] = acc;
      }
  };

  S hstep = t / ScalarTraits<S>::from_long(steps);
  S half = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(2);
  S sixth = ScalarTraits<S>::from_long(1) / ScalarTraits<S>::from_long(6);
  std::vector<S> k1(n), k2(n), k3(n), k4(n), ytmp(y);
  std::vector<std::vector<S>> K1(n, std::vector<S>(n)), K2 = K1, K3 = K1, K4 = K1, Jtmp = J;

  for (int s = 0; s < steps; ++s) {
    deriv(y, J, k1, K1);
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + hstep * half * k1[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Jtmp[i][j] = J[i][j] + hstep * half * K1[i][j];
    deriv(ytmp, Jtmp, k2, K2);
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + hstep * half * k2[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Jtmp[i][j] = J[i][j] + hstep * half * K2[i][j];
    deriv(ytmp, Jtmp, k3, K3);
    for (int i = 0; i < n; ++i) ytmp[i] = y[i] + hstep * k3[i];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Jtmp[i][j] = J[i][j] + hstep * K3[i][j];
    deriv(ytmp, Jtmp, k4, K4);
    for (int i = 0; i < n; ++i)
      y[i] = y[i] + hstep * sixth * (k1[i] + k2[i] * ScalarTraits<S>::from_long(2) +
                                     k3[i] * ScalarTraits<S>::from_long(2) + k4[i]);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        J[i][j] = J[i][j] + hstep * sixth *
                                (K1[i][j] + K2[i][j] * ScalarTraits<S>::from_long(2) +
                                 K3[i][j] * ScalarTraits<S>::from_long(2) + K4[i][j]);
  }

  // (phi^* g)_{ab}(p) = g_{cd}(phi(p)) J^c_a J^d_b
  auto endpt = Jet<S>::make_point(y);
  Tensor<S> gend = eval_metric<S>(g, endpt, 0);
  auto lay0 = JetLayout::get(vars, 0);
  Jet<S> zero = Jet<S>::constant(lay0, base, S(0));
  Tensor<S> out(n, {Slot::Cov, Slot::Cov}, zero);
  std::vector<int> ab(2), cd(2);
  for (ab[0] = 0; ab[0] < n; ++ab[0])
    for (ab[1] = 0; ab[1] < n; ++ab[1]) {
      S acc = S(0);
      for (cd[0] = 0; cd[0] < n; ++cd[0])
        for (cd[1] = 0; cd[1] < n; ++cd[1])
          acc += gend(cd).value() * J[cd[0]][ab[0]] * J[cd[1]][ab[1]];
      out(ab) = Jet<S>::constant(lay0, base, acc);
    }
  return out;
}

/// Flow pull-back check: for an algebra-preserving nil-Killing field the
/// difference phi_t^* g - g stays of type III, and (phi_t^* g - g)/t
/// converges to L_X g (verified by Richardson extrapolation at t, t/10).
template <class S>
CheckReport flow_pullback_check(const MetricSpec& g, const VectorFieldSpec& X, const S& t,
                                const typename Jet<S>::Point& base,
                                const ClassifyOptions& opt = {}) {
  CheckReport rep;
  rep.predicate = "flow_pullback_check";
  rep.subject = X.name;
  rep.tolerance = opt.tolerance;
  rep.exact_mode = false;  // integrator error dominates even in rational mode
  rep.points.push_back(point_to_string(*base));

  VectorFieldSpec kf = default_kundt_field(g.chart);
  CheckReport pre = nil_killing_check<S>(g, X, &kf, {base}, true, opt);
  if (!pre.verdict) {
    rep.notes.push_back("precondition failed: nil_killing_check");
    rep.verdict = false;
    return rep;
  }

  const int D = 1;
  NullFrame<S> F = frame_for<S>(g, &kf, base, D);
  Tensor<S> g0 = eval_metric<S>(g, base, 0);

  Clause& ctype = rep.clause("boost_order(phi_t^* g - g) <= -1");
  Tensor<S> pulled = flow_pullback_metric<S>(g, X, t, base);
  Tensor<S> diff = pulled - g0;
  ctype.add(off_type_residual(diff, F, 0), false);

  Clause& clim = rep.clause("Richardson limit of (phi_t^* g - g)/t equals L_X g");
  {
    S t2 = t / ScalarTraits<S>::from_long(10);
    Tensor<S> d1 = flow_pullback_metric<S>(g, X, t, base) - g0;
    Tensor<S> d2 = flow_pullback_metric<S>(g, X, t2, base) - g0;
    Geometry<S> geo(g, base, 1);
    Tensor<S> Xv = eval_vector_field<S>(X, g.dim(), base, 1);
    Tensor<S> lxg = Geometry<S>::lie_derivative(Xv, geo.metric());
    double r = 0;
    S inv_t = ScalarTraits<S>::from_long(1) / t;
    S inv_t2 = ScalarTraits<S>::from_long(1) / t2;
    S w = t / (t - t2);  // Richardson weights for a leading O(t) error term
    std::vector<int> ab(2);
    for (ab[0] = 0; ab[0] < g.dim(); ++ab[0])
      for (ab[1] = 0; ab[1] < g.dim(); ++ab[1]) {
        S q1 = d1(ab).value() * inv_t;
        S q2 = d2(ab).value() * inv_t2;
        S extrap = q2 + (q2 - q1) * (t2 / (t - t2));
        double err = std::fabs(ScalarTraits<S>::to_double(extrap - lxg(ab).value()));
        r = std::max(r, err);
      }
    (void)w;
    clim.add(r, false);
  }

  rep.finalize();
  return rep;
}

}  // namespace kundt
