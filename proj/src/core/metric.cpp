#include "core/metric.hpp"

namespace kundt {

std::vector<std::vector<ExprPtr>> kundt_components(const KundtForm& form, const Chart& chart) {
  int n = chart.dim();
  auto zero = make_const(Rational(0));
  auto one = make_const(Rational(1));
  auto two = make_const(Rational(2));
  std::vector<std::vector<ExprPtr>> g(n, std::vector<ExprPtr>(n, zero));
  // g_uv = g_vu = 1, g_uu = 2H, g_ui = g_iu = W_i, g_ij = gt_ij
  g[0][1] = one;
  g[1][0] = one;
  g[0][0] = make_mul(two, form.H);
  for (int i = 0; i + 2 < n; ++i) {
    g[0][i + 2] = form.W[i];
    g[i + 2][0] = form.W[i];
  }
  for (int i = 0; i + 2 < n; ++i)
    for (int j = 0; j + 2 < n; ++j) g[i + 2][j + 2] = form.gt[i][j];
  return g;
}

std::vector<std::vector<ExprPtr>> deformation_components(const DeformationSpec& d,
                                                         const Chart& chart) {
  int n = chart.dim();
  if (d.raw) return *d.raw;
  if (!d.normal) throw Error(ErrorKind::Invalid, "deformation '" + d.name + "' has no data");
  const auto& nf = *d.normal;
  auto zero = make_const(Rational(0));
  auto v = make_coord(1, chart.coordinates[1]);
  std::vector<std::vector<ExprPtr>> h(n, std::vector<ExprPtr>(n, zero));
  // h_uu = 2(v P1 + P0), h_ui = h_iu = Q_i; matches g_t = g + t h with
  // H -> H + t(v P1 + P0) and W_i -> W_i + t Q_i.
  h[0][0] = make_mul(make_const(Rational(2)), make_add(make_mul(v, nf.P1), nf.P0));
  for (int i = 0; i + 2 < n; ++i) {
    h[0][i + 2] = nf.Q[i];
    h[i + 2][0] = nf.Q[i];
  }
  return h;
}

static MetricSpec deform_with_factor(const MetricSpec& g, const DeformationSpec& d,
                                     const ExprPtr& t) {
  MetricSpec r = g;
  auto h = deformation_components(d, g.chart);
  int n = g.dim();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const ExprPtr& hab = h[a][b];
      bool zero = (hab->kind == ExprKind::Const && sgn(hab->value) == 0);
      if (!zero) r.components[a][b] = make_add(g.components[a][b], make_mul(t, hab));
    }
  if (g.kundt && d.normal) {
    KundtForm kf = *g.kundt;
    const auto& nf = *d.normal;
    auto v = make_coord(1, g.chart.coordinates[1]);
    kf.H = make_add(kf.H, make_mul(t, make_add(make_mul(v, nf.P1), nf.P0)));
    for (std::size_t i = 0; i < kf.W.size(); ++i)
      kf.W[i] = make_add(kf.W[i], make_mul(t, nf.Q[i]));
    if (kf.degenerate) {
      kf.degenerate->H1 = make_add(kf.degenerate->H1, make_mul(t, nf.P1));
      kf.degenerate->H0 = make_add(kf.degenerate->H0, make_mul(t, nf.P0));
      for (std::size_t i = 0; i < kf.degenerate->W0.size(); ++i)
        kf.degenerate->W0[i] = make_add(kf.degenerate->W0[i], make_mul(t, nf.Q[i]));
    }
    r.kundt = kf;
  } else if (g.kundt && d.raw) {
    // raw deformations can leave the Kundt class; re-derive the form only
    // when the touched components allow it
    const auto& h2 = *d.raw;
    bool kundt_shape = true;
    for (int a = 0; a < n && kundt_shape; ++a)
      for (int b = 0; b < n && kundt_shape; ++b) {
        bool zero = (h2[a][b]->kind == ExprKind::Const && sgn(h2[a][b]->value) == 0);
        if (!zero && !(a == 0 || b == 0)) kundt_shape = false;
        if (!zero && ((a == 0 && b == 1) || (a == 1 && b == 0))) kundt_shape = false;
      }
    if (kundt_shape) {
      KundtForm kf = *g.kundt;
      auto half = make_const(Rational(1, 2));
      kf.H = make_add(kf.H, make_mul(t, make_mul(half, h2[0][0])));
      for (std::size_t i = 0; i < kf.W.size(); ++i)
        kf.W[i] = make_add(kf.W[i], make_mul(t, h2[0][i + 2]));
      kf.degenerate.reset();
      r.kundt = kf;
    } else {
      r.kundt.reset();
    }
  }
  return r;
}

MetricSpec deform_metric(const MetricSpec& g, const DeformationSpec& d, const Rational& t) {
  return deform_with_factor(g, d, make_const(t));
}

MetricSpec deform_metric_family(const MetricSpec& g, const DeformationSpec& d) {
  MetricSpec base = g;
  base.chart.parameters.push_back("_t");
  int axis = base.chart.vars() - 1;
  MetricSpec r = deform_with_factor(base, d, make_coord(axis, "_t"));
  return r;
}

}  // namespace kundt
