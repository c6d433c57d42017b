#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/expr.hpp"
#include "core/tensor.hpp"

namespace kundt {

/// Metric written as g = 2du(dv + H du + W_i dx^i) + gt_ij dx^i dx^j in a
/// chart whose first two coordinates are (u, v). The degenerate parts, when
/// present, declare H = v^2 H2 + v H1 + H0 and W_i = v W1_i + W0_i with all
/// parts independent of v.
struct KundtForm {
  ExprPtr H;
  std::vector<ExprPtr> W;                   // size n-2
  std::vector<std::vector<ExprPtr>> gt;     // (n-2) x (n-2), symmetric

  struct DegenerateParts {
    ExprPtr H2, H1, H0;
    std::vector<ExprPtr> W1, W0;
  };
  std::optional<DegenerateParts> degenerate;
};

struct MetricSpec {
  Chart chart;
  std::vector<std::vector<ExprPtr>> components;  // n x n, symmetric
  std::optional<KundtForm> kundt;

  int dim() const { return chart.dim(); }
};

/// Vector field, either from raw components or from the algebra-preserving
/// normal form X = A(u) d_u + (-v A'(u) + B(u,x)) d_v + C^i(u,x) d_i.
struct VectorFieldSpec {
  std::string name;
  std::vector<ExprPtr> components;  // size n; may be synthesized from nil_form

  struct NilForm {
    ExprPtr A;                 // function of u only
    ExprPtr B;                 // function of (u, x)
    std::vector<ExprPtr> C;    // size n-2, functions of (u, x)
  };
  std::optional<NilForm> nil_form;
};

/// Deformation data: either the v-linear normal form
/// h = 2(v P1 + P0) du du + Q_i (du dx^i + dx^i du), or raw symmetric
/// components for negative controls.
struct DeformationSpec {
  std::string name;

  struct NormalForm {
    ExprPtr P1, P0;
    std::vector<ExprPtr> Q;  // size n-2
  };
  std::optional<NormalForm> normal;
  std::optional<std::vector<std::vector<ExprPtr>>> raw;  // n x n, symmetric
};

/// Builds the n x n component table of a Kundt-form metric.
std::vector<std::vector<ExprPtr>> kundt_components(const KundtForm& form, const Chart& chart);

/// Symmetric component table of the deformation tensor h with dg_t/dt = h.
std::vector<std::vector<ExprPtr>> deformation_components(const DeformationSpec& d,
                                                         const Chart& chart);

/// g + t*h as a new MetricSpec (exprs composed; Kundt parts updated when the
/// deformation is in normal form and the metric is in Kundt form).
MetricSpec deform_metric(const MetricSpec& g, const DeformationSpec& d, const Rational& t);

/// Same family with t left symbolic as an extra chart parameter named
/// "_t"; evaluation points must then append the parameter value.
MetricSpec deform_metric_family(const MetricSpec& g, const DeformationSpec& d);

// ---------------------------------------------------------------- evaluation

template <class S>
Tensor<S> eval_metric(const MetricSpec& g, const typename Jet<S>::Point& base, int order) {
  int n = g.dim();
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  Tensor<S> r(n, {Slot::Cov, Slot::Cov}, Jet<S>::constant(lay, base, S(0)));
  std::vector<int> idx(2);
  for (idx[0] = 0; idx[0] < n; ++idx[0])
    for (idx[1] = 0; idx[1] < n; ++idx[1])
      r(idx) = eval_jet<S>(g.components[idx[0]][idx[1]], base, order);
  return r;
}

template <class S>
Tensor<S> eval_symmetric_table(const std::vector<std::vector<ExprPtr>>& comp, int n,
                               const typename Jet<S>::Point& base, int order) {
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  Tensor<S> r(n, {Slot::Cov, Slot::Cov}, Jet<S>::constant(lay, base, S(0)));
  std::vector<int> idx(2);
  for (idx[0] = 0; idx[0] < n; ++idx[0])
    for (idx[1] = 0; idx[1] < n; ++idx[1])
      r(idx) = eval_jet<S>(comp[idx[0]][idx[1]], base, order);
  return r;
}

/// Contravariant vector of jets. Normal-form fields synthesize the v
/// component from A's u-derivative at one order higher, so no symbolic
/// differentiation is needed.
template <class S>
Tensor<S> eval_vector_field(const VectorFieldSpec& X, int n,
                            const typename Jet<S>::Point& base, int order) {
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  Tensor<S> r(n, {Slot::Con}, Jet<S>::constant(lay, base, S(0)));
  if (!X.components.empty()) {
    for (int a = 0; a < n; ++a)
      r.at(a) = eval_jet<S>(X.components[a], base, order);
    return r;
  }
  if (!X.nil_form) throw Error(ErrorKind::Invalid, "vector field '" + X.name + "' has no data");
  const auto& nf = *X.nil_form;
  r.at(0) = eval_jet<S>(nf.A, base, order);
  Jet<S> Au = eval_jet<S>(nf.A, base, order + 1).derivative(0);
  Jet<S> v = Jet<S>::variable(lay, base, 1);
  r.at(1) = eval_jet<S>(nf.B, base, order) - v * Au;
  for (int i = 0; i + 2 < n; ++i) r.at(i + 2) = eval_jet<S>(nf.C[i], base, order);
  return r;
}

}  // namespace kundt
