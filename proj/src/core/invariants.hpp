#pragma once

#include <functional>
#include <set>
#include <sstream>

#include "core/classify.hpp"

namespace kundt {

/// One scalar polynomial curvature invariant: a full contraction of a tensor
/// product of covariant-derivative powers of the Riemann tensor. Slots are
/// numbered globally across factors; the pairing is a perfect matching and
/// every contraction goes through the inverse metric.
struct InvariantSpec {
  std::string name;
  std::vector<int> factors;  // derivative order m per factor; rank is 4+m
  std::vector<std::pair<int, int>> pairing;  // global slot index pairs

  int total_rank() const {
    int r = 0;
    for (int m : factors) r += 4 + m;
    return r;
  }
  int max_deriv() const {
    int m = 0;
    for (int f : factors) m = std::max(m, f);
    return m;
  }
};

namespace detail {

inline std::vector<std::vector<std::pair<int, int>>> all_perfect_matchings(int rank) {
  std::vector<std::vector<std::pair<int, int>>> out;
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
      out.push_back(cur);
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
  return out;
}

inline std::vector<std::pair<int, int>> apply_slot_permutation(
    const std::vector<std::pair<int, int>>& match, const std::vector<int>& perm) {
  std::vector<std::pair<int, int>> r;
  for (auto [a, b] : match) {
    int pa = perm[a], pb = perm[b];
    r.emplace_back(std::min(pa, pb), std::max(pa, pb));
  }
  std::sort(r.begin(), r.end());
  return r;
}

/// Slot permutations generated by the pair-interchange symmetry of each
/// Riemann block and by swapping identical factors.
inline std::vector<std::vector<int>> matching_symmetries(const std::vector<int>& factors) {
  int total = 0;
  std::vector<int> offset;
  for (int m : factors) {
    offset.push_back(total);
    total += 4 + m;
  }
  std::vector<std::vector<int>> perms;
  int nf = static_cast<int>(factors.size());

  // factor permutations among equal derivative orders
  std::vector<int> order(nf);
  for (int i = 0; i < nf; ++i) order[i] = i;
  std::vector<std::vector<int>> factor_perms;
  std::sort(order.begin(), order.end());
  do {
    bool ok = true;
    for (int i = 0; i < nf; ++i)
      if (factors[order[i]] != factors[i]) ok = false;
    if (ok) factor_perms.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));

  for (unsigned swaps = 0; swaps < (1u << nf); ++swaps) {
    for (const auto& fp : factor_perms) {
      std::vector<int> perm(total);
      for (int f = 0; f < nf; ++f) {
        int rank = 4 + factors[f];
        int src = offset[f];
        int dst = offset[fp[f]];
        for (int s = 0; s < rank; ++s) {
          int target = s;
          // pair interchange acts on the last four slots of the factor
          int m = factors[f];
          if (swaps & (1u << f)) {
            if (s == m + 0) target = m + 2;
            else if (s == m + 1) target = m + 3;
            else if (s == m + 2) target = m + 0;
            else if (s == m + 3) target = m + 1;
          }
          perm[src + s] = dst + target;
        }
      }
      perms.push_back(perm);
    }
  }
  return perms;
}

}  // namespace detail

/// The fixed curated invariant list, restricted to the requested slice.
/// Factors: 0 = Riemann, 1 = nabla Riemann, 2 = nabla^2 Riemann.
inline std::vector<InvariantSpec> standard_invariants(int max_deriv, int max_degree) {
  std::vector<InvariantSpec> all;
  auto add = [&](const std::string& name, std::vector<int> f,
                 std::vector<std::pair<int, int>> p) {
    all.push_back(InvariantSpec{name, std::move(f), std::move(p)});
  };
  // Ricci scalar: R = g^{ac} g^{bd} R_{abcd} with Ricci_{bd} = R^a_{bad}
  add("R", {0}, {{0, 2}, {1, 3}});
  add("Ric.Ric", {0, 0}, {{0, 2}, {4, 6}, {1, 5}, {3, 7}});
  add("Riem.Riem", {0, 0}, {{0, 4}, {1, 5}, {2, 6}, {3, 7}});
  add("Ric.Ric.Ric", {0, 0, 0},
      {{0, 2}, {4, 6}, {8, 10}, {3, 5}, {7, 9}, {11, 1}});
  add("dR.dR", {1, 1}, {{1, 3}, {2, 4}, {6, 8}, {7, 9}, {0, 5}});
  add("dRic.dRic", {1, 1}, {{1, 3}, {6, 8}, {0, 5}, {2, 7}, {4, 9}});
  add("dRiem.dRiem", {1, 1}, {{0, 5}, {1, 6}, {2, 7}, {3, 8}, {4, 9}});
  add("boxR", {2}, {{0, 1}, {2, 4}, {3, 5}});
  add("Riem.boxRiem", {2, 0}, {{0, 1}, {2, 6}, {3, 7}, {4, 8}, {5, 9}});

  std::vector<InvariantSpec> out;
  for (auto& inv : all)
    if (inv.max_deriv() <= max_deriv && static_cast<int>(inv.factors.size()) <= max_degree)
      out.push_back(inv);
  return out;
}

/// Every full contraction with total rank <= 8, deduplicated under the
/// pair-interchange symmetry of each factor and permutations of identical
/// factors.
inline std::vector<InvariantSpec> exhaustive_invariants(int max_deriv, int max_degree) {
  constexpr int kRankBound = 8;
  if (4 + max_deriv > kRankBound)
    throw Error(ErrorKind::Invalid, "exhaustive enumeration is limited to total rank 8");
  std::vector<InvariantSpec> out;

  std::vector<std::vector<int>> multisets;
  std::function<void(std::vector<int>&, int, int)> gen = [&](std::vector<int>& cur, int from,
                                                             int rank) {
    if (!cur.empty() && rank % 2 == 0) multisets.push_back(cur);
    if (static_cast<int>(cur.size()) >= max_degree) return;
    for (int m = from; m <= max_deriv; ++m) {
      if (rank + 4 + m > kRankBound) continue;
      cur.push_back(m);
      gen(cur, m, rank + 4 + m);
      cur.pop_back();
    }
  };
  std::vector<int> cur;
  gen(cur, 0, 0);

  for (const auto& factors : multisets) {
    int rank = 0;
    for (int m : factors) rank += 4 + m;
    auto perms = detail::matching_symmetries(factors);
    std::set<std::vector<std::pair<int, int>>> seen;
    for (const auto& match : detail::all_perfect_matchings(rank)) {
      std::vector<std::pair<int, int>> canon = detail::apply_slot_permutation(match, perms[0]);
      for (const auto& p : perms) {
        auto v = detail::apply_slot_permutation(match, p);
        if (v < canon) canon = v;
      }
      if (!seen.insert(canon).second) continue;
      std::ostringstream name;
      name << "ex[";
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) name << ",";
        name << "d" << factors[i];
      }
      name << "|";
      for (auto [a, b] : canon) name << "(" << a << "-" << b << ")";
      name << "]";
      out.push_back(InvariantSpec{name.str(), factors, canon});
    }
  }
  return out;
}

inline std::vector<InvariantSpec> generate_invariants(int max_deriv, int max_degree,
                                                      bool exhaustive) {
  return exhaustive ? exhaustive_invariants(max_deriv, max_degree)
                    : standard_invariants(max_deriv, max_degree);
}

// ------------------------------------------------------- network contraction

/// Contracts a product of fully covariant tensors along a perfect matching
/// without materializing the full outer product: internal traces first, then
/// factor pairs merged with all shared bonds summed at once.
template <class S>
Jet<S> contract_network(std::vector<Tensor<S>> factors,
                        std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> bonds,
                        const Tensor<S>& ginv_full) {
  if (factors.empty()) throw Error(ErrorKind::Invalid, "empty contraction");
  int order = factors[0].jet_order();
  for (const auto& f : factors) order = std::min(order, f.jet_order());
  Tensor<S> ginv = truncate_to_order(ginv_full, order);
  for (auto& f : factors) f = truncate_to_order(f, order);

  // port bookkeeping: ports[f][i] = unique id of slot i of factor f
  long next_id = 0;
  std::vector<std::vector<long>> ports(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f)
    for (int s = 0; s < factors[f].rank(); ++s) ports[f].push_back(next_id++);
  std::vector<std::pair<long, long>> pbonds;
  for (auto& [a, b] : bonds)
    pbonds.emplace_back(ports[a.first][a.second], ports[b.first][b.second]);

  auto find_port = [&](long id) -> std::pair<int, int> {
    for (std::size_t f = 0; f < factors.size(); ++f)
      for (std::size_t s = 0; s < ports[f].size(); ++s)
        if (ports[f][s] == id) return {static_cast<int>(f), static_cast<int>(s)};
    throw Error(ErrorKind::Invalid, "bad port in contraction network");
  };

  while (!pbonds.empty()) {
    // internal trace?
    bool did_internal = false;
    for (std::size_t b = 0; b < pbonds.size(); ++b) {
      auto [pf, ps] = find_port(pbonds[b].first);
      auto [qf, qs] = find_port(pbonds[b].second);
      if (pf != qf) continue;
      Tensor<S> raised = raise_slot(factors[pf], qs, ginv);
      factors[pf] = contract(raised, ps, qs);
      auto& pp = ports[pf];
      pp.erase(pp.begin() + std::max(ps, qs));
      pp.erase(pp.begin() + std::min(ps, qs));
      pbonds.erase(pbonds.begin() + b);
      did_internal = true;
      break;
    }
    if (did_internal) continue;

    // merge the two factors of the first bond, consuming all their bonds
    auto [f1, s1] = find_port(pbonds[0].first);
    auto [f2, s2] = find_port(pbonds[0].second);
    std::vector<std::pair<int, int>> shared;  // (slot in f1, slot in f2)
    std::vector<std::size_t> used_bonds;
    for (std::size_t b = 0; b < pbonds.size(); ++b) {
      auto [af, as] = find_port(pbonds[b].first);
      auto [bf, bs] = find_port(pbonds[b].second);
      if (af == f1 && bf == f2) {
        shared.emplace_back(as, bs);
        used_bonds.push_back(b);
      } else if (af == f2 && bf == f1) {
        shared.emplace_back(bs, as);
        used_bonds.push_back(b);
      }
    }

    Tensor<S> A = factors[f1];
    Tensor<S> B = factors[f2];
    for (auto& [sa, sb] : shared) B = raise_slot(B, sb, ginv);

    int n = A.dim();
    std::vector<bool> a_bound(A.rank(), false), b_bound(B.rank(), false);
    for (auto& [sa, sb] : shared) {
      a_bound[sa] = true;
      b_bound[sb] = true;
    }
    std::vector<int> a_free, b_free;
    for (int s = 0; s < A.rank(); ++s)
      if (!a_bound[s]) a_free.push_back(s);
    for (int s = 0; s < B.rank(); ++s)
      if (!b_bound[s]) b_free.push_back(s);

    std::vector<Slot> var;
    for (int s : a_free) var.push_back(A.slot(s));
    for (int s : b_free) var.push_back(B.slot(s));
    Jet<S> zero = A.at(0) * S(0);
    Tensor<S> R(n, var, zero);

    std::vector<int> out(var.size(), 0), ai(A.rank(), 0), bi(B.rank(), 0);
    std::vector<int> bond_vals(shared.size(), 0);
    do {
      Jet<S> sum = zero;
      std::fill(bond_vals.begin(), bond_vals.end(), 0);
      bool more = true;
      while (more) {
        for (std::size_t i = 0; i < a_free.size(); ++i) ai[a_free[i]] = out[i];
        for (std::size_t i = 0; i < b_free.size(); ++i) bi[b_free[i]] = out[a_free.size() + i];
        for (std::size_t i = 0; i < shared.size(); ++i) {
          ai[shared[i].first] = bond_vals[i];
          bi[shared[i].second] = bond_vals[i];
        }
        sum += A(ai) * B(bi);
        more = next_index(bond_vals, n);
        if (bond_vals.empty()) break;
      }
      R(out) = sum;
    } while (next_index(out, n));

    // rebuild factor/port lists
    std::vector<long> new_ports;
    for (int s : a_free) new_ports.push_back(ports[f1][s]);
    for (int s : b_free) new_ports.push_back(ports[f2][s]);
    factors[f1] = std::move(R);
    ports[f1] = std::move(new_ports);
    factors.erase(factors.begin() + f2);
    ports.erase(ports.begin() + f2);
    std::sort(used_bonds.rbegin(), used_bonds.rend());
    for (std::size_t b : used_bonds) pbonds.erase(pbonds.begin() + b);
  }

  // all factors are scalars now; multiply
  Jet<S> result = factors[0].at(0);
  for (std::size_t f = 1; f < factors.size(); ++f) result = result * factors[f].at(0);
  return result;
}

/// Value of one invariant at the geometry's base point, carried to the
/// requested jet order (0 for plain values, >= 1 for directional
/// derivatives).
template <class S>
Jet<S> evaluate_invariant(const InvariantSpec& inv, const Geometry<S>& geo, int jet_order = 0) {
  std::vector<Tensor<S>> factors;
  for (int m : inv.factors) {
    Tensor<S> t = geo.nabla_m_riemann(m);
    if (t.jet_order() < jet_order)
      throw Error(ErrorKind::JetOrder, "metric jet order too low for invariant " + inv.name);
    factors.push_back(truncate_to_order(t, jet_order));
  }
  // map global slots to (factor, slot)
  std::vector<std::pair<int, int>> slot_of;
  for (std::size_t f = 0; f < inv.factors.size(); ++f)
    for (int s = 0; s < 4 + inv.factors[f]; ++s)
      slot_of.emplace_back(static_cast<int>(f), s);
  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> bonds;
  for (auto [a, b] : inv.pairing) bonds.emplace_back(slot_of[a], slot_of[b]);
  return contract_network<S>(std::move(factors), std::move(bonds),
                             geo.inverse_metric_at_order(jet_order));
}

// ----------------------------------------------------------------- reporting

template <class S>
SpiReport spi_report(const MetricSpec& g, const std::vector<typename Jet<S>::Point>& points,
                     const std::vector<InvariantSpec>& invariants, int max_deriv,
                     int max_degree, double tolerance = 1e-9) {
  SpiReport rep;
  rep.mode = ScalarTraits<S>::mode_name();
  rep.max_deriv = max_deriv;
  rep.max_degree = max_degree;
  rep.tolerance = tolerance;
  for (const auto& inv : invariants) rep.invariant_names.push_back(inv.name);
  rep.values.assign(invariants.size(), {});
  if (ScalarTraits<S>::exact) rep.exact_values.assign(invariants.size(), {});

  int mmax = 0;
  for (const auto& inv : invariants) mmax = std::max(mmax, inv.max_deriv());

  std::vector<std::vector<S>> vals(invariants.size());
  for (const auto& base : points) {
    rep.points.push_back(point_to_string(*base));
    Geometry<S> geo(g, base, Geometry<S>::metric_order_for_nabla_m_riemann(mmax));
    for (std::size_t i = 0; i < invariants.size(); ++i) {
      Jet<S> v = evaluate_invariant(invariants[i], geo, 0);
      vals[i].push_back(v.value());
      rep.values[i].push_back(ScalarTraits<S>::to_double(v.value()));
      if (ScalarTraits<S>::exact)
        rep.exact_values[i].push_back(ScalarTraits<S>::to_string(v.value()));
    }
  }

  bool vsi = true, csi = true;
  for (std::size_t i = 0; i < invariants.size(); ++i) {
    double scale = 0;
    for (double v : rep.values[i]) scale = std::max(scale, std::fabs(v));
    for (std::size_t p = 0; p < vals[i].size(); ++p) {
      bool zero = ScalarTraits<S>::exact ? ScalarTraits<S>::is_zero(vals[i][p])
                                         : std::fabs(rep.values[i][p]) <= tolerance;
      if (!zero) vsi = false;
    }
    double lo = 0, hi = 0;
    if (!rep.values[i].empty()) {
      lo = *std::min_element(rep.values[i].begin(), rep.values[i].end());
      hi = *std::max_element(rep.values[i].begin(), rep.values[i].end());
    }
    if (ScalarTraits<S>::exact) {
      for (std::size_t p = 1; p < vals[i].size(); ++p)
        if (vals[i][p] != vals[i][0]) csi = false;
    } else if (hi - lo > tolerance * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)))) {
      csi = false;
    }
    (void)scale;
  }
  rep.vsi = vsi;
  rep.csi = csi || vsi;
  return rep;
}

/// X(I) for each invariant I: the invariant is evaluated with one jet order
/// and its gradient contracted with X at the point.
template <class S>
std::vector<S> directional_spi_derivative(const MetricSpec& g, const VectorFieldSpec& X,
                                          const std::vector<InvariantSpec>& invariants,
                                          const typename Jet<S>::Point& base) {
  int mmax = 0;
  for (const auto& inv : invariants) mmax = std::max(mmax, inv.max_deriv());
  Geometry<S> geo(g, base, Geometry<S>::metric_order_for_nabla_m_riemann(mmax) + 1);
  Tensor<S> Xv = eval_vector_field<S>(X, g.dim(), base, 0);
  std::vector<S> out;
  for (const auto& inv : invariants) {
    Jet<S> v = evaluate_invariant(inv, geo, 1);
    S acc = S(0);
    for (int a = 0; a < g.dim(); ++a) {
      std::vector<std::uint8_t> e(v.vars(), 0);
      e[a] = 1;
      acc += Xv.at(a).value() * v.coefficient(e);
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace kundt
