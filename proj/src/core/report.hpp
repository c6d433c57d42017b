#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kundt {

using Json = nlohmann::ordered_json;

/// One verified condition inside a predicate: a residual per sample point.
/// In rational mode `exact` marks residuals that are exactly zero; the
/// double value is then only informative.
struct Clause {
  std::string name;
  std::vector<double> residuals;
  std::vector<bool> exact;
  bool pass = true;

  void add(double r, bool is_exact_zero) {
    residuals.push_back(r);
    exact.push_back(is_exact_zero);
  }
  double max_residual() const {
    double m = 0;
    for (double r : residuals) m = std::max(m, r);
    return m;
  }
};

/// Result of one predicate over a sample of points.
struct CheckReport {
  std::string predicate;
  std::string subject;  // field / deformation / tensor the predicate examined
  std::vector<std::string> points;
  double tolerance = 1e-9;
  bool exact_mode = false;
  std::deque<Clause> clauses;  // deque keeps references stable across inserts
  std::optional<bool> agreement;  // consistency across equivalent criteria
  std::vector<std::string> notes;
  bool verdict = true;

  Clause& clause(const std::string& name) {
    for (auto& c : clauses)
      if (c.name == name) return c;
    clauses.push_back(Clause{name, {}, {}, true});
    return clauses.back();
  }

  /// Recomputes clause passes and the overall verdict from the residuals.
  void finalize() {
    verdict = true;
    for (auto& c : clauses) {
      c.pass = true;
      for (std::size_t i = 0; i < c.residuals.size(); ++i) {
        bool ok = exact_mode ? c.exact[i] : (c.residuals[i] <= tolerance);
        if (!ok) c.pass = false;
      }
      if (!c.pass) verdict = false;
    }
    if (agreement && !*agreement) verdict = false;
  }

  Json to_json() const;
};

/// Scalar-invariant evaluation over a sample, with the VSI/CSI verdict.
struct SpiReport {
  std::vector<std::string> invariant_names;
  std::vector<std::string> points;
  // values[i][p]: invariant i at point p
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::string>> exact_values;  // rational mode only
  int max_deriv = 0, max_degree = 0;
  std::string mode;
  double tolerance = 1e-9;
  bool vsi = false, csi = false;

  Json to_json() const;
};

struct RunReport {
  std::string tool = "kundt";
  std::string version;
  std::string digest;
  std::string command;
  std::string mode;
  double tolerance = 1e-9;
  std::vector<CheckReport> checks;
  std::optional<SpiReport> spi;
  std::vector<std::string> notes;
  bool verdict = true;
  std::optional<double> timing_ms;

  Json to_json() const;
  std::string to_machine_string() const;
  std::string to_human_string() const;
  int exit_code() const { return verdict ? 0 : 1; }
};

}  // namespace kundt
