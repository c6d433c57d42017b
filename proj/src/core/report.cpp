#include "core/report.hpp"

#include <sstream>

namespace kundt {

Json CheckReport::to_json() const {
  Json j;
  j["predicate"] = predicate;
  j["subject"] = subject;
  j["points"] = points;
  j["tolerance"] = tolerance;
  j["exact_mode"] = exact_mode;
  Json cl = Json::array();
  for (const auto& c : clauses) {
    Json cj;
    cj["name"] = c.name;
    cj["residuals"] = c.residuals;
    if (exact_mode) cj["exact"] = c.exact;
    cj["pass"] = c.pass;
    cl.push_back(cj);
  }
  j["clauses"] = cl;
  if (agreement) j["agreement"] = *agreement;
  if (!notes.empty()) j["notes"] = notes;
  j["verdict"] = verdict;
  return j;
}

Json SpiReport::to_json() const {
  Json j;
  j["mode"] = mode;
  j["slice"] = Json{{"max_deriv", max_deriv}, {"max_degree", max_degree}};
  j["tolerance"] = tolerance;
  j["points"] = points;
  Json inv = Json::array();
  for (std::size_t i = 0; i < invariant_names.size(); ++i) {
    Json e;
    e["name"] = invariant_names[i];
    e["values"] = values[i];
    if (!exact_values.empty()) e["exact_values"] = exact_values[i];
    inv.push_back(e);
  }
  j["invariants"] = inv;
  j["vsi"] = vsi;
  j["csi"] = csi;
  j["verdict"] = vsi ? "VSI" : (csi ? "CSI" : "neither");
  return j;
}

Json RunReport::to_json() const {
  Json j;
  j["tool"] = tool;
  j["version"] = version;
  j["digest"] = digest;
  j["command"] = command;
  j["mode"] = mode;
  j["tolerance"] = tolerance;
  if (!checks.empty()) {
    Json arr = Json::array();
    for (const auto& c : checks) arr.push_back(c.to_json());
    j["checks"] = arr;
  }
  if (spi) j["spi"] = spi->to_json();
  if (!notes.empty()) j["notes"] = notes;
  j["verdict"] = verdict ? "pass" : "fail";
  if (timing_ms) j["timing_ms"] = *timing_ms;
  return j;
}

std::string RunReport::to_machine_string() const { return to_json().dump(2) + "\n"; }

std::string RunReport::to_human_string() const {
  std::ostringstream out;
  out << tool << " " << version << "  command=" << command << "  mode=" << mode << "\n";
  for (const auto& n : notes) out << "note: " << n << "\n";
  for (const auto& c : checks) {
    out << (c.verdict ? "[pass] " : "[FAIL] ") << c.predicate;
    if (!c.subject.empty()) out << " (" << c.subject << ")";
    out << "\n";
    for (const auto& cl : c.clauses) {
      out << "    " << (cl.pass ? "ok   " : "FAIL ") << cl.name
          << "  max residual " << cl.max_residual() << "\n";
    }
    if (c.agreement)
      out << "    criteria agreement: " << (*c.agreement ? "yes" : "NO") << "\n";
    for (const auto& n : c.notes) out << "    note: " << n << "\n";
  }
  if (spi) {
    out << "invariants (m<=" << spi->max_deriv << ", p<=" << spi->max_degree << ")\n";
    for (std::size_t i = 0; i < spi->invariant_names.size(); ++i) {
      out << "    " << spi->invariant_names[i] << ":";
      for (std::size_t p = 0; p < spi->values[i].size(); ++p) {
        if (!spi->exact_values.empty())
          out << " " << spi->exact_values[i][p];
        else
          out << " " << spi->values[i][p];
      }
      out << "\n";
    }
    out << "    verdict: " << (spi->vsi ? "VSI" : (spi->csi ? "CSI" : "neither")) << "\n";
  }
  out << "overall: " << (verdict ? "pass" : "FAIL") << "\n";
  return out.str();
}

}  // namespace kundt
