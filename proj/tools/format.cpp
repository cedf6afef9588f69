#include "format.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace expander::cli {

using nlohmann::ordered_json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double value = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw std::invalid_argument("not a number: '" + std::string(item) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

namespace {

struct Row {
  double r, f, f_r, phi, psi, t;
};

std::vector<Row> profile_rows(const ExpanderProfile& profile) {
  std::vector<Row> rows;
  rows.reserve(profile.samples.size());
  for (const ProfileSample& s : profile.samples) {
    rows.push_back({s.r, s.f, s.f_r, s.phi, s.psi, s.t});
  }
  return rows;
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string profile_csv(const ExpanderProfile& profile) {
  std::string out = "r,f,f_r,phi,psi,t\n";
  for (const Row& row : profile_rows(profile)) {
    out += format_number(row.r) + ',' + format_number(row.f) + ',' +
           format_number(row.f_r) + ',' + format_number(row.phi) + ',' +
           format_number(row.psi) + ',' + format_number(row.t) + '\n';
  }
  const ProfileDiagnostics& d = profile.diagnostics;
  const LomseSpec& s = profile.spec;
  out += "# n=" + std::to_string(s.n()) + " p=" + std::to_string(s.p()) +
         " k=" + std::to_string(s.k()) + '\n';
  out += "# epsilon=" + format_number(profile.eps) + '\n';
  out += "# radius=" + format_number(profile.R) + '\n';
  out += "# phi_inf=" + format_number(profile.phi_inf) + '\n';
  out += "# max_residual=" + format_number(d.max_residual) + '\n';
  out += "# k_hat=" + format_number(d.k_hat) + '\n';
  out += std::string("# envelope_ok=") + bool_text(d.envelope_ok) + '\n';
  out += std::string("# in_region_ok=") + bool_text(d.in_region_ok) + '\n';
  out += "# decay_fit=" + format_number(d.decay_fit) + '\n';
  return out;
}

ordered_json profile_json(const ExpanderProfile& profile) {
  const LomseSpec& s = profile.spec;
  const ProfileDiagnostics& d = profile.diagnostics;
  ordered_json doc;
  doc["schema"] = kProfileSchema;
  doc["spec"] = {{"n", s.n()}, {"p", s.p()}, {"k", s.k()},
                 {"lambda", s.lambda()}, {"phi0", s.phi0()}};
  doc["epsilon"] = profile.eps;
  doc["radius"] = profile.R;
  doc["columns"] = {"r", "f", "f_r", "phi", "psi", "t"};
  ordered_json rows = ordered_json::array();
  for (const Row& row : profile_rows(profile)) {
    rows.push_back({row.r, row.f, row.f_r, row.phi, row.psi, row.t});
  }
  doc["rows"] = std::move(rows);
  doc["diagnostics"] = {{"phi_inf", profile.phi_inf},
                        {"max_residual", d.max_residual},
                        {"k_hat", d.k_hat},
                        {"envelope_ok", d.envelope_ok},
                        {"in_region_ok", d.in_region_ok},
                        {"decay_fit", d.decay_fit},
                        {"decay_bound", d.decay_bound}};
  return doc;
}

std::optional<std::string> validate_profile_json(const nlohmann::json& doc) {
  if (!doc.is_object()) return "document is not an object";
  if (doc.value("schema", "") != kProfileSchema) return "schema tag missing or wrong";
  const auto& spec = doc.find("spec");
  if (spec == doc.end() || !spec->is_object()) return "spec missing";
  for (const char* key : {"n", "p", "k"}) {
    if (!spec->contains(key) || !(*spec)[key].is_number_integer()) {
      return std::string("spec.") + key + " must be an integer";
    }
  }
  for (const char* key : {"lambda", "phi0"}) {
    if (!spec->contains(key) || !(*spec)[key].is_number()) {
      return std::string("spec.") + key + " must be a number";
    }
  }
  for (const char* key : {"epsilon", "radius"}) {
    if (!doc.contains(key) || !doc[key].is_number()) {
      return std::string(key) + " must be a number";
    }
  }
  const nlohmann::json columns = {"r", "f", "f_r", "phi", "psi", "t"};
  if (!doc.contains("columns") || doc["columns"] != columns) return "columns must be r,f,f_r,phi,psi,t";
  if (!doc.contains("rows") || !doc["rows"].is_array()) return "rows must be an array";
  for (const auto& row : doc["rows"]) {
    if (!row.is_array() || row.size() != 6) return "every row needs 6 entries";
    for (const auto& v : row) {
      if (!v.is_number()) return "row entries must be numbers";
    }
  }
  const auto& diag = doc.find("diagnostics");
  if (diag == doc.end() || !diag->is_object()) return "diagnostics missing";
  for (const char* key : {"phi_inf", "max_residual", "k_hat", "decay_fit", "decay_bound"}) {
    if (!diag->contains(key) || !(*diag)[key].is_number()) {
      return std::string("diagnostics.") + key + " must be a number";
    }
  }
  for (const char* key : {"envelope_ok", "in_region_ok"}) {
    if (!diag->contains(key) || !(*diag)[key].is_boolean()) {
      return std::string("diagnostics.") + key + " must be a boolean";
    }
  }
  return std::nullopt;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "eps,R,phi_inf,k_hat,residual,status\n";
  for (const SweepRow& row : rows) {
    out += format_number(row.eps) + ',' + format_number(row.R) + ',';
    if (row.ok) {
      out += format_number(row.phi_inf) + ',' + format_number(row.k_hat) + ',' +
             format_number(row.residual) + ",ok\n";
    } else {
      out += ",,," + row.error + '\n';
    }
  }
  return out;
}

ordered_json sweep_json(const LomseSpec& spec, const std::vector<SweepRow>& rows) {
  ordered_json doc;
  doc["schema"] = kSweepSchema;
  doc["spec"] = {{"n", spec.n()}, {"p", spec.p()}, {"k", spec.k()}};
  ordered_json list = ordered_json::array();
  for (const SweepRow& row : rows) {
    ordered_json item = {{"eps", row.eps}, {"R", row.R}};
    if (row.ok) {
      item["phi_inf"] = row.phi_inf;
      item["k_hat"] = row.k_hat;
      item["residual"] = row.residual;
      item["status"] = "ok";
    } else {
      item["status"] = row.error;
    }
    list.push_back(std::move(item));
  }
  doc["rows"] = std::move(list);
  return doc;
}

namespace {

ordered_json tolerances_json(const Tolerances& tol) {
  return {{"rel", tol.rel}, {"abs", tol.abs}};
}

Tolerances tolerances_from(const nlohmann::json& doc) {
  return {doc.at("rel").get<double>(), doc.at("abs").get<double>()};
}

}  // namespace

ordered_json manifest_json(const RunManifest& m) {
  const SolverOptions& o = m.solver;
  ordered_json doc;
  doc["schema"] = kManifestSchema;
  doc["command"] = m.command;
  doc["spec"] = {{"n", m.n}, {"p", m.p}, {"k", m.k}};
  doc["epsilon"] = m.eps;
  doc["radius"] = m.radius;
  doc["format"] = m.format;
  doc["output"] = m.output;
  doc["tolerances"] = {{"shooting", tolerances_json(o.shooting)},
                       {"forward", tolerances_json(o.forward)},
                       {"forward_max_step", o.forward_max_step},
                       {"match_tol", o.match_tol},
                       {"max_match_iterations", o.max_match_iterations},
                       {"stop_psi", o.stop_psi},
                       {"stop_phi", o.stop_phi},
                       {"t_max", o.t_max},
                       {"tail_decades", o.tail_decades},
                       {"M", o.M},
                       {"delta", o.delta},
                       {"bracket_low", o.bracket_low},
                       {"bracket_high", o.bracket_high},
                       {"region_slack", o.region_slack}};
  doc["seeds"] = {{"first", m.seed_first}, {"second", m.seed_second}};
  doc["tool_version"] = m.tool_version;
  doc["timestamp"] = m.timestamp;
  return doc;
}

RunManifest manifest_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("schema").get<std::string>() != kManifestSchema) {
      throw std::invalid_argument("unknown manifest schema");
    }
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.n = doc.at("spec").at("n").get<int>();
    m.p = doc.at("spec").at("p").get<int>();
    m.k = doc.at("spec").at("k").get<int>();
    m.eps = doc.at("epsilon").get<std::vector<double>>();
    m.radius = doc.at("radius").get<std::vector<double>>();
    m.format = doc.at("format").get<std::string>();
    m.output = doc.at("output").get<std::string>();
    const auto& tol = doc.at("tolerances");
    m.solver.shooting = tolerances_from(tol.at("shooting"));
    m.solver.forward = tolerances_from(tol.at("forward"));
    m.solver.forward_max_step = tol.at("forward_max_step").get<double>();
    m.solver.match_tol = tol.at("match_tol").get<double>();
    m.solver.max_match_iterations = tol.at("max_match_iterations").get<int>();
    m.solver.stop_psi = tol.at("stop_psi").get<double>();
    m.solver.stop_phi = tol.at("stop_phi").get<double>();
    m.solver.t_max = tol.at("t_max").get<double>();
    m.solver.tail_decades = tol.at("tail_decades").get<double>();
    m.solver.M = tol.at("M").get<double>();
    m.solver.delta = tol.at("delta").get<double>();
    m.solver.bracket_low = tol.at("bracket_low").get<double>();
    m.solver.bracket_high = tol.at("bracket_high").get<double>();
    m.solver.region_slack = tol.at("region_slack").get<double>();
    m.seed_first = doc.at("seeds").at("first").get<std::uint64_t>();
    m.seed_second = doc.at("seeds").at("second").get<std::uint64_t>();
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.timestamp = doc.value("timestamp", "");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
  }
}

std::string manifest_path_for(const std::string& output) {
  return output + ".manifest.json";
}

}  // namespace expander::cli
