#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "format.hpp"

#include "expander/barrier.hpp"
#include "expander/common.hpp"
#include "expander/params.hpp"
#include "expander/solver.hpp"

namespace expander::cli {

namespace {

using nlohmann::ordered_json;

constexpr double kResidualLimit = 1e-6;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DegenerateRadius:
      return kExitUsage;
    case ErrorCode::InadmissibleType:
    case ErrorCode::NonEvenDegree:
    case ErrorCode::UnsupportedCase:
      return kExitUnsupported;
    default:
      return kExitNumerical;
  }
}

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::InvalidArgument, "cannot open " + path + " for writing");
  file << content;
  file.close();
  if (!file) throw Error(ErrorCode::InvalidArgument, "failed writing " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

std::string spec_label(const LomseSpec& spec) {
  return "(" + std::to_string(spec.n()) + "," + std::to_string(spec.p()) + "," +
         std::to_string(spec.k()) + ")";
}

std::string complex_text(const std::complex<double>& z) {
  if (z.imag() == 0.0) return format_number(z.real());
  return format_number(z.real()) + (z.imag() < 0 ? "-" : "+") +
         format_number(std::abs(z.imag())) + "i";
}

// ---- params ----

struct ParamsArgs {
  int n = 0, p = 0, k = 0;
  bool json = false;
};

int cmd_params(const ParamsArgs& a, std::ostream& out) {
  const LomseSpec spec = validate_type(a.n, a.p, a.k);
  const EquilibriumClass eq = classify_equilibria(spec);
  const bool solvable = solvable_case(spec);
  if (a.json) {
    ordered_json doc;
    doc["n"] = spec.n();
    doc["p"] = spec.p();
    doc["k"] = spec.k();
    doc["family"] = family_name(spec.family());
    doc["lambda"] = spec.lambda();
    doc["phi0"] = spec.phi0();
    doc["origin_eigenvalues"] = {eq.origin_eigenvalues[0], eq.origin_eigenvalues[1]};
    ordered_json cone = ordered_json::array();
    for (const auto& z : eq.cone_point_eigenvalues) {
      cone.push_back({{"re", z.real()}, {"im", z.imag()}});
    }
    doc["cone_point_eigenvalues"] = std::move(cone);
    doc["discriminant"] = eq.discriminant;
    doc["kind"] = kind_name(eq.kind);
    doc["solvable"] = solvable;
    doc["uniqueness_radius_bound"] = uniqueness_radius_bound(spec);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  auto line = [&](const char* key, const std::string& value) {
    out << std::left << std::setw(26) << key << value << '\n';
  };
  line("type", spec_label(spec));
  line("family", std::string(family_name(spec.family())));
  line("lambda", format_number(spec.lambda()));
  line("phi0", format_number(spec.phi0()));
  line("origin eigenvalues", format_number(eq.origin_eigenvalues[0]) + ", " +
                                 format_number(eq.origin_eigenvalues[1]));
  line("cone point eigenvalues", complex_text(eq.cone_point_eigenvalues[0]) + ", " +
                                     complex_text(eq.cone_point_eigenvalues[1]));
  line("discriminant", format_number(eq.discriminant));
  line("kind", std::string(kind_name(eq.kind)));
  line("solvable", solvable ? "yes" : "no");
  line("uniqueness radius bound", format_number(uniqueness_radius_bound(spec)));
  return kExitOk;
}

// ---- solve / sweep / replay ----

std::string render_solve(const RunManifest& m) {
  const LomseSpec spec = validate_type(m.n, m.p, m.k);
  const ExpanderProfile profile = dirichlet_solve(spec, m.eps.at(0), m.radius.at(0), m.solver);
  if (m.format == "json") return profile_json(profile).dump() + "\n";
  return profile_csv(profile);
}

std::size_t worker_count(std::size_t requested, std::size_t tasks) {
  std::size_t jobs = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (const char* env = std::getenv("EXPANDER_LAB_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) jobs = std::min<std::size_t>(jobs, cap);
  }
  return std::max<std::size_t>(1, std::min(jobs, tasks));
}

SweepRow sweep_one(const LomseSpec& spec, double eps, double R, const SolverOptions& options) {
  SweepRow row{eps, R, false, 0.0, 0.0, 0.0, {}};
  try {
    const ExpanderProfile profile = dirichlet_solve(spec, eps, R, options);
    row.ok = true;
    row.phi_inf = profile.phi_inf;
    row.k_hat = profile.diagnostics.k_hat;
    row.residual = profile.diagnostics.max_residual;
  } catch (const Error& e) {
    row.error = std::string(error_name(e.code()));
  }
  return row;
}

std::vector<SweepRow> run_sweep(const RunManifest& m, std::size_t jobs) {
  const LomseSpec spec = validate_type(m.n, m.p, m.k);
  build_region(spec);
  std::vector<std::pair<double, double>> grid;
  for (double eps : m.eps) {
    for (double R : m.radius) grid.emplace_back(eps, R);
  }
  std::vector<SweepRow> rows(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      rows[i] = sweep_one(spec, grid[i].first, grid[i].second, m.solver);
    }
  };
  const std::size_t count = worker_count(jobs, grid.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < count; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

std::string render_sweep(const RunManifest& m, std::size_t jobs, bool& all_ok) {
  const std::vector<SweepRow> rows = run_sweep(m, jobs);
  all_ok = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.ok; });
  if (m.format == "json") {
    return sweep_json(validate_type(m.n, m.p, m.k), rows).dump() + "\n";
  }
  return sweep_csv(rows);
}

/// Renders the manifest's command, writes the output (stdout when the
/// manifest has no output path) and the sidecar manifest.
int execute(RunManifest m, std::size_t jobs, std::ostream& out) {
  std::string content;
  int code = kExitOk;
  if (m.command == "solve") {
    content = render_solve(m);
  } else if (m.command == "sweep") {
    bool all_ok = true;
    content = render_sweep(m, jobs, all_ok);
    if (!all_ok) code = kExitNumerical;
  } else {
    throw Error(ErrorCode::InvalidArgument, "manifest command '" + m.command + "' is not replayable");
  }
  if (m.output.empty()) {
    out << content;
  } else {
    write_file(m.output, content);
    m.timestamp = utc_timestamp();
    write_file(manifest_path_for(m.output), manifest_json(m).dump(2) + "\n");
  }
  return code;
}

struct SolveArgs {
  int n = 0, p = 0, k = 0;
  double eps = 0.0, R = 0.0;
  std::string out;
  std::string format = "csv";
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  RunManifest m;
  m.command = "solve";
  m.n = a.n;
  m.p = a.p;
  m.k = a.k;
  m.eps = {a.eps};
  m.radius = {a.R};
  m.format = a.format;
  m.output = a.out;
  return execute(m, 1, out);
}

struct SweepArgs {
  int n = 0, p = 0, k = 0;
  std::string eps_list;
  std::string radius_list;
  std::size_t jobs = 0;
  std::string out;
  std::string format = "csv";
};

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  RunManifest m;
  m.command = "sweep";
  m.n = a.n;
  m.p = a.p;
  m.k = a.k;
  try {
    m.eps = parse_number_list(a.eps_list);
    m.radius = parse_number_list(a.radius_list);
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
  if (m.eps.empty() || m.radius.empty()) {
    throw Error(ErrorCode::InvalidArgument, "sweep grid is empty");
  }
  m.format = a.format;
  m.output = a.out;
  return execute(m, a.jobs, out);
}

struct ReplayArgs {
  std::string manifest;
  std::string out;
  std::size_t jobs = 0;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out) {
  RunManifest m;
  try {
    m = manifest_from_json(nlohmann::json::parse(read_file(a.manifest)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("manifest is not JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }
  if (m.tool_version != kToolVersion) {
    throw Error(ErrorCode::InvalidArgument,
                "manifest was written by version " + m.tool_version);
  }
  if (!a.out.empty()) m.output = a.out;
  return execute(m, a.jobs, out);
}

// ---- verify ----

struct VerifyArgs {
  int n = 0, p = 0, k = 0;
  int samples = 10000;
  double eps = 0.05;
  double R = 0.0;
  bool all_solvable = false;
  int max_n = 9;
  int max_k = 4;
};

struct VerifyResult {
  bool invariance = false;
  bool uniqueness = false;
  bool envelope = false;
  bool residual = false;
  std::vector<std::string> lines;

  bool pass() const { return invariance && uniqueness && envelope && residual; }
};

const char* verdict(bool ok) { return ok ? "pass" : "FAIL"; }

VerifyResult verify_spec(const LomseSpec& spec, int samples, double eps, double R) {
  const InvariantRegion region = build_region(spec);
  VerifyResult res;
  std::ostringstream line;

  const InvarianceReport inv = verify_invariance(region, 0.0, samples);
  res.invariance = inv.pass;
  line << "invariance  " << verdict(inv.pass) << "  samples=" << std::to_string(inv.samples)
       << " min_bottom_inflow=" << format_number(inv.min_bottom_inflow)
       << " min_barrier_inflow=" << format_number(inv.min_barrier_inflow);
  res.lines.push_back(line.str());

  line.str("");
  try {
    const UniquenessReport uni = uniqueness_check(spec, eps, R);
    res.uniqueness = uni.pass;
    line << "uniqueness  " << verdict(uni.pass)
         << "  sup_difference=" << format_number(uni.sup_difference)
         << " threshold=" << format_number(uni.threshold)
         << " points=" << std::to_string(uni.compared_points);
  } catch (const Error& e) {
    line << "uniqueness  FAIL  " << error_name(e.code()) << ": " << e.what();
  }
  res.lines.push_back(line.str());

  try {
    const ExpanderProfile profile = dirichlet_solve(spec, eps, R);
    const ProfileDiagnostics& d = profile.diagnostics;
    res.envelope = d.envelope_ok && d.in_region_ok;
    res.residual = d.max_residual < kResidualLimit;
    line.str("");
    line << "envelope    " << verdict(res.envelope)
         << "  C=" << format_number(envelope_constant(spec))
         << " in_region=" << (d.in_region_ok ? "true" : "false");
    res.lines.push_back(line.str());
    line.str("");
    line << "residual    " << verdict(res.residual)
         << "  max_residual=" << format_number(d.max_residual)
         << " limit=" << format_number(kResidualLimit);
    res.lines.push_back(line.str());
    line.str("");
    line << "profile     phi_inf=" << format_number(profile.phi_inf)
         << " k_hat=" << format_number(d.k_hat)
         << " decay_fit=" << format_number(d.decay_fit)
         << " decay_bound=" << format_number(d.decay_bound);
    res.lines.push_back(line.str());
  } catch (const Error& e) {
    line.str("");
    line << "profile     FAIL  " << error_name(e.code()) << ": " << e.what();
    res.lines.push_back(line.str());
  }
  return res;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  if (a.samples < 100) throw Error(ErrorCode::InvalidArgument, "--samples must be at least 100");
  if (!a.all_solvable) {
    const LomseSpec spec = validate_type(a.n, a.p, a.k);
    build_region(spec);
    const double R = a.R > 0.0 ? a.R : uniqueness_radius_bound(spec);
    out << "verify " << spec_label(spec) << " epsilon=" << format_number(a.eps)
        << " radius=" << format_number(R) << '\n';
    const VerifyResult res = verify_spec(spec, a.samples, a.eps, R);
    for (const auto& l : res.lines) out << l << '\n';
    out << "result      " << verdict(res.pass()) << '\n';
    return res.pass() ? kExitOk : kExitNumerical;
  }

  out << std::left << std::setw(10) << "type" << std::setw(11) << "invariance"
      << std::setw(11) << "uniqueness" << std::setw(9) << "envelope" << std::setw(9)
      << "residual" << "result\n";
  bool all = true;
  int count = 0;
  for (int n = 3; n <= a.max_n; ++n) {
    for (int p = 1; p < n; ++p) {
      for (int k = 2; k <= a.max_k; k += 2) {
        std::optional<LomseSpec> spec;
        try {
          spec = validate_type(n, p, k);
        } catch (const Error&) {
          continue;
        }
        if (!solvable_case(*spec)) continue;
        const double R = a.R > 0.0 ? a.R : uniqueness_radius_bound(*spec);
        const VerifyResult res = verify_spec(*spec, a.samples, a.eps, R);
        out << std::setw(10) << spec_label(*spec) << std::setw(11) << verdict(res.invariance)
            << std::setw(11) << verdict(res.uniqueness) << std::setw(9) << verdict(res.envelope)
            << std::setw(9) << verdict(res.residual) << verdict(res.pass()) << '\n';
        all = all && res.pass();
        ++count;
      }
    }
  }
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "no solvable types up to --max-n");
  out << "result " << verdict(all) << " (" << std::to_string(count) << " types)\n";
  return all ? kExitOk : kExitNumerical;
}

void add_type_options(CLI::App* cmd, int& n, int& p, int& k, bool required) {
  auto* on = cmd->add_option("--n", n, "Domain dimension n");
  auto* op = cmd->add_option("--p", p, "Target dimension p");
  auto* ok = cmd->add_option("--k", k, "Degree k of the spherical map");
  if (required) {
    on->required();
    op->required();
    ok->required();
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-expanders over Lawson-Osserman cones", "expander_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  ParamsArgs params;
  auto* params_cmd = app.add_subcommand("params", "Constants, eigenvalues and classification of a type");
  add_type_options(params_cmd, params.n, params.p, params.k, true);
  params_cmd->add_flag("--json", params.json, "Print a JSON object");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the Dirichlet problem f(R) = epsilon R");
  add_type_options(solve_cmd, solve.n, solve.p, solve.k, true);
  solve_cmd->add_option("--epsilon", solve.eps, "Boundary slope epsilon")->required();
  solve_cmd->add_option("--radius", solve.R, "Dirichlet radius R")->required();
  solve_cmd->add_option("--out", solve.out, "Output file (a manifest is written next to it)");
  solve_cmd->add_option("--format", solve.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Certification suite for one type or all solvable types");
  add_type_options(verify_cmd, verify.n, verify.p, verify.k, false);
  verify_cmd->add_option("--samples", verify.samples, "Boundary samples for the invariance report");
  verify_cmd->add_option("--epsilon", verify.eps, "Boundary slope epsilon");
  verify_cmd->add_option("--radius", verify.R, "Dirichlet radius (default: uniqueness bound)");
  auto* all_flag = verify_cmd->add_flag("--all-solvable", verify.all_solvable, "Run every solvable type");
  verify_cmd->add_option("--max-n", verify.max_n, "Largest n with --all-solvable")->needs(all_flag);
  verify_cmd->add_option("--max-k", verify.max_k, "Largest k with --all-solvable")->needs(all_flag);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Solve over a grid of epsilon and radius values");
  add_type_options(sweep_cmd, sweep.n, sweep.p, sweep.k, true);
  sweep_cmd->add_option("--eps-list", sweep.eps_list, "Comma separated epsilon values")->required();
  sweep_cmd->add_option("--radius-list", sweep.radius_list, "Comma separated radii")->required();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (0: all cores)");
  sweep_cmd->add_option("--out", sweep.out, "Output file (a manifest is written next to it)");
  sweep_cmd->add_option("--format", sweep.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest");
  replay_cmd->add_option("--manifest", replay.manifest, "Manifest file")->required();
  replay_cmd->add_option("--out", replay.out, "Override the output file");
  replay_cmd->add_option("--jobs", replay.jobs, "Worker threads for sweeps");

  std::vector<const char*> argv{"expander_lab"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*params_cmd) return cmd_params(params, out);
    if (*solve_cmd) return cmd_solve(solve, out);
    if (*verify_cmd) {
      if (!verify.all_solvable && (verify.n == 0 || verify.p == 0 || verify.k == 0)) {
        err << "verify: --n, --p and --k are required without --all-solvable\n";
        return kExitUsage;
      }
      return cmd_verify(verify, out);
    }
    if (*sweep_cmd) return cmd_sweep(sweep, out);
    if (*replay_cmd) return cmd_replay(replay, out);
  } catch (const Error& e) {
    err << "error: " << error_name(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace expander::cli
