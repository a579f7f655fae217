#include "passmat/cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "json.hpp"
#include "passmat/cli/experiments.hpp"
#include "passmat/dissipop.hpp"
#include "passmat/errors.hpp"
#include "passmat/interconnect.hpp"
#include "passmat/io.hpp"
#include "passmat/passivity.hpp"
#include "passmat/smib.hpp"

namespace passmat::cli {
namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

// Everything a run depends on besides the code: hashed input files and the
// flags (minus the output path).
struct RunContext {
  std::string command;
  std::vector<std::string> inputs;
  std::string flags;

  std::string InputHash() const {
    std::string all;
    for (const std::string& s : inputs) all += s + '\0';
    return io::hex64(io::fnv1a(all));
  }
};

std::string Versions() {
  std::ostringstream os;
  os << "passmat=" << kVersion << " eigen=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
     << EIGEN_MINOR_VERSION;
  return os.str();
}

std::string Tolerances() {
  const LmiOptions o;
  std::ostringstream os;
  os << "feas_tol=" << io::fmt(o.sdp.feas_tol) << " gap_tol=" << io::fmt(o.sdp.gap_tol)
     << " eps_rel=" << io::fmt(o.eps_rel) << " loewner_abs=" << io::fmt(Tolerance{}.abs)
     << " loewner_rel=" << io::fmt(Tolerance{}.rel);
  return os.str();
}

std::string CsvHeader(const RunContext& ctx) {
  return "# " + ctx.command + " inputs_fnv1a=" + ctx.InputHash() + " " + Tolerances() + " " + Versions() +
         " flags=\"" + ctx.flags + "\"\n";
}

ordered_json MetaJson(const RunContext& ctx) {
  ordered_json m;
  m["command"] = ctx.command;
  m["inputs_fnv1a"] = ctx.InputHash();
  m["tolerances"] = Tolerances();
  m["versions"] = Versions();
  m["flags"] = ctx.flags;
  return m;
}

ordered_json Num(double v) {
  if (std::isfinite(v)) return v;
  return io::fmt(v);
}

std::string MatrixText(const Matrix& m) {
  std::ostringstream os;
  os << '[';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << io::fmt(m(i, j));
  }
  os << ']';
  return os.str();
}

std::vector<double> ParseList(const std::string& s, std::size_t count, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw InvalidInput(std::string(what) + ": cannot parse '" + tok + "'");
    }
  }
  if (out.size() != count) {
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(count) + " comma-separated numbers");
  }
  return out;
}

// Writes the primary output to `path` or, when empty, to `out`.
void Emit(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty()) {
    out << body;
  } else {
    io::write_file(path, body);
  }
}

struct Options {
  std::string output;

  std::string system;
  std::string mode = "ofp";
  std::string principle = "mineig";

  std::string k_path;
  double theta_max = 0.5;
  int steps = 101;

  std::string params;
  std::string window = "-0.4,0.4,-1.2,0.6";
  std::string grid = "81,81";
  std::string gain;
  int case_id = 0;
  double radius = 0.03;
  double dt = 2e-4;
  double t_end = 10.0;
  int stride = 50;

  double horizon = 40.0;
  int points = 512;
  int count = 20;

  std::string cert1;
  std::string cert2;
  std::string topology = "parallel";
  bool zso1 = true;
  bool zso2 = true;
};

std::string Flags(const std::vector<std::string>& args) {
  std::string f;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "-o" || args[i] == "--output") {
      ++i;
      continue;
    }
    if (args[i].rfind("--output=", 0) == 0) continue;
    if (!f.empty()) f += ' ';
    f += args[i];
  }
  return f;
}

SmibParams LoadParams(const Options& o, RunContext& ctx) {
  if (o.params.empty()) {
    ctx.inputs.push_back(io::smib_params_to_json(SmibParams{}));
    return SmibParams{};
  }
  ctx.inputs.push_back(io::read_file(o.params));
  return io::parse_smib_params(ctx.inputs.back());
}

int Analyze(const Options& o, RunContext& ctx, std::ostream& out, std::ostream& err) {
  ctx.inputs.push_back(io::read_file(o.system));
  const StateSpace sys = io::parse_system(ctx.inputs.back());
  Principle principle;
  if (o.principle == "trace") {
    principle = Principle::TraceMax;
  } else if (o.principle == "mineig") {
    principle = Principle::MinEigMax;
  } else {
    throw InvalidInput("--principle must be trace or mineig");
  }
  PassivityCertificate cert = [&] {
    if (o.mode == "ifp") return compute_ifpm(sys, principle);
    if (o.mode == "ofp") return compute_ofpm(sys, principle);
    if (o.mode == "ifofp") return compute_ifofp(sys, LmiOptions{}, principle);
    throw InvalidInput("--mode must be ifp, ofp or ifofp");
  }();
  const ScalarIndices si = scalar_indices(cert);
  const CertificateCheck chk = verify_certificate(sys, cert);

  std::optional<double> freq_index;
  if (o.mode == "ifp") {
    freq_index = scalar_index_freq(sys, FrequencyGrid::Default(), PassivityFamily::Input).value;
  } else if (o.mode == "ofp" && std::abs(sys.D().determinant()) > 0.0) {
    try {
      freq_index = scalar_index_freq(sys, FrequencyGrid::Default(), PassivityFamily::Output).value;
    } catch (const NumericalError&) {
    }
  }

  ordered_json doc = ordered_json::parse(io::certificate_to_json(cert));
  doc["principle"] = to_string(principle);
  doc["scalar_indices"] = {{"phi", Num(si.phi)}, {"xi", Num(si.xi)}};
  doc["scalar_index_frequency_sweep"] = freq_index ? Num(*freq_index) : ordered_json(nullptr);
  doc["verification"] = {{"ifp_margin", Num(chk.ifp_margin)},
                         {"ofp_margin", Num(chk.ofp_margin)},
                         {"ofp_via_supply", chk.ofp_via_supply},
                         {"supply_margin", Num(chk.supply_margin)},
                         {"margin", Num(chk.margin)},
                         {"worst_omega", Num(chk.worst_omega)}};
  doc["meta"] = MetaJson(ctx);
  Emit(o.output, doc.dump(2) + "\n", out);

  err << "certificate " << to_string(cert.kind()) << " (" << to_string(principle) << ")\n";
  err << "  Phi = " << MatrixText(cert.phi().matrix()) << "  lambda_min = " << io::fmt(si.phi) << "\n";
  err << "  Xi  = " << MatrixText(cert.xi().matrix()) << "  lambda_min = " << io::fmt(si.xi) << "\n";
  if (freq_index) {
    err << "  scalar " << (o.mode == "ifp" ? "IFP index nu" : "OFP index xi") << " (frequency sweep) = "
        << io::fmt(*freq_index) << "\n";
  }
  err << "  verification margin = " << io::fmt(chk.margin) << " at omega = " << io::fmt(chk.worst_omega) << "\n";
  return kOk;
}

int PassivationSweep(const Options& o, RunContext& ctx, std::ostream& out, std::ostream& err) {
  ctx.inputs.push_back(io::read_file(o.system));
  const StateSpace sys = io::parse_system(ctx.inputs.back());
  ctx.inputs.push_back(io::read_file(o.k_path));
  const Matrix k = io::parse_matrix(ctx.inputs.back());
  if (k.rows() != sys.ports() || k.cols() != sys.ports()) throw InvalidInput("K must be m x m");
  if (!(o.theta_max > 0.0)) throw InvalidInput("--theta-max must be positive");
  if (o.steps < 2) throw InvalidInput("--steps must be >= 2");

  const PassivationIndices idx = passivation_indices(sys);
  const PassivityCertificate c_tr = PassivityCertificate::Ofp(idx.xi_trace);
  const PassivityCertificate c_eig = PassivityCertificate::Ofp(idx.xi_mineig);
  const PassivityCertificate c_sc = PassivityCertificate::Ofp(SymmetricMatrix::Identity(sys.ports()) * idx.xi_scalar);

  std::string body = CsvHeader(ctx);
  body += io::csv_row({"theta", "true_passive", "scalar_cert", "trace_cert", "mineig_cert"});
  for (int i = 0; i < o.steps; ++i) {
    const double theta = o.theta_max * i / (o.steps - 1);
    const PassivityCertificate ctrl = static_ifpm(theta * k);
    auto b = [](bool v) { return std::string(v ? "1" : "0"); };
    body += io::csv_row({io::fmt(theta), b(closed_loop_passive(sys, k, theta)),
                         b(passivation_check(c_sc, ctrl).satisfied), b(passivation_check(c_tr, ctrl).satisfied),
                         b(passivation_check(c_eig, ctrl).satisfied)});
  }
  const PassivationThresholds t = passivation_thresholds(sys, idx, k, o.theta_max);
  body += io::csv_row({"threshold", io::fmt(t.truth), io::fmt(t.scalar), io::fmt(t.trace), io::fmt(t.mineig)});
  Emit(o.output, body, out);
  err << "thresholds: true " << io::fmt(t.truth) << ", scalar " << io::fmt(t.scalar) << ", trace "
      << io::fmt(t.trace) << ", mineig " << io::fmt(t.mineig) << "\n";
  return kOk;
}

SweepWindow WindowFrom(const Options& o) {
  const std::vector<double> w = ParseList(o.window, 4, "--window");
  const std::vector<double> g = ParseList(o.grid, 2, "--grid");
  SweepWindow sw;
  sw.k11_lo = w[0];
  sw.k11_hi = w[1];
  sw.k22_lo = w[2];
  sw.k22_hi = w[3];
  if (g[0] != std::floor(g[0]) || g[1] != std::floor(g[1]) || g[0] < 1 || g[1] < 1 || g[0] > 2001 ||
      g[1] > 2001) {
    throw InvalidInput("--grid must be two integers in [1, 2001]");
  }
  sw.n11 = static_cast<int>(g[0]);
  sw.n22 = static_cast<int>(g[1]);
  return sw;
}

int SmibRegion(const Options& o, RunContext& ctx, std::ostream& out, std::ostream& err) {
  const SmibParams p = LoadParams(o, ctx);
  const std::vector<RegionCell> cells = region_sweep(p, WindowFrom(o));
  std::string body = CsvHeader(ctx);
  body += io::csv_row({"K11", "K22", "scalar_cert", "matrix_cert", "eig_stable"});
  int ns = 0, nm = 0, ne = 0;
  for (const RegionCell& c : cells) {
    body += io::csv_row({io::fmt(c.k11), io::fmt(c.k22), c.scalar_cert ? "1" : "0", c.matrix_cert ? "1" : "0",
                         c.eig_stable ? "1" : "0"});
    ns += c.scalar_cert;
    nm += c.matrix_cert;
    ne += c.eig_stable;
  }
  Emit(o.output, body, out);
  err << "cells: " << cells.size() << ", scalar-certified " << ns << ", matrix-certified " << nm
      << ", small-signal stable " << ne << "\n";
  return kOk;
}

int SmibSim(const Options& o, RunContext& ctx, std::ostream& out, std::ostream& err) {
  const SmibParams p = LoadParams(o, ctx);
  Eigen::Matrix2d k;
  if (!o.gain.empty()) {
    const std::vector<double> g = ParseList(o.gain, 4, "--K");
    k << g[0], g[1], g[2], g[3];
  } else if (o.case_id >= 1 && o.case_id <= 4) {
    const CaseGains cases = select_cases(region_sweep(p, WindowFrom(o)));
    if (!cases.k[o.case_id - 1]) throw PreconditionError("no sweep cell in the requested case class");
    k = *cases.k[o.case_id - 1];
  } else {
    throw InvalidInput("give either --K k11,k12,k21,k22 or --case 1..4");
  }
  SimOptions so;
  so.dt = o.dt;
  so.t_end = o.t_end;
  so.record_stride = o.stride;
  const SmibState eq = equilibrium(p);
  const Trajectory tr = simulate(p, k, perturbed_start(p, o.radius), so);

  std::string body = CsvHeader(ctx);
  body += "# K=" + MatrixText(k) + "\n";
  body += io::csv_row({"t", "delta", "omega", "Eqp", "Pe", "H"});
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const SmibState& s = tr.states[i];
    body += io::csv_row({io::fmt(tr.times[i]), io::fmt(s.delta), io::fmt(s.omega), io::fmt(s.Eqp),
                         io::fmt(algebraic_vars(s, p).Pe), io::fmt(tr.hamiltonian[i])});
  }
  const double dev = (tr.states.back().vec() - eq.vec()).norm();
  body += std::string("# status=") + (tr.diverged ? "Diverged" : "Completed") + " terminal_deviation=" +
          io::fmt(dev) + "\n";
  Emit(o.output, body, out);
  err << "K = " << MatrixText(k) << ": " << (tr.diverged ? "Diverged" : "Completed") << ", |x(T) - x*| = "
      << io::fmt(dev) << "\n";
  return kOk;
}

int Spectral(const Options& o, RunContext& ctx, std::ostream& out, std::ostream& err) {
  ctx.inputs.push_back(io::read_file(o.system));
  const StateSpace sys = io::parse_system(ctx.inputs.back());
  const FourierLimitReport rep = fourier_limit_check(sys, o.horizon, o.points, o.count);
  std::string body = CsvHeader(ctx);
  body += io::csv_row({"index", "lambda", "omega", "eig_index", "deviation", "alignment"});
  for (const SpectralMatch& m : rep.matches) {
    body += io::csv_row({std::to_string(m.index), io::fmt(m.value), io::fmt(m.omega), std::to_string(m.eig_index),
                         io::fmt(m.deviation), io::fmt(m.alignment)});
  }
  Emit(o.output, body, out);
  err << "max relative deviation " << io::fmt(rep.max_relative_deviation) << "\n";
  return kOk;
}

int Interconnect(const Options& o, RunContext& ctx, std::ostream& out, std::ostream& err) {
  ctx.inputs.push_back(io::read_file(o.cert1));
  const PassivityCertificate c1 = io::parse_certificate(ctx.inputs.back());
  ctx.inputs.push_back(io::read_file(o.cert2));
  const PassivityCertificate c2 = io::parse_certificate(ctx.inputs.back());

  InterconnectionVerdict v;
  if (o.topology == "parallel") {
    v.composed = parallel_cert(c1, c2);
    v.satisfied = true;
    v.margin = std::numeric_limits<double>::infinity();
    v.binding_condition = "none";
  } else if (o.topology == "feedback") {
    const FeedbackMultipliers mult = default_multipliers(c1, c2);
    v.composed = feedback_cert(c1, c2, mult.m1, mult.m2);
    const int m1 = c1.dim();
    const int m2 = c2.dim();
    const SymmetricMatrix n1(v.composed->xi().matrix().topLeftCorner(m1, m1));
    const SymmetricMatrix n2(v.composed->xi().matrix().bottomRightCorner(m2, m2));
    const FeedbackResidual r = feedback_residual(c1, c2, mult.m1, mult.m2, n1, n2);
    const double me = min_eigenvalue(r.e);
    const double mf = min_eigenvalue(r.f);
    v.margin = std::min(me, mf);
    v.binding_condition = me <= mf ? "E >= 0" : "F >= 0";
    v.satisfied = v.margin >= -Tolerance{}.Bound(std::max(r.e.matrix().norm(), r.f.matrix().norm()));
  } else if (o.topology == "passivation") {
    v = passivation_check(c1, c2);
  } else if (o.topology == "l2") {
    v = l2_stability_check(c1, c2);
  } else if (o.topology == "lyapunov") {
    v = lyapunov_stability_check(c1, c2, o.zso1, o.zso2);
  } else {
    throw InvalidInput("--topology must be parallel, feedback, passivation, l2 or lyapunov");
  }
  ordered_json doc = ordered_json::parse(io::verdict_to_json(v));
  doc["topology"] = o.topology;
  doc["meta"] = MetaJson(ctx);
  Emit(o.output, doc.dump(2) + "\n", out);
  err << o.topology << ": " << (v.satisfied ? "satisfied" : "not satisfied") << ", margin " << io::fmt(v.margin)
      << " (" << v.binding_condition << ")\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Matrix-valued passivity indices: analysis, interconnection and case-study experiments", "passmat"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Options o;

  auto* analyze = app.add_subcommand("analyze", "Compute an IFP/OFP/IFOFP passivity matrix by LMI");
  analyze->add_option("system", o.system, "System JSON")->required();
  analyze->add_option("--mode", o.mode, "ifp | ofp | ifofp")->capture_default_str();
  analyze->add_option("--principle", o.principle, "trace | mineig")->capture_default_str();

  auto* sweep = app.add_subcommand("passivation-sweep", "Static-feedback passivation sweep over theta");
  sweep->add_option("system", o.system, "Plant system JSON")->required();
  sweep->add_option("K", o.k_path, "Feedback matrix JSON")->required();
  sweep->add_option("--theta-max", o.theta_max)->capture_default_str();
  sweep->add_option("--steps", o.steps)->capture_default_str();

  auto* region = app.add_subcommand("smib-region", "SMIB stability-region sweep over (K11, K22)");
  region->add_option("params", o.params, "SMIB parameter JSON (defaults if omitted)");
  region->add_option("--window", o.window, "k11_lo,k11_hi,k22_lo,k22_hi")->capture_default_str();
  region->add_option("--grid", o.grid, "n11,n22")->capture_default_str();

  auto* sim = app.add_subcommand("smib-sim", "SMIB closed-loop simulation from a perturbed equilibrium");
  sim->add_option("params", o.params, "SMIB parameter JSON (defaults if omitted)");
  sim->add_option("--K", o.gain, "k11,k12,k21,k22");
  sim->add_option("--case", o.case_id, "Representative gain 1..4 from the default sweep");
  sim->add_option("--window", o.window, "Sweep window used by --case")->capture_default_str();
  sim->add_option("--grid", o.grid, "Sweep grid used by --case")->capture_default_str();
  sim->add_option("--r", o.radius, "Perturbation radius")->capture_default_str();
  sim->add_option("--dt", o.dt)->capture_default_str();
  sim->add_option("--T", o.t_end)->capture_default_str();
  sim->add_option("--stride", o.stride, "Record every n-th step")->capture_default_str();

  auto* spectral = app.add_subcommand("spectral", "Dissipativity-operator spectrum vs. frequency-domain limit");
  spectral->add_option("system", o.system, "System JSON")->required();
  spectral->add_option("--T", o.horizon)->capture_default_str();
  spectral->add_option("--N", o.points)->capture_default_str();
  spectral->add_option("--count", o.count)->capture_default_str();

  auto* inter = app.add_subcommand("interconnect", "Compose or test two certificates");
  inter->add_option("cert1", o.cert1, "Certificate JSON")->required();
  inter->add_option("cert2", o.cert2, "Certificate JSON")->required();
  inter->add_option("--topology", o.topology, "parallel | feedback | passivation | l2 | lyapunov")
      ->capture_default_str();
  inter->add_option("--zso1", o.zso1, "Subsystem 1 zero-state observable")->capture_default_str();
  inter->add_option("--zso2", o.zso2, "Subsystem 2 zero-state observable")->capture_default_str();

  for (CLI::App* sub : {analyze, sweep, region, sim, spectral, inter}) {
    sub->add_option("-o,--output", o.output, "Output file (stdout if omitted)");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  RunContext ctx;
  ctx.flags = Flags(args);
  using Handler = std::function<int(const Options&, RunContext&, std::ostream&, std::ostream&)>;
  const std::pair<CLI::App*, Handler> table[] = {{analyze, Analyze},   {sweep, PassivationSweep},
                                                 {region, SmibRegion}, {sim, SmibSim},
                                                 {spectral, Spectral}, {inter, Interconnect}};
  try {
    for (const auto& [sub, handler] : table) {
      if (sub->parsed()) {
        ctx.command = sub->get_name();
        return handler(o, ctx, out, err);
      }
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kPrecondition;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kInputError;
}

}  // namespace passmat::cli
