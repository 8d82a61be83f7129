#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evpos/cones.h"
#include "evpos/iosys.h"
#include "evpos/linalg.h"
#include "evpos/lyapunov.h"
#include "evpos/model.h"
#include "evpos/report.h"
#include "evpos/spectral.h"

namespace {

using evpos::Error;
using evpos::ErrorCode;
using evpos::Matrix;
using evpos::Vector;
using evpos::report::Json;
using evpos::report::number;
using evpos::report::to_json;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPrecondition = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSchemaError:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNonSquare:
    case ErrorCode::kNonFinite:
      return kExitSchema;
    case ErrorCode::kNotDiagonalizable:
    case ErrorCode::kOverflow:
    case ErrorCode::kSingularSystem:
    case ErrorCode::kSingularExp:
    case ErrorCode::kSingularTransform:
      return kExitNumeric;
    default:
      return kExitPrecondition;
  }
}

Json error_json(const Error& e) {
  return {{"status", "Error"},
          {"error", std::string(evpos::to_string(e.code()))},
          {"message", e.what()}};
}

std::uint64_t seed_from_env() {
  const char* raw = std::getenv("EVPOS_SEED");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0') throw Error(ErrorCode::kSchemaError, "EVPOS_SEED must be an integer");
  return v;
}

struct CommonArgs {
  std::string model_path;
  std::string out_path;
  std::vector<std::string> tol;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("model", args.model_path, "Model file (JSON)")->required();
  cmd->add_option("--out", args.out_path, "Write the result here instead of stdout");
  cmd->add_option("--tol", args.tol,
                  "Tolerance override, key=value (eig, entry, gridStep, cone, "
                  "decrease); a bare number sets entry");
}

struct Loaded {
  evpos::model::ModelDocument doc;
  std::string hash;
};

Loaded load(const CommonArgs& args) {
  const std::string text = evpos::model::read_file(args.model_path);
  Loaded out{evpos::model::parse_model(text), evpos::report::input_hash(text)};
  for (const std::string& item : args.tol) {
    const auto eq = item.find('=');
    const std::string key = eq == std::string::npos ? "entry" : item.substr(0, eq);
    const std::string raw = eq == std::string::npos ? item : item.substr(eq + 1);
    const Vector v = evpos::model::parse_vector(raw);
    if (v.size() != 1) throw Error(ErrorCode::kSchemaError, "bad --tol value: " + item);
    out.doc.tol.set(key, v(0));
  }
  return out;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    evpos::report::write_atomic(out_path, content);
  }
}

Json header(const Loaded& loaded) {
  Json j;
  j["toolVersion"] = std::string(evpos::report::kToolVersion);
  j["inputHash"] = loaded.hash;
  j["model"] = {{"name", loaded.doc.name},
                {"n", loaded.doc.sys.n()},
                {"m", loaded.doc.sys.m()},
                {"k", loaded.doc.sys.k()}};
  return j;
}

// Runs one sub-analysis. Precondition failures are recorded as NotApplicable;
// numeric failures are recorded and raise the exit code to 3.
struct Runner {
  int exit_code = kExitOk;
  bool precondition_is_failure = false;

  void run(Json& slot, const std::function<void()>& body) {
    try {
      body();
    } catch (const Error& e) {
      const int code = exit_code_for(e.code());
      slot = error_json(e);
      if (code == kExitPrecondition) {
        slot["status"] = "NotApplicable";
        if (precondition_is_failure) exit_code = std::max(exit_code, code);
      } else {
        exit_code = std::max(exit_code, code);
      }
    }
  }
};

evpos::spectral::ClassifyOptions classify_options(const evpos::model::Tolerances& tol) {
  evpos::spectral::ClassifyOptions o;
  o.tol = tol.eig;
  o.entry_tol = tol.entry;
  o.grid_step = tol.grid_step_explicit ? tol.grid_step : 0.0;
  return o;
}

Json spectral_json(const evpos::spectral::SpectralVerdict& v,
                   const evpos::model::Tolerances& tol) {
  Json j;
  j["status"] = std::string(evpos::spectral::to_string(v.kind));
  j["reason"] = v.reason;
  j["dominantEigenvalue"] = to_json(v.dominant_value);
  if (v.has_eigensystem) {
    Json values = Json::array();
    for (Eigen::Index i = 0; i < v.eig.values.size(); ++i) values.push_back(to_json(v.eig.values(i)));
    j["eigenvalues"] = std::move(values);
    j["eigenResidual"] = number(v.eig.residual_norm);
    j["eigenvectorCondition"] = number(v.eig.condition_number);
  }
  j["simpleRealDominant"] = v.simple_real_dominant;
  j["spectralGap"] = number(v.spectral_gap);
  if (v.dominant_right.size()) {
    j["v1"] = to_json(v.dominant_right);
    j["w1"] = to_json(v.dominant_left);
    j["v1Min"] = number(v.dominant_right.minCoeff());
    j["w1Min"] = number(v.dominant_left.minCoeff());
  }
  j["exponentialIndexUpper"] = number(v.exponential_index_upper);
  j["certifiedTailTime"] = number(v.certified_tail_time);
  j["gridPoints"] = v.grid.times.size();
  j["samplingOracle"] = std::string(evpos::spectral::to_string(v.sampling_oracle));
  j["tolerances"] = {{"eig", tol.eig},
                     {"entry", tol.entry},
                     {"gridStep", tol.grid_step_explicit ? number(tol.grid_step) : Json("auto")}};
  return j;
}

Json fit_json(const evpos::cones::ConeFit& fit, double tol) {
  Json j;
  j["status"] = fit.found ? "Found" : "NotFound";
  j["steps"] = fit.steps;
  j["tolerance"] = tol;
  if (fit.found) {
    j["s"] = number(fit.s);
    j["minMargin"] = number(fit.margins.minCoeff());
    j["margins"] = to_json(fit.margins);
  }
  return j;
}

Json certificate_json(const evpos::lyapunov::LyapunovCertificate& c, double tol) {
  Json j;
  j["status"] = std::string(evpos::lyapunov::to_string(c.kind));
  j["reason"] = c.reason;
  if (c.weights.size()) j["weights"] = to_json(c.weights);
  j["domain"] = std::string(evpos::lyapunov::to_string(c.domain));
  if (c.domain == evpos::lyapunov::DomainKind::kOrthantCone) j["alpha"] = number(c.alpha);
  j["margin"] = number(c.margin);
  j["confidence"] = c.confidence;
  j["tolerance"] = tol;
  return j;
}

Json evidence_json(const evpos::iosys::ConditionEvidence& ev) {
  return {{"passed", ev.passed()},
          {"gridPassed", ev.grid_passed},
          {"tailCertified", ev.tail_certified},
          {"worstRelativeEntry", number(ev.worst_entry)},
          {"worstTime", number(ev.worst_time)},
          {"gridEnd", number(ev.grid_end)},
          {"gridPoints", ev.grid_points},
          {"tailTime", number(ev.tail_time)},
          {"note", ev.note}};
}

// ---------------------------------------------------------------------------

int cmd_analyze(const CommonArgs& args) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded loaded = load(args);
  const auto& doc = loaded.doc;
  const Matrix& a = doc.sys.a;
  const std::uint64_t seed = seed_from_env();

  Json report = header(loaded);
  Json& verdicts = report["verdicts"];
  const evpos::spectral::SpectralVerdict verdict =
      evpos::spectral::classify_system(a, classify_options(doc.tol));
  verdicts["spectral"] = spectral_json(verdict, doc.tol);

  Runner runner;
  Json& cones = verdicts["cones"];
  runner.run(cones["inner"], [&] {
    cones["inner"] = fit_json(evpos::cones::fit_inner_cone(verdict, doc.tol.cone), doc.tol.cone);
  });
  runner.run(cones["outer"], [&] {
    cones["outer"] = fit_json(evpos::cones::fit_outer_cone(verdict, doc.tol.cone), doc.tol.cone);
  });
  for (const char* key : {"inner", "outer"}) {
    if (cones[key].value("status", "") == "NotApplicable") cones[key]["status"] = "NotFound";
  }

  Json& lyap = verdicts["lyapunov"];
  runner.run(lyap["sumSeparable"], [&] {
    const auto res = evpos::lyapunov::sum_separable_for_evpos(a, verdict);
    lyap["sumSeparable"] = {{"eigenvector", certificate_json(res.eigen, doc.tol.decrease)},
                            {"lp", certificate_json(res.lp, doc.tol.decrease)}};
  });
  runner.run(lyap["maxSeparable"], [&] {
    evpos::lyapunov::MaxSeparableBudget budget;
    budget.seed = seed;
    lyap["maxSeparable"] = certificate_json(
        evpos::lyapunov::max_separable_for_evpos(a, verdict, budget), doc.tol.decrease);
  });
  runner.run(lyap["diagonalQuadratic"], [&] {
    lyap["diagonalQuadratic"] =
        certificate_json(evpos::lyapunov::diagonal_quadratic_check(a), doc.tol.decrease);
  });
  runner.run(lyap["maxSeparableNecessity"], [&] {
    const auto nec = evpos::lyapunov::global_max_separable_necessity(a);
    Json violations = Json::array();
    for (int i : nec.violations) violations.push_back(i + 1);
    lyap["maxSeparableNecessity"] = {{"globalImpossible", nec.impossible},
                                     {"nonNegativeDiagonalAt", violations}};
  });
  if (evpos::spectral::is_metzler(a)) {
    runner.run(lyap["positiveSystem"], [&] {
      const auto pc = evpos::lyapunov::positive_system_certificates(a);
      lyap["positiveSystem"] = {{"status", "Found"},
                                {"xi", to_json(pc.xi)},
                                {"xiMargin", number(pc.xi_margin)},
                                {"eta", to_json(pc.eta)},
                                {"etaMargin", number(pc.eta_margin)},
                                {"vdWeights", to_json(pc.vd_weights)}};
    });
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["timing"] = {{"seconds", seconds}};
  emit(args.out_path, report.dump(2) + "\n");
  return runner.exit_code;
}

struct IoArgs {
  std::string norm;
  std::optional<double> gamma;
  bool gramians = false;
  std::string energy;
};

int cmd_io(const CommonArgs& args, const IoArgs& io) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded loaded = load(args);
  const auto& doc = loaded.doc;
  const auto& sys = doc.sys;
  if (!doc.has_b || !doc.has_c) {
    throw Error(ErrorCode::kSchemaError, "io analysis needs B and C in the model");
  }
  std::optional<Vector> x0;
  if (!io.energy.empty()) {
    x0 = evpos::model::load_vector(io.energy);
    if (x0->size() != sys.n()) {
      throw Error(ErrorCode::kDimensionMismatch, "energy x0 has the wrong length");
    }
  }
  std::optional<evpos::iosys::NormKind> norm;
  if (!io.norm.empty()) norm = evpos::iosys::parse_norm(io.norm);

  evpos::iosys::IoCheckOptions opt;
  opt.entry_tol = doc.tol.entry;
  opt.grid_step = doc.tol.grid_step;

  Json report = header(loaded);
  Json& verdicts = report["verdicts"];
  const auto verdict = evpos::iosys::check_internal_eventual_positivity(sys, opt);
  verdicts["spectral"] = spectral_json(verdict.spectral, doc.tol);
  Json internal;
  internal["status"] = std::string(evpos::iosys::to_string(verdict.internal));
  internal["reason"] = verdict.reason;
  internal["tau0"] = number(verdict.tau0);
  internal["conditionII"] = evidence_json(verdict.condition_ii);
  internal["conditionIII"] = evidence_json(verdict.condition_iii);
  internal["dZero"] = verdict.d_zero;
  internal["dNonnegative"] = verdict.d_nonnegative;
  internal["orthantImageSufficient"] = verdict.orthant_image_sufficient;
  if (verdict.counterexample) {
    const auto& ce = *verdict.counterexample;
    internal["counterexample"] = {{"condition", ce.condition},
                                  {"t", number(ce.t)},
                                  {"row", ce.row + 1},
                                  {"col", ce.col + 1},
                                  {"value", number(ce.value)}};
  }
  internal["tolerances"] = {{"entry", opt.entry_tol}, {"gridStep", opt.grid_step}};
  verdicts["io"] = std::move(internal);
  const bool positive = verdict.internal == evpos::iosys::InternalStatus::kYes;

  Runner optional_runner;
  Runner requested;
  requested.precondition_is_failure = true;

  Json& steady = verdicts["steadyState"];
  optional_runner.run(steady, [&] {
    const auto maps = evpos::iosys::steady_state_maps(sys);
    steady = {{"status", "Computed"},
              {"stateGain", to_json(maps.state_gain)},
              {"outputGain", to_json(maps.output_gain)},
              {"staticGain", to_json(maps.static_gain)},
              {"minStateGain", number(maps.min_state_gain)},
              {"minOutputGain", number(maps.min_output_gain)},
              {"nonnegativityAsserted", positive},
              {"tolerance", 1e-9}};
  });

  Json& norms = verdicts["norms"];
  if (norm || io.gamma) {
    const auto p = norm.value_or(evpos::iosys::NormKind::kInf);
    requested.run(norms["induced"], [&] {
      const auto value = evpos::iosys::induced_norm(sys, p, opt);
      norms["induced"] = {{"status", value.certified ? "Certified" : "Uncertified"},
                          {"p", std::string(evpos::iosys::to_string(p))},
                          {"value", number(value.value)},
                          {"note", value.note}};
    });
    if (io.gamma) {
      requested.run(norms["certificate"], [&] {
        const auto cert = evpos::iosys::norm_bound_certificate(sys, *io.gamma, p, verdict);
        Json c{{"status", cert.feasible ? "Feasible" : "Infeasible"},
               {"p", std::string(evpos::iosys::to_string(p))},
               {"gamma", number(cert.gamma)},
               {"margin", number(cert.margin)},
               {"tolerance", 1e-9}};
        if (cert.feasible) {
          c["witness"] = to_json(cert.witness);
        } else {
          c["separating"] = to_json(cert.separating);
        }
        norms["certificate"] = std::move(c);
      });
    }
  }

  if (io.gramians) {
    Json& gram = verdicts["gramians"];
    requested.run(gram, [&] {
      const auto g = evpos::iosys::gramians(sys, &verdict);
      gram = {{"status", "Computed"},
              {"P", to_json(g.p)},
              {"Q", to_json(g.q)},
              {"residualP", number(g.p_residual)},
              {"residualQ", number(g.q_residual)},
              {"minP", number(g.min_p)},
              {"minQ", number(g.min_q)},
              {"nonnegativeP", g.p_nonnegative},
              {"nonnegativeQ", g.q_nonnegative},
              {"irreducibleP", g.p_irreducible},
              {"irreducibleQ", g.q_irreducible},
              {"nonnegativityAsserted", g.nonnegativity_asserted},
              {"irreducibilityAssertedP", g.p_irreducibility_asserted},
              {"irreducibilityAssertedQ", g.q_irreducibility_asserted},
              {"tolerance", 1e-9}};
    });
  }

  if (x0) {
    Json& energy = verdicts["energy"];
    energy["x0"] = to_json(*x0);
    requested.run(energy["o1"], [&] {
      energy["o1"] = {{"status", "Computed"},
                      {"value", number(evpos::iosys::observability_energy_l1(sys, verdict, *x0))}};
    });
    requested.run(energy["cinfLowerBound"], [&] {
      const auto bound = evpos::iosys::cinf_lower_bound(sys, verdict.spectral, *x0);
      energy["cinfLowerBound"] = {
          {"status", "Computed"}, {"bound", number(bound.bound)}, {"p", to_json(bound.p)}};
    });
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["timing"] = {{"seconds", seconds}};
  emit(args.out_path, report.dump(2) + "\n");
  return std::max(optional_runner.exit_code == kExitNumeric ? kExitNumeric : kExitOk,
                  requested.exit_code);
}

struct SimArgs {
  std::string x0;
  std::string u = "const:0";
  double horizon = 10.0;
  double step = 0.01;
};

evpos::iosys::InputSchedule parse_input(const std::string& spec, int m) {
  if (spec.rfind("const:", 0) == 0) {
    Vector u = evpos::model::parse_vector(spec.substr(6));
    if (u.size() == 1 && m != 1) u = Vector::Constant(m, u(0));
    if (m == 0) u.resize(0);
    if (u.size() != m) throw Error(ErrorCode::kDimensionMismatch, "input has the wrong length");
    return evpos::iosys::InputSchedule::constant(u);
  }
  // Steps file: one row per switch, "t, u_1, ..., u_m".
  std::istringstream in(evpos::model::read_file(spec));
  evpos::iosys::InputSchedule s;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const Vector row = evpos::model::parse_vector(line);
    if (row.size() != m + 1) throw Error(ErrorCode::kDimensionMismatch, "steps row has the wrong length");
    s.times.push_back(row(0));
    s.values.push_back(row.tail(m));
  }
  return s;
}

int cmd_simulate(const CommonArgs& args, const SimArgs& sim) {
  const Loaded loaded = load(args);
  const auto& sys = loaded.doc.sys;
  const Vector x0 = evpos::model::load_vector(sim.x0);
  const auto input = parse_input(sim.u, sys.m());
  const auto traj = evpos::iosys::simulate(sys, x0, input, sim.horizon, sim.step);

  std::string csv = "t";
  for (int i = 1; i <= sys.n(); ++i) csv += ",x_" + std::to_string(i);
  for (int i = 1; i <= sys.k(); ++i) csv += ",y_" + std::to_string(i);
  csv += "\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    csv += buf;
  };
  for (size_t r = 0; r < traj.t.size(); ++r) {
    put(traj.t[r]);
    for (Eigen::Index i = 0; i < traj.x[r].size(); ++i) {
      csv += ",";
      put(traj.x[r](i));
    }
    for (Eigen::Index i = 0; i < traj.y[r].size(); ++i) {
      csv += ",";
      put(traj.y[r](i));
    }
    csv += "\n";
  }
  emit(args.out_path, csv);
  return kExitOk;
}

int cmd_cone(const CommonArgs& args, double alpha) {
  const auto start = std::chrono::steady_clock::now();
  const Loaded loaded = load(args);
  const auto& doc = loaded.doc;
  const Matrix& a = doc.sys.a;
  if (!(alpha > 0.0)) throw Error(ErrorCode::kSchemaError, "--alpha must be positive");

  Json report = header(loaded);
  Json& verdicts = report["verdicts"];
  const auto verdict = evpos::spectral::classify_system(a, classify_options(doc.tol));
  verdicts["spectral"] = spectral_json(verdict, doc.tol);

  Runner runner;
  runner.precondition_is_failure = true;
  Json& cone_json = verdicts["cones"];
  runner.run(cone_json, [&] {
    const auto cone = evpos::cones::make_uniform_cone(verdict, alpha);
    const Vector inner = evpos::cones::inner_margins(cone);
    const Vector outer = evpos::cones::outer_margins(cone);
    const auto flow = evpos::cones::flow_invariance_check(a, cone, 100, 5.0, seed_from_env());
    cone_json = {{"status", "Built"},
                 {"alpha", alpha},
                 {"transform", to_json(cone.transform)},
                 {"conditionNumber", number(cone.condition_number)},
                 {"insideOrthant", inner.minCoeff() > doc.tol.cone},
                 {"innerMargins", to_json(inner)},
                 {"containsOrthant", outer.minCoeff() > doc.tol.cone},
                 {"outerMargins", to_json(outer)},
                 {"flowInvariance",
                  {{"passed", flow.passed()},
                   {"points", flow.points},
                   {"times", flow.times},
                   {"membershipViolations", flow.membership_violations},
                   {"inequalityViolations", flow.inequality_violations},
                   {"worstMembershipMargin", number(flow.worst_membership_margin)},
                   {"worstInequalitySlack", number(flow.worst_inequality_slack)},
                   {"tolerance", 1e-8}}},
                 {"innerFit", fit_json(evpos::cones::fit_inner_cone(verdict, doc.tol.cone), doc.tol.cone)},
                 {"outerFit", fit_json(evpos::cones::fit_outer_cone(verdict, doc.tol.cone), doc.tol.cone)}};
  });
  runner.run(verdicts["positivizingTransform"], [&] {
    if (!verdict.simple_real_dominant) {
      throw Error(ErrorCode::kPreconditionFailed, "no simple real dominant eigenvalue");
    }
    const auto t = evpos::cones::positivizing_transform(verdict.dominant_right,
                                                        verdict.dominant_left);
    verdicts["positivizingTransform"] = {{"status", "Built"},
                                         {"S", to_json(t.s)},
                                         {"explicitFormula", t.explicit_formula},
                                         {"conditionNumber", number(t.condition_number)}};
  });

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report["timing"] = {{"seconds", seconds}};
  emit(args.out_path, report.dump(2) + "\n");
  return runner.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eventual positivity analysis for linear time-invariant systems"};
  app.require_subcommand(1);

  CommonArgs common;
  auto* analyze = app.add_subcommand("analyze", "Spectral class, cones, Lyapunov certificates");
  add_common(analyze, common);

  IoArgs io;
  auto* io_cmd = app.add_subcommand("io", "Input-output positivity, norms, Gramians, energy");
  add_common(io_cmd, common);
  io_cmd->add_option("--norm", io.norm, "Induced norm: 1, 2 or inf");
  io_cmd->add_option("--gamma", io.gamma, "Bound to certify with an LP witness");
  io_cmd->add_flag("--gramians", io.gramians, "Solve for the Gramians");
  io_cmd->add_option("--energy", io.energy, "File holding x0 for the energy functions");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Exact-discretization trajectory as CSV");
  add_common(sim_cmd, common);
  sim_cmd->add_option("--x0", sim.x0, "File holding the initial state")->required();
  sim_cmd->add_option("--u", sim.u, "const:<value[,value...]> or a steps file");
  sim_cmd->add_option("--horizon", sim.horizon);
  sim_cmd->add_option("--step", sim.step);

  double alpha = 1.0;
  auto* cone_cmd = app.add_subcommand("cone", "Ice-cream cone K_{s1} diagnostics");
  add_common(cone_cmd, common);
  cone_cmd->add_option("--alpha", alpha, "Uniform cone weight s");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitSchema;
  }

  try {
    if (*analyze) return cmd_analyze(common);
    if (*io_cmd) return cmd_io(common, io);
    if (*sim_cmd) return cmd_simulate(common, sim);
    if (*cone_cmd) return cmd_cone(common, alpha);
  } catch (const Error& e) {
    std::cerr << "evpos: " << evpos::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "evpos: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitSchema;
}
