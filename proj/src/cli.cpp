#include "cvqkd/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace cvqkd {

using nlohmann::json;

std::string variable_name(ScanVariable v) {
  switch (v) {
    case ScanVariable::distance_km: return "distance_km";
    case ScanVariable::xi: return "xi";
    case ScanVariable::alpha: return "alpha";
    case ScanVariable::delta_a: return "delta_a";
  }
  return "unknown";
}

std::string status_name(RowStatus s) {
  switch (s) {
    case RowStatus::ok: return "ok";
    case RowStatus::solver_failed: return "solver_failed";
    case RowStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

ProtocolSpec RunConfig::spec() const { return ProtocolSpec::qpsk(alpha, delta_a, delta_p, detector, beta_ec); }

RunConfig RunConfig::with(ScanVariable v, double value) const {
  RunConfig c = *this;
  switch (v) {
    case ScanVariable::distance_km: c.channel.distance_km = value; break;
    case ScanVariable::xi: c.channel.xi = value; break;
    case ScanVariable::alpha: c.alpha = value; break;
    case ScanVariable::delta_a: c.delta_a = value; break;
  }
  return c;
}

namespace {

// Validates the physical parameters of one point.
void validate_point(const RunConfig& c, const std::string& where) {
  try {
    if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw SpecError("protocol.alpha must be positive");
    c.spec().validate();
    c.channel.validate();
  } catch (const SpecError& e) {
    throw ConfigError(where + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  validate_point(*this, "");
  try {
    solver.validate();
  } catch (const SpecError& e) {
    throw ConfigError(e.what());
  }
  if (subspace_N < 1) throw ConfigError("subspace_N must be at least 1");
  if (sweep && optimize) throw ConfigError("give at most one of 'sweep' and 'optimize'");
  if (sweep) {
    if (sweep->grid.empty()) throw ConfigError("sweep.grid must not be empty");
    for (std::size_t i = 0; i < sweep->grid.size(); ++i) {
      if (!std::isfinite(sweep->grid[i])) throw ConfigError("sweep.grid entries must be finite");
      if (i > 0 && sweep->grid[i] < sweep->grid[i - 1]) throw ConfigError("sweep.grid must be sorted");
      validate_point(with(sweep->variable, sweep->grid[i]), "sweep.grid[" + std::to_string(i) + "]: ");
    }
  }
  if (optimize) {
    if (optimize->variable != ScanVariable::alpha && optimize->variable != ScanVariable::delta_a)
      throw ConfigError("optimize.variable must be alpha or delta_a");
    if (!(optimize->lo < optimize->hi)) throw ConfigError("optimize.interval must satisfy lo < hi");
    if (!(optimize->tol > 0.0)) throw ConfigError("optimize.tol must be positive");
    validate_point(with(optimize->variable, optimize->lo), "optimize.interval: ");
    validate_point(with(optimize->variable, optimize->hi), "optimize.interval: ");
  }
}

namespace {

// Typed access to one JSON object with unknown-field detection.
class Fields {
public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "expected an object");
  }

  void only(std::initializer_list<const char*> keys) const {
    for (const auto& [k, v] : j_.items())
      if (std::find_if(keys.begin(), keys.end(), [&](const char* s) { return k == s; }) == keys.end())
        throw ConfigError(field(k) + ": unknown field");
  }
  bool has(const char* k) const { return j_.contains(k); }
  const json& at(const char* k) const { return j_.at(k); }
  std::string field(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  double number(const char* k, double def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number()) throw ConfigError(field(k) + ": expected a number");
    return v.get<double>();
  }
  int integer(const char* k, int def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) throw ConfigError(field(k) + ": expected an integer");
    return v.get<int>();
  }
  std::string string(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_string()) throw ConfigError(field(k) + ": expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const char* k) const {
    if (!has(k)) throw ConfigError(field(k) + ": missing");
    const json& v = j_.at(k);
    if (!v.is_array()) throw ConfigError(field(k) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(field(k) + ": expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

private:
  std::string where() const { return path_.empty() ? "" : path_ + ": "; }
  const json& j_;
  std::string path_;
};

ScanVariable parse_variable(const std::string& s, const std::string& field) {
  for (ScanVariable v : {ScanVariable::distance_km, ScanVariable::xi, ScanVariable::alpha, ScanVariable::delta_a})
    if (variable_name(v) == s) return v;
  throw ConfigError(field + ": unknown variable '" + s + "'");
}

int line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("line " + std::to_string(line_of(text, e.byte)) + ": malformed JSON (" + e.what() + ")");
  }
  RunConfig c;
  const Fields root(doc, "");
  root.only({"protocol", "channel", "subspace_N", "solver", "sweep", "optimize"});
  if (root.has("protocol")) {
    const Fields p(root.at("protocol"), "protocol");
    p.only({"alpha", "delta_a", "delta_p", "beta_ec", "detector"});
    c.alpha = p.number("alpha", c.alpha);
    c.delta_a = p.number("delta_a", c.delta_a);
    c.delta_p = p.number("delta_p", c.delta_p);
    c.beta_ec = p.number("beta_ec", c.beta_ec);
    if (p.has("detector")) {
      const Fields d(p.at("detector"), "protocol.detector");
      d.only({"kind", "eta_d", "nu_el"});
      const std::string kind = d.string("kind", "ideal");
      if (kind == "ideal")
        c.detector.kind = DetectorKind::ideal;
      else if (kind == "trusted")
        c.detector.kind = DetectorKind::trusted;
      else
        throw ConfigError("protocol.detector.kind: expected 'ideal' or 'trusted'");
      c.detector.eta_d = d.number("eta_d", 1.0);
      c.detector.nu_el = d.number("nu_el", 0.0);
    }
  }
  if (root.has("channel")) {
    const Fields ch(root.at("channel"), "channel");
    ch.only({"distance_km", "attenuation_db_per_km", "xi"});
    c.channel.distance_km = ch.number("distance_km", c.channel.distance_km);
    c.channel.attenuation_db_per_km = ch.number("attenuation_db_per_km", c.channel.attenuation_db_per_km);
    c.channel.xi = ch.number("xi", c.channel.xi);
  }
  c.subspace_N = root.integer("subspace_N", c.subspace_N);
  if (root.has("solver")) {
    const Fields s(root.at("solver"), "solver");
    s.only({"max_fw_iterations", "fw_gap_tol", "eig_floor", "eps_rep", "conic_tol"});
    c.solver.max_fw_iterations = s.integer("max_fw_iterations", c.solver.max_fw_iterations);
    c.solver.fw_gap_tol = s.number("fw_gap_tol", c.solver.fw_gap_tol);
    c.solver.eig_floor = s.number("eig_floor", c.solver.eig_floor);
    c.solver.eps_rep = s.number("eps_rep", c.solver.eps_rep);
    c.solver.conic_tol = s.number("conic_tol", c.solver.conic_tol);
  }
  if (root.has("sweep")) {
    const Fields s(root.at("sweep"), "sweep");
    s.only({"variable", "grid"});
    SweepSpec sw;
    sw.variable = parse_variable(s.string("variable", "distance_km"), "sweep.variable");
    sw.grid = s.numbers("grid");
    c.sweep = sw;
  }
  if (root.has("optimize")) {
    const Fields o(root.at("optimize"), "optimize");
    o.only({"variable", "interval", "tol"});
    OptimizeSpec op;
    op.variable = parse_variable(o.string("variable", "alpha"), "optimize.variable");
    const auto iv = o.numbers("interval");
    if (iv.size() != 2) throw ConfigError("optimize.interval: expected [lo, hi]");
    op.lo = iv[0];
    op.hi = iv[1];
    op.tol = o.number("tol", op.tol);
    c.optimize = op;
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  try {
    return parse_run_config(os.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string echo_run_config(const RunConfig& c) {
  json j;
  j["protocol"] = {{"alpha", c.alpha},
                   {"delta_a", c.delta_a},
                   {"delta_p", c.delta_p},
                   {"beta_ec", c.beta_ec},
                   {"detector",
                    {{"kind", c.detector.kind == DetectorKind::trusted ? "trusted" : "ideal"},
                     {"eta_d", c.detector.eta_d},
                     {"nu_el", c.detector.nu_el}}}};
  j["channel"] = {{"distance_km", c.channel.distance_km},
                  {"attenuation_db_per_km", c.channel.attenuation_db_per_km},
                  {"xi", c.channel.xi}};
  j["subspace_N"] = c.subspace_N;
  j["solver"] = {{"max_fw_iterations", c.solver.max_fw_iterations},
                 {"fw_gap_tol", c.solver.fw_gap_tol},
                 {"eig_floor", c.solver.eig_floor},
                 {"eps_rep", c.solver.eps_rep},
                 {"conic_tol", c.solver.conic_tol}};
  if (c.sweep) j["sweep"] = {{"variable", variable_name(c.sweep->variable)}, {"grid", c.sweep->grid}};
  if (c.optimize)
    j["optimize"] = {{"variable", variable_name(c.optimize->variable)},
                     {"interval", {c.optimize->lo, c.optimize->hi}},
                     {"tol", c.optimize->tol}};
  return j.dump(2) + "\n";
}

ResultRow evaluate_point(const RunConfig& config, const ConicSolverAdapter& adapter,
                         const std::optional<Moments>& effective) {
  validate_point(config, "");
  const ProtocolSpec spec = config.spec();
  ResultRow row;
  row.distance_km = config.channel.distance_km;
  row.xi = config.channel.xi;
  row.eta = config.channel.eta();
  row.alpha = config.alpha;
  row.delta_a = config.delta_a;
  row.delta_p = config.delta_p;
  row.N = config.subspace_N;
  row.eta_d = config.detector.eta_d;
  row.nu_el = config.detector.nu_el;

  const PointSetup ps = effective ? setup_point(spec, config.channel, config.subspace_N, *effective)
                                  : setup_simulated_point(spec, config.channel, config.subspace_N);
  row.W = ps.weight.W;
  row.delta_correction = ps.problem.delta_correction;
  auto fail = [&](RowStatus s, const std::exception& e) {
    row.status = s;
    row.message = e.what();
    const JointDistribution jd = joint_distribution(spec, config.channel);
    row.sift_prob = jd.sift_prob;
    row.ec_cost = jd.sift_prob * ec_cost(jd.sifted(), spec.beta_ec);
  };
  try {
    const SolveReport r = keyrate(ps.problem, config.channel, spec, config.solver, adapter);
    row.W = r.W;
    row.delta_correction = r.delta_correction;
    row.ec_cost = r.ec_cost;
    row.sift_prob = r.sift_prob;
    row.C_num = r.c_num;
    row.key_rate = r.key_rate;
    row.key_rate_uncorrected = r.c_num - r.ec_cost;
    for (const auto& w : r.warnings) row.message += (row.message.empty() ? "" : "; ") + w;
  } catch (const InfeasibleProblem& e) {
    fail(RowStatus::infeasible, e);
  } catch (const SolverFailure& e) {
    fail(RowStatus::solver_failed, e);
  } catch (const NumericalError& e) {
    fail(RowStatus::solver_failed, e);
  }
  return row;
}

std::vector<ResultRow> run_sweep(const RunConfig& config, const ConicSolverAdapter& adapter, int jobs) {
  if (!config.sweep) throw ConfigError("config has no 'sweep' section");
  const auto& grid = config.sweep->grid;
  std::vector<ResultRow> rows(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        rows[i] = evaluate_point(config.with(config.sweep->variable, grid[i]), adapter);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::clamp<int>(jobs, 1, static_cast<int>(grid.size())));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

OptimizeOutcome run_optimize(const RunConfig& config, const ConicSolverAdapter& adapter) {
  if (!config.optimize) throw ConfigError("config has no 'optimize' section");
  const OptimizeSpec& o = *config.optimize;
  OptimizeOutcome out;
  auto eval = [&](double x) -> std::optional<double> {
    out.rows.push_back(evaluate_point(config.with(o.variable, x), adapter));
    return out.rows.back().key_rate;
  };
  out.optimum = optimize_scalar(eval, o.lo, o.hi, o.tol);
  return out;
}

Moments moments_from_sample_files(const RunConfig& config, const std::vector<std::string>& paths) {
  const ProtocolSpec spec = config.spec();
  const int d = spec.num_signals();
  std::vector<std::string> files = paths;
  if (files.size() == 1 && files[0].find("{i}") != std::string::npos) {
    const std::string pattern = files[0];
    files.clear();
    for (int i = 0; i < d; ++i) {
      std::string f = pattern;
      f.replace(f.find("{i}"), 3, std::to_string(i));
      files.push_back(f);
    }
  }
  if (static_cast<int>(files.size()) != d)
    throw ConfigError("ingest-samples: expected " + std::to_string(d) +
                      " sample files (one per signal) or one path containing {i}");
  const double gain = spec.detector.kind == DetectorKind::trusted ? std::sqrt(spec.detector.eta_d) : 1.0;
  const auto beta = channel_amplitudes(spec, config.channel);
  Moments noisy;
  for (int i = 0; i < d; ++i) {
    const auto samples = read_samples_csv(files[static_cast<std::size_t>(i)]);
    if (samples.empty()) throw IoError("sample file '" + files[static_cast<std::size_t>(i)] + "' has no samples");
    const auto [n, nsq] = expectations_from_samples(samples, gain * beta[static_cast<std::size_t>(i)]);
    noisy.exp_n.push_back(n);
    noisy.exp_nsq.push_back(nsq);
  }
  if (spec.detector.kind == DetectorKind::trusted) return effective_expectations(noisy, spec.detector);
  for (int i = 0; i < d; ++i)
    if (noisy.exp_n[static_cast<std::size_t>(i)] < 0.0 || noisy.exp_nsq[static_cast<std::size_t>(i)] < 0.0)
      throw SpecError("sample moments for signal " + std::to_string(i) + " are negative");
  return noisy;
}

std::string csv_header() {
  return "distance_km,xi,eta,alpha,delta_a,delta_p,N,eta_d,nu_el,W,C_num,delta_correction,ec_cost,sift_prob,"
         "key_rate,key_rate_clamped,status";
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

std::string csv_line(const ResultRow& r) {
  std::ostringstream os;
  os << num(r.distance_km) << ',' << num(r.xi) << ',' << num(r.eta) << ',' << num(r.alpha) << ','
     << num(r.delta_a) << ',' << num(r.delta_p) << ',' << r.N << ',' << num(r.eta_d) << ',' << num(r.nu_el) << ','
     << num(r.W) << ',' << num(r.C_num) << ',' << num(r.delta_correction) << ',' << num(r.ec_cost) << ','
     << num(r.sift_prob) << ',' << num(r.key_rate) << ','
     << (r.key_rate ? num(std::max(0.0, *r.key_rate)) : std::string()) << ',' << status_name(r.status);
  return os.str();
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << csv_header() << '\n';
  for (const auto& r : rows) out << csv_line(r) << '\n';
  out.flush();
  if (!out) throw IoError("error while writing '" + path + "'");
}

}  // namespace cvqkd
