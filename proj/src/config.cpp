#include "ahtsim/config.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <map>
#include <stdexcept>

#include "ahtsim/aht.hpp"
#include "ahtsim/experiments.hpp"
#include "ahtsim/io.hpp"
#include "ahtsim/model.hpp"
#include "ahtsim/sequence.hpp"

namespace ahtsim {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct FieldError : std::runtime_error {
  FieldError(std::string p, const std::string& message)
      : std::runtime_error(message), path(std::move(p)) {}
  std::string path;
};

std::string join(const std::string& base, const std::string& key) { return base + "/" + key; }

const json& require(const json& obj, const std::string& base, const char* key) {
  if (!obj.is_object()) throw FieldError(base, "expected an object");
  if (!obj.contains(key)) throw FieldError(join(base, key), "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw FieldError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw FieldError(path, "expected a finite number");
  return d;
}

double number_or(const json& obj, const std::string& base, const char* key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), join(base, key)) : fallback;
}

double positive(const json& v, const std::string& path) {
  const double d = number(v, path);
  if (!(d > 0.0)) throw FieldError(path, "must be > 0");
  return d;
}

double positive_or(const json& obj, const std::string& base, const char* key, double fallback) {
  return obj.contains(key) ? positive(obj.at(key), join(base, key)) : fallback;
}

std::uint64_t count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw FieldError(path, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::uint64_t count_or(const json& obj, const std::string& base, const char* key,
                       std::uint64_t fallback) {
  return obj.contains(key) ? count(obj.at(key), join(base, key)) : fallback;
}

std::size_t index_in(const json& obj, const std::string& base, const char* key, std::size_t n) {
  const auto i = count(require(obj, base, key), join(base, key));
  if (i >= n) {
    throw FieldError(join(base, key), "spin index " + std::to_string(i) + " out of range for " +
                                          std::to_string(n) + " spins");
  }
  return static_cast<std::size_t>(i);
}

std::string string_of(const json& v, const std::string& path) {
  if (!v.is_string()) throw FieldError(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw FieldError(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], join(path, std::to_string(i))));
  return out;
}

/// Array of values or {"min", "max", "count"} log grid.
std::vector<double> grid(const json& v, const std::string& path) {
  if (v.is_array()) {
    auto out = number_list(v, path);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (!(out[i] > 0.0)) throw FieldError(join(path, std::to_string(i)), "must be > 0");
    }
    return out;
  }
  const double lo = positive(require(v, path, "min"), join(path, "min"));
  const double hi = positive(require(v, path, "max"), join(path, "max"));
  const auto n = count(require(v, path, "count"), join(path, "count"));
  if (hi < lo) throw FieldError(join(path, "max"), "must be >= min");
  if (n == 0) throw FieldError(join(path, "count"), "must be >= 1");
  return log_grid(lo, hi, static_cast<std::size_t>(n));
}

std::optional<Axis> w_axis(const json& v, const std::string& path) {
  if (v.is_null()) return std::nullopt;
  const std::string s = string_of(v, path);
  if (s == "-" || s.empty()) return std::nullopt;
  const auto a = parse_axis(s);
  if (!a) throw FieldError(path, "expected X, Y, Z or \"-\"");
  return a;
}

PiTrain pi_train(const json& obj, const std::string& base, double T) {
  if (!obj.contains("pi_train")) return std::nullopt;
  const json& v = obj.at("pi_train");
  const std::string path = join(base, "pi_train");
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "idealized") return std::nullopt;
    if (s == "default") return T / 20.0;
    throw FieldError(path, "expected \"idealized\", \"default\" or a spacing in seconds");
  }
  return positive(v, path);
}

SuperWhhMode super_mode(const json& obj, const std::string& base) {
  if (!obj.contains("mode")) return SuperWhhMode::Symmetrized;
  const std::string s = string_of(obj.at("mode"), join(base, "mode"));
  if (s == "plain") return SuperWhhMode::Plain;
  if (s == "symmetrized") return SuperWhhMode::Symmetrized;
  throw FieldError(join(base, "mode"), "expected \"plain\" or \"symmetrized\"");
}

// ---------------------------------------------------------------------------
// Sections

std::optional<SpinSystem> build_system(const json& doc) {
  if (!doc.contains("system")) return std::nullopt;
  const json& s = doc.at("system");
  const std::string base = "/system";
  if (!s.is_object()) throw FieldError(base, "expected an object");
  try {
    if (s.contains("chain")) {
      const json& c = s.at("chain");
      const auto n = count(require(c, "/system/chain", "n"), "/system/chain/n");
      if (n < 1 || n > kDefaultDenseCap) throw FieldError("/system/chain/n", "must be in [1, 12]");
      const double d = number(require(c, "/system/chain", "coupling"), "/system/chain/coupling");
      std::vector<double> offsets(n, 0.0);
      if (s.contains("offsets")) offsets = number_list(s.at("offsets"), "/system/offsets");
      if (offsets.size() != n) throw FieldError("/system/offsets", "needs one value per spin");
      return SpinSystem(offsets, chain_couplings(n, d));
    }
    const auto offsets = number_list(require(s, base, "offsets"), "/system/offsets");
    const std::size_t n = offsets.size();
    if (n > kDefaultDenseCap) throw FieldError("/system/offsets", "at most 12 spins");
    if (s.contains("geometry")) {
      const json& g = s.at("geometry");
      Geometry geo;
      const json& pos = require(g, "/system/geometry", "positions");
      if (!pos.is_array()) throw FieldError("/system/geometry/positions", "expected an array");
      for (std::size_t i = 0; i < pos.size(); ++i) {
        const auto p = number_list(pos[i], "/system/geometry/positions/" + std::to_string(i));
        if (p.size() != 3) {
          throw FieldError("/system/geometry/positions/" + std::to_string(i), "expected 3 coordinates");
        }
        geo.positions.emplace_back(p[0], p[1], p[2]);
      }
      geo.gamma = positive_or(g, "/system/geometry", "gamma", kGammaProton);
      if (geo.positions.size() != n) {
        throw FieldError("/system/geometry/positions", "needs one position per offset");
      }
      return SpinSystem::from_geometry(geo, offsets);
    }
    if (!s.contains("couplings")) return SpinSystem::uncoupled(offsets);
    const json& c = s.at("couplings");
    if (!c.is_array() || c.size() != n) {
      throw FieldError("/system/couplings", "expected an n x n array");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = number_list(c[i], "/system/couplings/" + std::to_string(i));
      if (row.size() != n) {
        throw FieldError("/system/couplings/" + std::to_string(i), "expected " + std::to_string(n) + " values");
      }
      for (std::size_t j = 0; j < n; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
      }
    }
    return SpinSystem(offsets, m);
  } catch (const FieldError&) {
    throw;
  } catch (const std::exception& e) {
    throw FieldError(base, e.what());
  }
}

struct NamedSequence {
  std::string label;
  PulseSequence seq;
  std::optional<std::string> notation;
};

NamedSequence build_sequence(const json& s, const std::string& base) {
  if (!s.is_object()) throw FieldError(base, "expected an object");
  NamedSequence out;
  if (s.contains("notation")) {
    const std::string text = string_of(s.at("notation"), join(base, "notation"));
    CycleSpec spec;
    try {
      spec = parse_mansfield(text);
    } catch (const NotationError& e) {
      throw FieldError(join(base, "notation"), e.what());
    }
    const double tau = positive_or(s, base, "tau", 1.0);
    out.seq = expand_cycle(spec, tau);
    out.notation = to_string(spec);
    out.label = s.value("label", *out.notation);
    return out;
  }
  const std::string builder = string_of(require(s, base, "builder"), join(base, "builder"));
  if (builder == "mrev16") {
    out.seq = build_mrev16(positive_or(s, base, "tau", 1.0));
    out.notation = std::string(kMrev16Notation);
    out.label = s.value("label", "MREV-16");
  } else if (builder == "w") {
    const json& axes = require(s, base, "axes");
    if (!axes.is_array() || axes.empty()) throw FieldError(join(base, "axes"), "expected an array");
    WAxes w;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      w.push_back(w_axis(axes[i], join(join(base, "axes"), std::to_string(i))));
    }
    const double T = positive_or(s, base, "T", 1.0);
    out.seq = build_w_schedule(w, T, pi_train(s, base, T));
    std::string label;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (i) label += ' ';
      label += subcycle_label(w[i]);
    }
    out.label = s.value("label", label);
  } else if (builder == "super-whh") {
    const auto n = count(require(s, base, "n"), join(base, "n"));
    if (n < 2 || n > kDefaultDenseCap) throw FieldError(join(base, "n"), "must be in [2, 12]");
    const std::size_t k = index_in(s, base, "k", n);
    const std::size_t l = index_in(s, base, "l", n);
    if (k == l) throw FieldError(join(base, "l"), "must differ from k");
    const double T = positive_or(s, base, "T", 1.0);
    out.seq = build_super_whh(n, k, l, T, super_mode(s, base), pi_train(s, base, T)).merged;
    out.label = s.value("label", "super-WHH");
  } else {
    throw FieldError(join(base, "builder"), "unknown builder '" + builder + "'");
  }
  return out;
}

std::vector<NamedSequence> build_sequences(const json& doc, bool required) {
  std::vector<NamedSequence> out;
  if (doc.contains("sequences")) {
    const json& arr = doc.at("sequences");
    if (!arr.is_array() || arr.empty()) throw FieldError("/sequences", "expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(build_sequence(arr[i], "/sequences/" + std::to_string(i)));
    }
  } else if (doc.contains("sequence")) {
    out.push_back(build_sequence(doc.at("sequence"), "/sequence"));
  } else if (required) {
    throw FieldError("/sequence", "missing required field");
  }
  return out;
}

struct NamedOperator {
  std::string label;
  OperatorSum op;
};

NamedOperator build_hamiltonian(const json& h, const std::string& base,
                                const std::optional<SpinSystem>& system) {
  if (h.is_string()) {
    const std::string kind = h.get<std::string>();
    if (!system) throw FieldError(base, "'" + kind + "' needs a /system section");
    if (kind == "dipolar") return {kind, build_dipolar(*system)};
    if (kind == "zeeman") return {kind, build_zeeman(*system)};
    if (kind == "total") return {kind, build_dipolar(*system) + build_zeeman(*system)};
    throw FieldError(base, "expected \"dipolar\", \"zeeman\", \"total\" or an operator object");
  }
  if (!h.is_object()) throw FieldError(base, "expected a string or an object");
  const auto n = count(require(h, base, "n"), join(base, "n"));
  if (n < 1 || n > kMaxWordLength) throw FieldError(join(base, "n"), "must be in [1, 64]");
  const json& terms = require(h, base, "terms");
  if (!terms.is_object()) throw FieldError(join(base, "terms"), "expected an object word -> coefficient");
  OperatorSum op(n);
  for (const auto& [word, coeff] : terms.items()) {
    const std::string path = join(join(base, "terms"), word);
    SpinWord w;
    try {
      w = SpinWord::parse(word);
    } catch (const std::exception& e) {
      throw FieldError(path, e.what());
    }
    if (w.size() != n) throw FieldError(path, "word length differs from n");
    op.add_term(w, number(coeff, path));
  }
  return {h.is_object() && h.contains("label") ? h.at("label").get<std::string>() : op.str(), op};
}

std::vector<NamedOperator> build_hamiltonians(const json& doc,
                                              const std::optional<SpinSystem>& system) {
  std::vector<NamedOperator> out;
  if (doc.contains("hamiltonians")) {
    const json& arr = doc.at("hamiltonians");
    if (!arr.is_array() || arr.empty()) throw FieldError("/hamiltonians", "expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(build_hamiltonian(arr[i], "/hamiltonians/" + std::to_string(i), system));
    }
  } else if (doc.contains("hamiltonian")) {
    out.push_back(build_hamiltonian(doc.at("hamiltonian"), "/hamiltonian", system));
  } else {
    throw FieldError("/hamiltonian", "missing required field");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Experiment plans

struct Plan {
  std::string type;
  std::string format;  // "csv" or "json"
  std::string name;
  std::filesystem::path dir;
  std::uint64_t seed = 1;
  unsigned threads = 0;

  FidelityScanParams scan;
  RecouplingParams recouple;
  std::vector<double> sel_delta;
  double sel_omega = 0.0;
  double sel_duration = 0.0;
  std::vector<NamedSequence> sequences;
  std::vector<NamedOperator> hamiltonians;
  double tol = 1e-12;
};

void plan_scan(const json& doc, const json& e, Plan& p) {
  const std::string base = "/experiment";
  FidelityScanParams& s = p.scan;
  if (e.contains("tau_D")) s.tau_d = grid(e.at("tau_D"), "/experiment/tau_D");
  if (e.contains("tau_dw")) s.tau_dw = grid(e.at("tau_dw"), "/experiment/tau_dw");
  s.tau = positive_or(e, base, "tau", s.tau);
  s.seeds = count_or(e, base, "seeds", s.seeds);
  if (s.seeds == 0) throw FieldError("/experiment/seeds", "must be >= 1");
  s.phase = number_or(e, base, "phase", s.phase);
  s.amplitude_ratio = positive_or(e, base, "amplitude_ratio", s.amplitude_ratio);
  if (doc.contains("dt")) {
    s.dt_fraction = positive_or(doc.at("dt"), "/dt", "fraction", s.dt_fraction);
    s.dt_scale = positive_or(doc.at("dt"), "/dt", "scale", s.dt_scale);
  }
  if (doc.contains("sequence")) {
    const NamedSequence ns = build_sequence(doc.at("sequence"), "/sequence");
    if (!ns.notation) throw FieldError("/sequence", "the fidelity scan needs a notation-based cycle");
    s.cycle = *ns.notation;
    const OffsetVectors v = offset_vectors(ns.seq);
    if (!(v.zeta.norm() > 0.0)) throw FieldError("/sequence", "cycle removes all offsets; no selective drive");
  }
  s.seed = p.seed;
  s.threads = p.threads;
}

void plan_recouple(const json& e, Plan& p) {
  const std::string base = "/experiment";
  RecouplingParams& r = p.recouple;
  const auto n = count_or(e, base, "n", r.n);
  if (n < 2 || n > kDefaultDenseCap) throw FieldError("/experiment/n", "must be in [2, 12]");
  r.n = static_cast<std::size_t>(n);
  r.k = e.contains("k") ? index_in(e, base, "k", r.n) : r.k;
  r.l = e.contains("l") ? index_in(e, base, "l", r.n) : r.l;
  if (r.k == r.l) throw FieldError("/experiment/l", "must differ from k");
  r.coupling = positive_or(e, base, "coupling", r.coupling);
  r.T = positive_or(e, base, "T", r.T);
  r.mode = super_mode(e, base);
  r.pi_train = pi_train(e, base, r.T);
  if (e.contains("evolve")) {
    if (!e.at("evolve").is_boolean()) throw FieldError("/experiment/evolve", "expected a boolean");
    r.evolve = e.at("evolve").get<bool>();
  }
  if (r.evolve && r.n > 10) throw FieldError("/experiment/n", "exact evolution supports at most 10 spins");
  r.duration = e.contains("duration") ? positive(e.at("duration"), "/experiment/duration") : 0.0;
  r.seeds = count_or(e, base, "seeds", r.seeds);
  if (r.evolve && r.seeds == 0) throw FieldError("/experiment/seeds", "must be >= 1");
  if (e.contains("offsets")) {
    r.offsets = number_list(e.at("offsets"), "/experiment/offsets");
    if (r.offsets.size() != r.n) throw FieldError("/experiment/offsets", "needs one value per spin");
  }
  r.seed = p.seed;
}

void plan_selectivity(const json& e, Plan& p) {
  const std::string base = "/experiment";
  p.sel_omega = positive(require(e, base, "omega_rf"), "/experiment/omega_rf");
  if (e.contains("ratios")) {
    for (double r : number_list(e.at("ratios"), "/experiment/ratios")) {
      if (r < 0.0) throw FieldError("/experiment/ratios", "ratios must be >= 0");
      p.sel_delta.push_back(r * p.sel_omega);
    }
  } else {
    p.sel_delta = number_list(require(e, base, "delta_omega"), "/experiment/delta_omega");
  }
  p.sel_duration = e.contains("duration") ? positive(e.at("duration"), "/experiment/duration") : 0.0;
}

void check_sizes(const Plan& p) {
  for (std::size_t i = 0; i < p.sequences.size(); ++i) {
    for (const auto& h : p.hamiltonians) {
      if (p.sequences[i].seq.min_spin_count() > h.op.spin_count()) {
        throw FieldError("/sequences/" + std::to_string(i),
                         "sequence addresses more spins than the Hamiltonian '" + h.label + "' has");
      }
    }
  }
}

Plan make_plan(const json& doc, const RunOptions& opt) {
  if (!doc.is_object()) throw FieldError("", "configuration must be a JSON object");
  Plan p;
  const json& e = require(doc, "", "experiment");
  if (!e.is_object()) throw FieldError("/experiment", "expected an object");
  p.type = string_of(require(e, "/experiment", "type"), "/experiment/type");
  bool known = false;
  for (const char* t : kExperimentTypes) known = known || p.type == t;
  if (!known) throw FieldError("/experiment/type", "unknown experiment type '" + p.type + "'");

  p.seed = opt.seed ? *opt.seed : count_or(doc, "", "seed", 1);
  p.threads = opt.threads ? *opt.threads : static_cast<unsigned>(count_or(doc, "", "threads", 0));

  const json output = doc.value("output", json::object());
  if (!output.is_object()) throw FieldError("/output", "expected an object");
  const bool tabular = p.type == "fidelity-scan" || p.type == "selectivity";
  p.format = output.contains("format") ? string_of(output.at("format"), "/output/format")
                                       : (tabular ? "csv" : "json");
  if (p.format != "csv" && p.format != "json") {
    throw FieldError("/output/format", "expected \"csv\" or \"json\"");
  }
  p.name = output.contains("name") ? string_of(output.at("name"), "/output/name") : p.type;
  if (p.name.empty() || p.name.find('/') != std::string::npos) {
    throw FieldError("/output/name", "must be a plain file stem");
  }
  if (opt.out_dir) {
    p.dir = *opt.out_dir;
  } else if (output.contains("dir")) {
    p.dir = string_of(output.at("dir"), "/output/dir");
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    p.dir = env;
  } else {
    p.dir = ".";
  }

  const std::optional<SpinSystem> system = build_system(doc);
  if (p.type == "fidelity-scan") {
    plan_scan(doc, e, p);
  } else if (p.type == "recoupling-check") {
    plan_recouple(e, p);
  } else if (p.type == "selectivity") {
    plan_selectivity(e, p);
  } else {
    p.sequences = build_sequences(doc, true);
    p.hamiltonians = build_hamiltonians(doc, system);
    p.tol = positive_or(e, "/experiment", "tol", p.tol);
    check_sizes(p);
  }
  return p;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string Diagnostic::str() const {
  return (path.empty() ? std::string("(document)") : path) + ": " + message;
}

RunConfig RunConfig::parse(std::string_view text) {
  try {
    return {json::parse(text)};
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config parse error at byte ") + std::to_string(e.byte) +
                           ": " + e.what());
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(read_text(path)); }

std::vector<Diagnostic> validate(const RunConfig& config) {
  std::vector<Diagnostic> out;
  try {
    make_plan(config.document, {});
  } catch (const FieldError& e) {
    out.push_back({e.path, e.what()});
  } catch (const std::exception& e) {
    out.push_back({"", e.what()});
  }
  return out;
}

RunOutcome run(const RunConfig& config, const RunOptions& options) {
  Plan p;
  try {
    p = make_plan(config.document, options);
  } catch (const FieldError& e) {
    throw std::invalid_argument(Diagnostic{e.path, e.what()}.str());
  }
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();

  RunOutcome outcome;
  std::string body;
  json metadata = json::object();
  bool ok = true;

  if (p.type == "fidelity-scan") {
    const ScanResult r = fidelity_scan(p.scan);
    metadata = r.metadata;
    body = p.format == "csv" ? scan_to_csv(r).str() : scan_to_json(r).dump(2) + "\n";
    outcome.summary.push_back("corner fidelity " + format_double(r.values(0, 0)));
  } else if (p.type == "recoupling-check") {
    const RecouplingReport r = recoupling_check(p.recouple);
    const auto lo = std::min(p.recouple.k, p.recouple.l);
    const auto hi = std::max(p.recouple.k, p.recouple.l);
    double factor = 0.0;
    double dkl = 0.0;
    bool target_exact = false;
    for (const auto& pc : r.pairs) {
      if (pc.a == lo && pc.b == hi) {
        dkl = p.recouple.coupling;
        factor = pc.effective.coefficient(SpinWord::pair(p.recouple.n, lo, Letter::X, hi, Letter::X)).real() / dkl;
        target_exact = pc.deviation_norm == 0.0;
      }
    }
    const bool spectators_zero = r.max_spectator_deviation() == 0.0;
    ok = target_exact && spectators_zero;
    json j = recoupling_to_json(r);
    j["recoupled_factor"] = factor;
    j["assertions"] = {{"target_is_8_9", target_exact}, {"spectators_zero", spectators_zero}};
    metadata = {{"experiment", "recoupling-check"}, {"T", p.recouple.T}, {"coupling", dkl}};
    if (p.format == "json") {
      body = j.dump(2) + "\n";
    } else {
      CsvTable t;
      t.header = {"a", "b", "deviation_norm"};
      for (const auto& pc : r.pairs) {
        t.rows.push_back({std::to_string(pc.a), std::to_string(pc.b), format_double(pc.deviation_norm)});
      }
      body = t.str();
    }
    outcome.summary.push_back("recoupled factor " + format_double(factor) + " (8/9 = " +
                              format_double(8.0 / 9.0) + ")" + (target_exact ? ", exact" : ", MISMATCH"));
    outcome.summary.push_back(std::string("spectator pairs ") + (spectators_zero ? "decoupled" : "NOT decoupled"));
    if (r.target_fidelity) outcome.summary.push_back("target fidelity " + format_double(*r.target_fidelity));
  } else if (p.type == "selectivity") {
    CsvTable t;
    t.header = {"delta_omega", "omega_rf", "predicted", "simulated", "rotation_angle", "envelope"};
    json arr = json::array();
    for (double d : p.sel_delta) {
      const SelectivityResult s = selectivity_error(d, p.sel_omega, p.sel_duration);
      t.rows.push_back({format_double(d), format_double(p.sel_omega), format_double(s.predicted),
                        format_double(s.simulated), format_double(s.rotation_angle),
                        format_double(s.envelope)});
      arr.push_back({{"delta_omega", d}, {"omega_rf", p.sel_omega}, {"predicted", s.predicted},
                     {"simulated", s.simulated}, {"rotation_angle", s.rotation_angle},
                     {"envelope", s.envelope}});
    }
    body = p.format == "csv" ? t.str() : arr.dump(2) + "\n";
    metadata = {{"experiment", "selectivity"}};
  } else if (p.type == "symmetry-check") {
    CsvTable t;
    t.header = {"sequence", "hamiltonian", "average_norm", "magnus1_norm", "average_relative",
                "magnus1_relative", "average_vanishes", "magnus1_vanishes"};
    json arr = json::array();
    for (const auto& s : p.sequences) {
      for (const auto& h : p.hamiltonians) {
        const SymmetryReport r = symmetry_order_check(s.seq, h.op, p.tol);
        t.rows.push_back({s.label, h.label, format_double(r.average_norm), format_double(r.magnus1_norm),
                          format_double(r.average_relative), format_double(r.magnus1_relative),
                          r.average_vanishes ? "1" : "0", r.magnus1_vanishes ? "1" : "0"});
        arr.push_back({{"sequence", s.label}, {"hamiltonian", h.label},
                       {"average_norm", r.average_norm}, {"magnus1_norm", r.magnus1_norm},
                       {"average_relative", r.average_relative},
                       {"magnus1_relative", r.magnus1_relative},
                       {"average_vanishes", r.average_vanishes},
                       {"magnus1_vanishes", r.magnus1_vanishes}});
      }
    }
    body = p.format == "csv" ? t.str() : json{{"results", arr}}.dump(2) + "\n";
    metadata = {{"experiment", "symmetry-check"}, {"tol", p.tol}};
  } else {
    CsvTable t;
    t.header = {"sequence", "hamiltonian", "word", "re", "im"};
    json arr = json::array();
    for (const auto& s : p.sequences) {
      for (const auto& h : p.hamiltonians) {
        const OperatorSum avg = average0(s.seq, h.op);
        arr.push_back({{"sequence", s.label}, {"hamiltonian", h.label}, {"average", operator_to_json(avg)}});
        for (const auto& [w, c] : avg.terms()) {
          t.rows.push_back({s.label, h.label, w.str(), format_double(c.real()), format_double(c.imag())});
        }
        outcome.summary.push_back(s.label + " | " + h.label + " -> " + avg.str());
      }
    }
    body = p.format == "csv" ? t.str() : json{{"results", arr}}.dump(2) + "\n";
    metadata = {{"experiment", "average"}};
  }

  outcome.result_file = p.dir / (p.name + "." + p.format);
  outcome.manifest_file = p.dir / (p.name + ".manifest.json");
  write_text(outcome.result_file, body);

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const json manifest = {
      {"tool", "ahtsim"},
      {"version", kVersion},
      {"compiler", __VERSION__},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                    "." + std::to_string(EIGEN_MINOR_VERSION)},
      {"config", config.document},
      {"seed", p.seed},
      {"threads", p.threads},
      {"started_utc", started_utc},
      {"wall_time_s", wall},
      {"result_file", outcome.result_file.filename().string()},
      {"metadata", metadata},
  };
  write_text(outcome.manifest_file, manifest.dump(2) + "\n");
  if (!ok) throw std::runtime_error("recoupling assertions failed; see " + outcome.result_file.string());
  return outcome;
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() { return {"fig2", "table1", "recouple3", "mrev16-offsets"}; }

RunConfig preset(std::string_view name) {
  if (name == "fig2") {
    return {json{
        {"seed", 1},
        {"experiment",
         {{"type", "fidelity-scan"},
          {"tau", 1e-6},
          {"tau_D", {{"min", 1e-4}, {"max", 1e-1}, {"count", 16}}},
          {"tau_dw", {{"min", 1e-3}, {"max", 1.0}, {"count", 16}}},
          {"seeds", 3},
          {"phase", 0.7},
          {"amplitude_ratio", 0.01}}},
        {"sequence", {{"notation", std::string(kMrev16Notation)}, {"tau", 1e-6}}},
        {"dt", {{"fraction", 0.05}, {"scale", 1.0}}},
        {"output", {{"name", "fig2"}, {"format", "csv"}}},
    }};
  }
  if (name == "table1") {
    json seqs = json::array();
    for (const char* a : {"-", "X", "Y", "Z"}) {
      for (const char* b : {"-", "X", "Y", "Z"}) {
        seqs.push_back({{"builder", "w"}, {"axes", {a, b}}, {"T", 1.0}});
      }
    }
    return {json{
        {"experiment", {{"type", "average"}}},
        {"sequences", seqs},
        {"hamiltonian", {{"label", "H_D(k,l), D = 1"}, {"n", 2}, {"terms", {{"ZZ", 2.0}, {"XX", -1.0}, {"YY", -1.0}}}}},
        {"output", {{"name", "table1"}, {"format", "json"}}},
    }};
  }
  if (name == "recouple3") {
    return {json{
        {"seed", 1},
        {"experiment",
         {{"type", "recoupling-check"}, {"n", 3}, {"k", 0}, {"l", 1}, {"coupling", 1.0},
          {"T", 1e-3}, {"mode", "symmetrized"}, {"pi_train", "idealized"}, {"seeds", 3}}},
        {"output", {{"name", "recouple3"}, {"format", "json"}}},
    }};
  }
  if (name == "mrev16-offsets") {
    return {json{
        {"experiment", {{"type", "average"}}},
        {"sequence", {{"builder", "mrev16"}, {"tau", 1.0}}},
        {"hamiltonians",
         {{{"label", "Iz"}, {"n", 1}, {"terms", {{"Z", 1.0}}}},
          {{"label", "Ix"}, {"n", 1}, {"terms", {{"X", 1.0}}}},
          {{"label", "Iy"}, {"n", 1}, {"terms", {{"Y", 1.0}}}}}},
        {"output", {{"name", "mrev16-offsets"}, {"format", "json"}}},
    }};
  }
  throw std::out_of_range("unknown preset '" + std::string(name) + "'");
}

}  // namespace ahtsim
