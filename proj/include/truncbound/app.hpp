#pragma once

// Command implementations behind the truncbound CLI. Each command takes a
// resolved RunConfig and returns a JSON report plus an exit code; the
// executable only parses flags, prints, and maps exceptions.

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "truncbound/adapt.hpp"
#include "truncbound/bounds.hpp"
#include "truncbound/censor.hpp"
#include "truncbound/error.hpp"
#include "truncbound/io.hpp"
#include "truncbound/kernel.hpp"
#include "truncbound/models.hpp"
#include "truncbound/representation.hpp"

namespace truncbound::app {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitVerifyFailed = 4,
  kExitBudgetExhausted = 5,
};

inline int exit_code_for(ErrorCode c) {
  return is_numerical(c) ? kExitNumeric : kExitConfig;
}

inline json error_json(ErrorCode code, const std::string& message) {
  return {{"error",
           {{"code", std::string(error_code_name(code))}, {"message", message}}}};
}

// ---------------------------------------------------------------------------
// Configuration

/// A state set given either as "labels with level < radius" or explicitly.
using SetSpec = std::variant<std::int64_t, std::vector<Label>>;

struct RunConfig {
  std::optional<ModelSpec> model;
  std::optional<std::string> matrix_file;
  std::optional<std::string> labels_file;
  std::optional<SetSpec> inner;
  std::optional<SetSpec> window;
  std::string reward = "constant:1";
  std::optional<std::string> reward_file;
  double eps = 1e-3;
  std::size_t budget = 500;
  std::optional<std::string> output_dir;
  bool write_nu_csv = false;
};

namespace detail {

inline SetSpec set_spec_from_json(const json& j, const char* what) {
  if (j.is_array()) return io::labels_from_json(j);
  if (j.is_object() && j.contains("radius") && !j.contains("labels")) {
    const auto& r = j.at("radius");
    if (!r.is_number_integer() || r.get<std::int64_t>() < 1)
      fail(ErrorCode::ConfigInvalid, std::string(what) + ".radius must be an integer >= 1");
    return r.get<std::int64_t>();
  }
  if (j.is_object() && j.contains("labels") && !j.contains("radius"))
    return io::labels_from_json(j.at("labels"));
  fail(ErrorCode::ConfigInvalid,
       std::string(what) + " must be a label array, {\"radius\": r} or {\"labels\": [...]}");
}

inline std::string resolve_path(const std::string& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return p;
  return (std::filesystem::path(base) / path).string();
}

}  // namespace detail

/// Reads a RunConfig. Relative file paths resolve against `base_dir`.
inline RunConfig parse_config(const json& j, const std::string& base_dir = "") {
  if (!j.is_object()) fail(ErrorCode::ConfigInvalid, "config must be a JSON object");
  static const std::vector<std::string> known = {
      "model", "matrix_file", "labels_file", "S",           "A",
      "reward", "reward_file", "eps",        "budget",      "output_dir",
      "write_nu_csv"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      fail(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");

  RunConfig c;
  try {
    if (j.contains("model")) c.model = io::model_from_json(j.at("model"));
    if (j.contains("matrix_file"))
      c.matrix_file = detail::resolve_path(base_dir, j.at("matrix_file").get<std::string>());
    if (j.contains("labels_file"))
      c.labels_file = detail::resolve_path(base_dir, j.at("labels_file").get<std::string>());
    if (j.contains("S")) c.inner = detail::set_spec_from_json(j.at("S"), "S");
    if (j.contains("A")) c.window = detail::set_spec_from_json(j.at("A"), "A");
    if (j.contains("reward")) c.reward = j.at("reward").get<std::string>();
    if (j.contains("reward_file"))
      c.reward_file = detail::resolve_path(base_dir, j.at("reward_file").get<std::string>());
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("budget")) {
      const auto b = j.at("budget").get<std::int64_t>();
      if (b < 0) fail(ErrorCode::ConfigInvalid, "budget must be >= 0");
      c.budget = static_cast<std::size_t>(b);
    }
    if (j.contains("output_dir"))
      c.output_dir = detail::resolve_path(base_dir, j.at("output_dir").get<std::string>());
    if (j.contains("write_nu_csv")) c.write_nu_csv = j.at("write_nu_csv").get<bool>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
  if (c.model.has_value() == c.matrix_file.has_value())
    fail(ErrorCode::ConfigInvalid, "exactly one of 'model' and 'matrix_file' is required");
  if (c.labels_file && !c.matrix_file)
    fail(ErrorCode::ConfigInvalid, "'labels_file' requires 'matrix_file'");
  if (!c.inner) fail(ErrorCode::ConfigInvalid, "missing inner set 'S'");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) fail(ErrorCode::ConfigInvalid, "eps must lie in (0, 1]");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  const json j = io::read_json(path);
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

// ---------------------------------------------------------------------------
// Resolution of windows, inner sets and rewards

struct Problem {
  StateSpace window;
  SparseKernel window_kernel;
  std::vector<Label> inner;
};

namespace detail {

inline std::vector<Label> labels_below(const std::vector<Label>& labels, std::int64_t radius) {
  std::vector<Label> out;
  for (const auto& l : labels)
    if (level(l) < radius) out.push_back(l);
  return out;
}

inline std::vector<Label> resolve_model_set(const ModelSpec& m, const SetSpec& spec) {
  if (const auto* r = std::get_if<std::int64_t>(&spec)) return radius_states(m, *r).labels();
  const auto& labels = std::get<std::vector<Label>>(spec);
  for (const auto& l : labels)
    if (!is_valid_state(m, l))
      fail(ErrorCode::ConfigInvalid, to_string(l) + " is not a state of the model");
  return labels;
}

inline std::vector<Label> resolve_listed_set(const StateSpace& space, const SetSpec& spec,
                                             ErrorCode missing) {
  if (const auto* r = std::get_if<std::int64_t>(&spec))
    return labels_below(space.labels(), *r);
  const auto& labels = std::get<std::vector<Label>>(spec);
  for (const auto& l : labels)
    if (!space.contains(l)) fail(missing, to_string(l) + " is not a state of the input matrix");
  return labels;
}

}  // namespace detail

/// Materializes the window kernel P*_A and the inner label set S.
inline Problem resolve_problem(const RunConfig& c) {
  Problem p;
  if (c.model) {
    if (!c.window) fail(ErrorCode::ConfigInvalid, "model input needs a window 'A'");
    p.window = StateSpace(detail::resolve_model_set(*c.model, *c.window));
    p.window_kernel = window_kernel(*c.model, p.window);
    p.inner = detail::resolve_model_set(*c.model, *c.inner);
  } else {
    io::LabeledKernel lk = io::read_labeled_kernel(*c.matrix_file, c.labels_file);
    p.inner = detail::resolve_listed_set(lk.space, *c.inner, ErrorCode::ConfigSNotInA);
    if (c.window) {
      p.window = StateSpace(
          detail::resolve_listed_set(lk.space, *c.window, ErrorCode::ConfigInvalid));
      p.window_kernel =
          restrict_to(lk.kernel, lk.space.indices_of(p.window.labels()),
                      lk.space.indices_of(p.window.labels()));
    } else {
      p.window = lk.space;
      p.window_kernel = lk.kernel;
    }
  }
  if (p.inner.empty()) fail(ErrorCode::ConfigInvalid, "inner set S is empty");
  for (const auto& l : p.inner)
    if (!p.window.contains(l))
      fail(ErrorCode::ConfigSNotInA, "state " + to_string(l) + " of S is outside A");
  return p;
}

/// Evaluates a builtin reward ("constant:<c>", "coordinate:<i>",
/// "indicator:<l1>;<l2>;..." with label coordinates separated by ',') or a
/// JSON array file on the inner states.
inline std::vector<double> resolve_reward(const RunConfig& c, const StateSpace& inner) {
  if (c.reward_file) {
    const json j = io::read_json(*c.reward_file);
    if (!j.is_array()) fail(ErrorCode::ConfigInvalid, "reward file must hold a JSON array");
    std::vector<double> r;
    try {
      r = j.get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ConfigInvalid, std::string("reward file: ") + e.what());
    }
    if (r.size() != inner.size())
      fail(ErrorCode::ConfigInvalid, "reward file has " + std::to_string(r.size()) +
                                         " values for " + std::to_string(inner.size()) +
                                         " inner states");
    return r;
  }
  const auto colon = c.reward.find(':');
  if (colon == std::string::npos)
    fail(ErrorCode::ConfigInvalid, "reward '" + c.reward + "' lacks a ':'");
  const std::string kind = c.reward.substr(0, colon);
  const std::string arg = c.reward.substr(colon + 1);
  auto parse_number = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used == text.size()) return v;
    } catch (const std::logic_error&) {
    }
    fail(ErrorCode::ConfigInvalid, "reward '" + c.reward + "': bad number '" + text + "'");
  };

  std::vector<double> r(inner.size(), 0.0);
  if (kind == "constant") {
    std::fill(r.begin(), r.end(), parse_number(arg));
  } else if (kind == "coordinate") {
    const double i = parse_number(arg);
    if (i < 0 || std::floor(i) != i || static_cast<std::size_t>(i) >= inner.arity())
      fail(ErrorCode::ConfigInvalid, "reward coordinate out of range");
    for (std::size_t x = 0; x < inner.size(); ++x)
      r[x] = static_cast<double>(inner.label(x)[static_cast<std::size_t>(i)]);
  } else if (kind == "indicator") {
    std::stringstream labels(arg);
    std::string item;
    while (std::getline(labels, item, ';')) {
      Label l;
      std::stringstream coords(item);
      std::string coord;
      while (std::getline(coords, coord, ','))
        l.push_back(static_cast<std::int64_t>(parse_number(coord)));
      if (auto x = inner.find(l)) r[*x] = 1.0;
    }
  } else {
    fail(ErrorCode::ConfigInvalid, "unknown reward kind '" + kind + "'");
  }
  return r;
}

// ---------------------------------------------------------------------------
// bounds / nu

struct BoundsReportFile {
  int schema_version = kSchemaVersion;
  std::size_t inner_size = 0;
  std::size_t boundary_size = 0;
  std::size_t window_size = 0;
  double g_min = 0.0;
  double g_max = 0.0;
  std::string reward_spec;
  double reward_lower = 0.0;
  double reward_upper = 0.0;
  Label reward_argmin;
  Label reward_argmax;
  double tv_diameter = 0.0;
  Label tv_witness_x;
  Label tv_witness_y;
  std::optional<double> interior_min_pivot;
  std::size_t interior_factor_nonzeros = 0;
  double fundamental_min_pivot = 0.0;
  double fundamental_residual = 0.0;
  std::optional<std::map<std::string, double>> timings_ms;

  bool operator==(const BoundsReportFile&) const = default;
};

inline json to_json(const BoundsReportFile& r) {
  json j{
      {"schema_version", r.schema_version},
      {"command", "bounds"},
      {"truncation",
       {{"inner_size", r.inner_size},
        {"boundary_size", r.boundary_size},
        {"window_size", r.window_size}}},
      {"g", {{"min", r.g_min}, {"max", r.g_max}}},
      {"reward",
       {{"spec", r.reward_spec},
        {"lower", r.reward_lower},
        {"upper", r.reward_upper},
        {"argmin", r.reward_argmin},
        {"argmax", r.reward_argmax}}},
      {"tv", {{"diameter", r.tv_diameter}, {"witness", {r.tv_witness_x, r.tv_witness_y}}}},
      {"solver",
       {{"interior_min_pivot",
         r.interior_min_pivot ? json(*r.interior_min_pivot) : json(nullptr)},
        {"interior_factor_nonzeros", r.interior_factor_nonzeros},
        {"fundamental_min_pivot", r.fundamental_min_pivot},
        {"fundamental_residual", r.fundamental_residual}}},
  };
  if (r.timings_ms) j["timings_ms"] = *r.timings_ms;
  return j;
}

inline BoundsReportFile bounds_report_from_json(const json& j) {
  BoundsReportFile r;
  try {
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion)
      fail(ErrorCode::ParseError, "unsupported schema_version " + std::to_string(r.schema_version));
    const auto& t = j.at("truncation");
    r.inner_size = t.at("inner_size").get<std::size_t>();
    r.boundary_size = t.at("boundary_size").get<std::size_t>();
    r.window_size = t.at("window_size").get<std::size_t>();
    r.g_min = j.at("g").at("min").get<double>();
    r.g_max = j.at("g").at("max").get<double>();
    const auto& rw = j.at("reward");
    r.reward_spec = rw.at("spec").get<std::string>();
    r.reward_lower = rw.at("lower").get<double>();
    r.reward_upper = rw.at("upper").get<double>();
    r.reward_argmin = rw.at("argmin").get<Label>();
    r.reward_argmax = rw.at("argmax").get<Label>();
    r.tv_diameter = j.at("tv").at("diameter").get<double>();
    r.tv_witness_x = j.at("tv").at("witness").at(0).get<Label>();
    r.tv_witness_y = j.at("tv").at("witness").at(1).get<Label>();
    const auto& s = j.at("solver");
    if (!s.at("interior_min_pivot").is_null())
      r.interior_min_pivot = s.at("interior_min_pivot").get<double>();
    r.interior_factor_nonzeros = s.at("interior_factor_nonzeros").get<std::size_t>();
    r.fundamental_min_pivot = s.at("fundamental_min_pivot").get<double>();
    r.fundamental_residual = s.at("fundamental_residual").get<double>();
    if (j.contains("timings_ms"))
      r.timings_ms = j.at("timings_ms").get<std::map<std::string, double>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bounds report: ") + e.what());
  }
  return r;
}

struct PipelineResult {
  TruncationSpec spec;
  CensoredKernel censored;
  FundamentalStats fundamental;
  NuTable nu;
  std::map<std::string, double> timings_ms;
};

inline PipelineResult run_pipeline(const Problem& p) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };
  const auto t0 = clock::now();
  TruncationSpec spec(p.window, p.inner);
  CensoredKernel ck = censor(p.window_kernel, spec);
  const auto t1 = clock::now();
  FundamentalStats fs;
  RowMatrix n = fundamental_rows(ck, &fs);
  NuTable nt = nu_table(n);
  const auto t2 = clock::now();
  return {spec, std::move(ck), fs, std::move(nt), {{"censor", ms(t0, t1)}, {"fundamental", ms(t1, t2)}}};
}

struct CommandResult {
  int exit_code = kExitOk;
  json report;
  std::vector<std::string> warnings;
};

struct CommandOptions {
  /// Drop wall-clock timings so that reports are byte-identical across runs.
  bool normalize_report = false;
};

inline BoundsReportFile compute_bounds(const RunConfig& c, const CommandOptions& opt,
                                       std::optional<PipelineResult>* keep = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  const Problem problem = resolve_problem(c);
  PipelineResult pr = run_pipeline(problem);
  const StateSpace& inner = pr.spec.inner();
  const auto t_bounds = std::chrono::steady_clock::now();
  const auto reward = resolve_reward(c, inner);
  const RewardBounds rb = reward_bounds(pr.nu, reward);
  const TvReport tv = tv_diameter(pr.nu);
  const auto end = std::chrono::steady_clock::now();

  BoundsReportFile r;
  r.inner_size = inner.size();
  r.boundary_size = pr.spec.boundary_size();
  r.window_size = pr.spec.window().size();
  r.g_min = *std::min_element(pr.nu.g.begin(), pr.nu.g.end());
  r.g_max = *std::max_element(pr.nu.g.begin(), pr.nu.g.end());
  r.reward_spec = c.reward_file ? "file:" + *c.reward_file : c.reward;
  r.reward_lower = rb.lower;
  r.reward_upper = rb.upper;
  r.reward_argmin = inner.label(rb.argmin);
  r.reward_argmax = inner.label(rb.argmax);
  r.tv_diameter = tv.diameter;
  r.tv_witness_x = inner.label(tv.x);
  r.tv_witness_y = inner.label(tv.y);
  if (pr.censored.stats.boundary_size > 0) r.interior_min_pivot = pr.censored.stats.min_pivot;
  r.interior_factor_nonzeros = pr.censored.stats.factor_nonzeros;
  r.fundamental_min_pivot = pr.fundamental.min_pivot;
  r.fundamental_residual = pr.fundamental.residual;
  if (!opt.normalize_report) {
    auto t = pr.timings_ms;
    t["bounds"] = std::chrono::duration<double, std::milli>(end - t_bounds).count();
    t["total"] = std::chrono::duration<double, std::milli>(end - start).count();
    r.timings_ms = std::move(t);
  }
  if (keep) keep->emplace(std::move(pr));
  return r;
}

inline std::string nu_csv(const PipelineResult& pr) {
  std::ostringstream out;
  io::write_nu_csv(out, pr.spec.inner(), pr.nu);
  return out.str();
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create '" + dir + "': " + ec.message());
}

/// `bounds`: reward interval and nu-diameter for the configured truncation.
/// Writes bounds_report.json (and nu.csv when requested) into output_dir.
inline CommandResult cmd_bounds(const RunConfig& c, const CommandOptions& opt = {}) {
  std::optional<PipelineResult> pipeline;
  BoundsReportFile r = compute_bounds(c, opt, c.write_nu_csv ? &pipeline : nullptr);
  CommandResult out{kExitOk, to_json(r), {}};
  if (c.output_dir) {
    ensure_dir(*c.output_dir);
    io::write_text(*c.output_dir + "/bounds_report.json", out.report.dump(2) + "\n");
    if (c.write_nu_csv) io::write_text(*c.output_dir + "/nu.csv", nu_csv(*pipeline));
  }
  return out;
}

enum class NuFormat { Csv, MatrixMarket };

/// `nu`: the nu table only, as CSV or Matrix Market text.
inline std::string cmd_nu(const RunConfig& c, NuFormat format) {
  const PipelineResult pr = run_pipeline(resolve_problem(c));
  std::string text;
  if (format == NuFormat::Csv) {
    text = nu_csv(pr);
  } else {
    std::ostringstream out;
    io::write_matrix_market(out, pr.nu.nu);
    text = out.str();
  }
  if (c.output_dir) {
    ensure_dir(*c.output_dir);
    io::write_text(*c.output_dir + (format == NuFormat::Csv ? "/nu.csv" : "/nu.mtx"), text);
  }
  return text;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOptions {
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  /// Negative control: reverse every nu row before the checks run.
  bool corrupt_nu = false;
};

struct VerifyThresholds {
  double forward = 1e-8;
  double backward_row = 1e-12;
  double backward_stationarity = 1e-10;
  double roundtrip = 1e-8;
};

namespace detail {

inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return std::mt19937_64(seq);
}

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Flat Dirichlet draw.
inline Distribution random_distribution(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& v : w) {
    v = -std::log1p(-unit_uniform(rng));
    total += v;
  }
  for (auto& v : w) v /= total;
  return Distribution(std::move(w));
}

inline std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng() % i]);
  return p;
}

}  // namespace detail

/// Full finite chain for `verify`.
inline io::LabeledKernel resolve_finite_chain(const RunConfig& c) {
  if (c.model) {
    const auto n = finite_size(*c.model);
    if (!n)
      fail(ErrorCode::ConfigInvalid,
           "verify needs a finite chain; " + family_name(c.model->family) + " is infinite");
    StateSpace space = radius_states(*c.model, static_cast<std::int64_t>(*n));
    SparseKernel k = window_kernel(*c.model, space).with_kind(KernelKind::Stochastic);
    return {std::move(space), std::move(k)};
  }
  io::LabeledKernel lk = io::read_labeled_kernel(*c.matrix_file, c.labels_file);
  lk.kernel = lk.kernel.with_kind(KernelKind::Stochastic);
  return lk;
}

struct TrialOutcome {
  double forward = 0.0;
  double backward_row = 0.0;
  double backward_stationarity = 0.0;
  double roundtrip = 0.0;
  bool dominating = true;
  std::optional<std::string> error;
};

/// One draw of the round-trip suite: a random inner set S and a window
/// S <= A < S*, G censored on A, P the exact censored chain on S.
inline TrialOutcome run_verify_trial(const SparseKernel& chain, const Distribution& pi_star,
                                     std::uint64_t seed, std::uint64_t trial, bool corrupt) {
  TrialOutcome out;
  auto rng = detail::trial_rng(seed, trial);
  const std::size_t n = chain.rows();
  const auto perm = detail::random_permutation(rng, n);
  const std::size_t s_size = 1 + rng() % (n - 1);
  const std::size_t extra = rng() % (n - s_size);
  IndexSet s(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s_size));
  IndexSet a(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(s_size + extra));
  std::sort(s.begin(), s.end());
  std::sort(a.begin(), a.end());

  try {
    const StateSpace all = StateSpace::range(n);
    std::vector<Label> s_labels;
    for (Index x : s) s_labels.push_back(all.label(x));
    std::vector<Label> a_labels;
    for (Index x : a) a_labels.push_back(all.label(x));

    const SparseKernel p = censor(chain, TruncationSpec(all, s_labels)).G.with_kind(KernelKind::Stochastic);
    const CensoredKernel g =
        censor(restrict_to(chain, a, a), TruncationSpec(StateSpace(a_labels), s_labels));
    NuTable nt = nu_table(fundamental_rows(g));
    if (corrupt)
      for (Eigen::Index x = 0; x < nt.nu.rows(); ++x) nt.nu.row(x).reverseInPlace();

    const Distribution pi = conditional_distribution(pi_star, s);
    const ForwardResult fwd = forward_map(p, g, pi);
    out.forward = l1_distance(mixture(fwd.eta, nt).weights(), pi.weights());

    const Distribution gamma = detail::random_distribution(rng, s.size());
    const BackwardResult bwd = backward_map(gamma, g, nt);
    out.backward_row = validate_kernel(bwd.P, KernelKind::Stochastic).max_violation;
    out.dominating = dominates(bwd.P, g.G);
    out.backward_stationarity = stationarity_residual(bwd.mu, bwd.P);

    const ForwardResult again = forward_map(bwd.P, g, bwd.mu);
    out.roundtrip = l1_distance(mixture(again.eta, nt).weights(), bwd.mu.weights());
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

/// `verify`: forward and backward representation round trips on random
/// truncations of a finite chain. Exit 4 when any residual exceeds its
/// threshold; the failing seed and trial are echoed in the report.
inline CommandResult cmd_verify(const RunConfig& c, const VerifyOptions& opt,
                                const VerifyThresholds& th = {}) {
  CommandResult result;
  json report{{"schema_version", kSchemaVersion},
              {"command", "verify"},
              {"trials", opt.trials},
              {"seed", opt.seed}};
  const io::LabeledKernel chain = resolve_finite_chain(c);
  if (chain.space.size() < 2)
    fail(ErrorCode::ConfigInvalid, "verify needs at least two states");
  require_valid(chain.kernel, KernelKind::Stochastic);
  if (opt.trials == 0) result.warnings.push_back("trials = 0: nothing verified");

  const Distribution pi_star = opt.trials ? stationary_oracle(chain.kernel) : Distribution::point_mass(1, 0);
  TrialOutcome worst;
  std::optional<std::uint64_t> failing;
  std::optional<std::string> failing_error;
  for (std::uint64_t t = 0; t < opt.trials; ++t) {
    const TrialOutcome o = run_verify_trial(chain.kernel, pi_star, opt.seed, t, opt.corrupt_nu);
    worst.forward = std::max(worst.forward, o.forward);
    worst.backward_row = std::max(worst.backward_row, o.backward_row);
    worst.backward_stationarity = std::max(worst.backward_stationarity, o.backward_stationarity);
    worst.roundtrip = std::max(worst.roundtrip, o.roundtrip);
    worst.dominating = worst.dominating && o.dominating;
    const bool bad = o.error || !(o.forward <= th.forward) ||
                     !(o.backward_row <= th.backward_row) ||
                     !(o.backward_stationarity <= th.backward_stationarity) ||
                     !(o.roundtrip <= th.roundtrip) || !o.dominating;
    if (bad && !failing) {
      failing = t;
      failing_error = o.error;
    }
  }
  report["max_residuals"] = {{"forward_mixture_l1", worst.forward},
                             {"backward_row_sum", worst.backward_row},
                             {"backward_stationarity_l1", worst.backward_stationarity},
                             {"roundtrip_mixture_l1", worst.roundtrip}};
  report["thresholds"] = {{"forward_mixture_l1", th.forward},
                          {"backward_row_sum", th.backward_row},
                          {"backward_stationarity_l1", th.backward_stationarity},
                          {"roundtrip_mixture_l1", th.roundtrip}};
  report["all_dominating"] = worst.dominating;
  report["passed"] = !failing.has_value();
  if (failing) {
    report["failure"] = {{"seed", opt.seed}, {"trial", *failing}};
    if (failing_error) report["failure"]["error"] = *failing_error;
    result.exit_code = kExitVerifyFailed;
  }
  if (!result.warnings.empty()) report["warnings"] = result.warnings;
  result.report = std::move(report);
  return result;
}

// ---------------------------------------------------------------------------
// adapt

inline json to_json(const AdaptReport& r, double eps, std::size_t budget) {
  const StateSpace& inner = r.final_spec.inner();
  json traj = json::array();
  for (const auto& s : r.trajectory)
    traj.push_back({{"window_size", s.window_size},
                    {"boundary_size", s.boundary_size},
                    {"diameter", s.tv.diameter},
                    {"witness", {inner.label(s.tv.x), inner.label(s.tv.y)}}});
  json j{{"schema_version", kSchemaVersion},
         {"command", "adapt"},
         {"eps", eps},
         {"budget", budget},
         {"policy", "one_hop"},
         {"converged", r.converged},
         {"status", r.converged ? "converged" : "budget_exhausted"},
         {"trajectory", traj}};
  if (r.trajectory.empty()) {
    j["final"] = {{"window_size", r.final_spec.window().size()}, {"diameter", nullptr}};
  } else {
    j["final"] = {{"window_size", r.trajectory.back().window_size},
                  {"diameter", r.trajectory.back().tv.diameter}};
  }
  j["final_window"] = io::labels_to_json(r.final_spec.window().labels());
  return j;
}

/// `adapt`: grow the boundary layer until the diameter reaches eps. Exit 5
/// when the budget runs out first.
inline CommandResult cmd_adapt(const RunConfig& c, std::optional<AdaptReport>* keep = nullptr) {
  if (!c.model) fail(ErrorCode::ConfigInvalid, "adapt needs a model input");
  const auto inner = detail::resolve_model_set(*c.model, *c.inner);
  std::optional<StateSpace> initial;
  if (c.window) initial = StateSpace(detail::resolve_model_set(*c.model, *c.window));
  if (initial)
    for (const auto& l : inner)
      if (!initial->contains(l))
        fail(ErrorCode::ConfigSNotInA, "state " + to_string(l) + " of S is outside A");
  AdaptReport r = adapt_boundary(*c.model, inner, c.eps, GrowthPolicy::OneHop, c.budget, initial);
  CommandResult out{r.converged ? kExitOk : kExitBudgetExhausted, to_json(r, c.eps, c.budget), {}};
  if (c.output_dir) {
    ensure_dir(*c.output_dir);
    io::write_text(*c.output_dir + "/adapt_report.json", out.report.dump(2) + "\n");
  }
  if (keep) keep->emplace(std::move(r));
  return out;
}

}  // namespace truncbound::app
