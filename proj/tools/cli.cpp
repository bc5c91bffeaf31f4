// cli.cpp
#include "cli.hpp"

#include <CLI11.hpp>
#include <rapidjson/document.h>
#include <rapidjson/stringbuffer.h>
#include <rapidjson/writer.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>
#include <variant>

#include "coamp/coamp.h"

namespace coamp_cli {

namespace {

struct HelpRequested {
  std::string text;
};

// A C API call that failed; carries the status for exit-code mapping.
struct ApiError : std::runtime_error {
  coamp_status status;
  ApiError(coamp_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(coamp_status s) {
  if (s != COAMP_OK) throw ApiError(s, coamp_last_error());
}

int exit_code_for(coamp_status s) {
  switch (s) {
    case COAMP_ERR_INVALID_ARGUMENT:
    case COAMP_ERR_DIMENSION_MISMATCH:
    case COAMP_ERR_DIMENSION_OVERFLOW:
      return kExitUsage;
    case COAMP_ERR_INCONCLUSIVE:
      return kExitInconclusive;
    default:
      return kExitFailure;
  }
}

struct SubSpec {
  std::string help;
  std::vector<std::string> allowed;
  std::vector<std::string> required;
};

const std::map<std::string, SubSpec>& specs() {
  static const std::map<std::string, SubSpec> table = {
      {"feasible",
       {"exact two-state deterministic feasibility",
        {"alpha1", "alpha2", "eta", "g1", "g2"},
        {"alpha1", "alpha2", "eta", "g1", "g2"}}},
      {"envelope",
       {"gain-only envelope on the relative phase", {"eta", "g1", "g2"}, {"eta", "g1", "g2"}}},
      {"max-gain",
       {"largest equal-output-amplitude gain",
        {"alpha1", "alpha2", "eta"},
        {"alpha1", "alpha2", "eta"}}},
      {"pi",
       {"deterministic witness matrix",
        {"alpha1", "alpha2", "eta", "g1", "g2", "tol"},
        {"alpha1", "alpha2", "eta", "g1", "g2"}}},
      {"dykstra",
       {"probabilistic witness search (--p value, list or 'max')",
        {"alpha1", "alpha2", "eta", "g1", "g2", "p", "max-iters", "tol"},
        {"alpha1", "alpha2", "eta", "g1", "g2", "p"}}},
      {"kraus",
       {"build and verify Kraus operators",
        {"alpha1", "alpha2", "eta", "g1", "g2", "p", "epsilon"},
        {"alpha1", "alpha2", "eta", "g1", "g2"}}},
      {"verify",
       {"verify a Kraus bundle (--input) or a freshly built set",
        {"input", "alpha1", "alpha2", "eta", "g1", "g2", "p", "epsilon"},
        {}}},
      {"wigner",
       {"Wigner function grid of one coherent state",
        {"alpha1", "phase", "resolution", "window"},
        {"alpha1"}}},
      {"channel",
       {"distances of plain and amplified pairs under pure loss",
        {"alpha1", "alpha2", "eta", "g1", "g2", "gamma", "time"},
        {"alpha1", "alpha2", "eta", "gamma", "time"}}},
      {"detector",
       {"on/off detector and Helstrom discrimination errors",
        {"alpha1", "alpha2", "eta", "dark", "efficiency", "prior"},
        {"alpha1", "alpha2"}}},
      {"sweep",
       {"feasibility over a parameter grid (--grid axis:min:max:steps)",
        {"alpha1", "alpha2", "eta", "g1", "g2"},
        {}}},
  };
  return table;
}

const std::set<std::string> kCommonKeys = {"format", "output", "seed"};

std::string shortest(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// Fixed output format: 17 significant digits, lowercase e-notation.
std::string fmt(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 16);
  return std::string(buf.data(), res.ptr);
}

void load_config(const std::string& path, const SubSpec& spec, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UsageError("--config: cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  rapidjson::Document doc;
  doc.Parse<rapidjson::kParseFullPrecisionFlag>(text.c_str(), text.size());
  if (doc.HasParseError() || !doc.IsObject()) {
    throw UsageError("--config: '" + path + "' is not a JSON object");
  }
  const std::set<std::string> allowed(spec.allowed.begin(), spec.allowed.end());
  auto scalar = [&](const std::string& key, const rapidjson::Value& v) -> std::string {
    if (v.IsString()) return v.GetString();
    if (v.IsNumber()) return shortest(v.GetDouble());
    throw UsageError("--config: key '" + key + "' must be a number or string");
  };
  for (const auto& m : doc.GetObject()) {
    const std::string key = m.name.GetString();
    if (key == "grid") {
      if (cfg.subcommand != "sweep") throw UsageError("--config: key 'grid' only applies to sweep");
      if (m.value.IsArray()) {
        for (const auto& g : m.value.GetArray()) cfg.grid.push_back(scalar(key, g));
      } else {
        cfg.grid.push_back(scalar(key, m.value));
      }
      continue;
    }
    if (!allowed.count(key) && !kCommonKeys.count(key)) {
      throw UsageError("--config: unknown key '" + key + "' for " + cfg.subcommand);
    }
    if (m.value.IsArray()) {
      std::string joined;
      for (const auto& item : m.value.GetArray()) {
        if (!joined.empty()) joined += ',';
        joined += scalar(key, item);
      }
      cfg.params[key] = joined;
    } else {
      cfg.params[key] = scalar(key, m.value);
    }
  }
}

// ---------------------------------------------------------------------------
// Value parsing

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, v);
  if (text.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw UsageError("--" + key + ": cannot parse '" + text + "' as a finite number");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

class Params {
 public:
  explicit Params(const RunConfig& cfg) : cfg_(cfg) {}

  bool has(const std::string& key) const { return cfg_.params.count(key) > 0; }
  const std::string& text(const std::string& key) const {
    auto it = cfg_.params.find(key);
    if (it == cfg_.params.end()) {
      throw UsageError("missing required --" + key + " for " + cfg_.subcommand);
    }
    return it->second;
  }
  double num(const std::string& key) const { return parse_number(key, text(key)); }
  double num_or(const std::string& key, double fallback) const {
    return has(key) ? num(key) : fallback;
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& t = text(key);
    std::size_t v = 0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw UsageError("--" + key + ": cannot parse '" + t + "' as a nonnegative integer");
    }
    return v;
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : split(text(key), ',')) out.push_back(parse_number(key, item));
    return out;
  }

 private:
  const RunConfig& cfg_;
};

// ---------------------------------------------------------------------------
// Output building

using Value = std::variant<double, long long, bool, std::string, std::nullptr_t>;
using Record = std::vector<std::pair<std::string, Value>>;

class Json {
 public:
  Json() : w_(buf_) {}
  Json& begin_object() { w_.StartObject(); return *this; }
  Json& end_object() { w_.EndObject(); return *this; }
  Json& begin_array() { w_.StartArray(); return *this; }
  Json& end_array() { w_.EndArray(); return *this; }
  Json& key(const std::string& k) { w_.Key(k.c_str(), static_cast<rapidjson::SizeType>(k.size())); return *this; }
  Json& value(const Value& v) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, double>) {
            if (std::isfinite(x)) {
              const std::string s = fmt(x);
              w_.RawValue(s.c_str(), s.size(), rapidjson::kNumberType);
            } else {
              w_.Null();
            }
          } else if constexpr (std::is_same_v<T, long long>) {
            w_.Int64(x);
          } else if constexpr (std::is_same_v<T, bool>) {
            w_.Bool(x);
          } else if constexpr (std::is_same_v<T, std::string>) {
            w_.String(x.c_str(), static_cast<rapidjson::SizeType>(x.size()));
          } else {
            w_.Null();
          }
        },
        v);
    return *this;
  }
  Json& complex(double re, double im) { return begin_array().value(re).value(im).end_array(); }
  Json& fields(const Record& r) {
    for (const auto& [k, v] : r) key(k).value(v);
    return *this;
  }
  std::string str() const { return std::string(buf_.GetString(), buf_.GetSize()); }

 private:
  rapidjson::StringBuffer buf_;
  rapidjson::Writer<rapidjson::StringBuffer> w_;
};

std::string csv_cell(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, double>) return fmt(x);
        else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
        else if constexpr (std::is_same_v<T, bool>) return x ? "1" : "0";
        else if constexpr (std::is_same_v<T, std::string>) return x;
        else return "";
      },
      v);
}

std::string record_payload(const RunConfig& cfg, const Record& r) {
  if (cfg.format == Format::Json) {
    Json j;
    j.begin_object().key("schema_version").value(1LL).key("command").value(cfg.subcommand);
    j.fields(r).end_object();
    return j.str() + "\n";
  }
  std::string header;
  std::string line;
  for (const auto& [k, v] : r) {
    if (!header.empty()) {
      header += ',';
      line += ',';
    }
    header += k;
    line += csv_cell(v);
  }
  return header + "\n" + line + "\n";
}

struct CString {
  char* p = nullptr;
  ~CString() { coamp_string_free(p); }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct MatrixHandle {
  coamp_matrix* m = nullptr;
  ~MatrixHandle() { coamp_matrix_free(m); }
};

Record report_fields(const coamp_report& r) {
  return {{"verdict", std::string(coamp_verdict_name(r.verdict))},
          {"margin", r.margin},
          {"binding", std::string(coamp_binding_name(r.binding))}};
}

int verdict_exit(coamp_verdict v) {
  switch (v) {
    case COAMP_FEASIBLE: return kExitOk;
    case COAMP_INFEASIBLE: return kExitNegative;
    default: return kExitInconclusive;
  }
}

void write_matrix(Json& j, const coamp_matrix* m) {
  j.begin_array();
  for (std::size_t i = 0; i < coamp_matrix_rows(m); ++i) {
    j.begin_array();
    for (std::size_t k = 0; k < coamp_matrix_cols(m); ++k) {
      double re = 0.0, im = 0.0;
      check(coamp_matrix_get(m, i, k, &re, &im));
      j.complex(re, im);
    }
    j.end_array();
  }
  j.end_array();
}

// ---------------------------------------------------------------------------
// Subcommands

struct Instance {
  coamp_label a[2];
  coamp_label b[2];
  double g1 = 1.0;
  double g2 = 1.0;
  double eta = 0.0;
};

double read_eta(const Params& p, RunResult& result, double fallback = 0.0) {
  const double eta = p.num_or("eta", fallback);
  if (eta >= 0.0 && eta <= std::numbers::pi) return eta;
  double folded = 0.0;
  check(coamp_fold_phase(eta, &folded));
  result.warnings.push_back("--eta " + shortest(eta) + " is outside [0, pi]; folded to " +
                            shortest(folded));
  return folded;
}

Instance read_instance(const Params& p, RunResult& result, bool gains_required = true) {
  Instance in;
  in.eta = read_eta(p, result);
  in.g1 = gains_required ? p.num("g1") : p.num_or("g1", 1.0);
  in.g2 = gains_required ? p.num("g2") : p.num_or("g2", 1.0);
  const double a1 = p.num("alpha1");
  const double a2 = p.num("alpha2");
  in.a[0] = {a1, 0.0};
  in.a[1] = {a2, in.eta};
  in.b[0] = {in.g1 * a1, 0.0};
  in.b[1] = {in.g2 * a2, in.eta};
  return in;
}

void cmd_feasible(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const Instance in = read_instance(p, res);
  coamp_report r{};
  check(coamp_exact_feasible(in.a[0], in.a[1], in.g1, in.g2, &r));
  Record rec = report_fields(r);
  rec.emplace_back("eta", in.eta);
  res.payload = record_payload(cfg, rec);
  res.exit_code = verdict_exit(r.verdict);
}

void cmd_envelope(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const double eta = read_eta(p, res);
  const double g1 = p.num("g1");
  const double g2 = p.num("g2");
  int passes = 0;
  double bound = 0.0;
  check(coamp_envelope(eta, g1, g2, &passes, &bound));
  Value locus = nullptr;
  if (g1 > 1.0 && g2 > 1.0) {
    double ratio = 0.0;
    check(coamp_equality_locus(g1, g2, &ratio));
    locus = ratio;
  }
  Record rec = {{"passes", passes != 0},
                {"cos_eta", std::cos(eta)},
                {"bound", bound},
                {"equality_locus", locus}};
  res.payload = record_payload(cfg, rec);
  res.exit_code = passes ? kExitOk : kExitNegative;
}

void cmd_max_gain(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const Instance in = read_instance(p, res, false);
  int unbounded = 0;
  double g1 = 0.0, g2 = 0.0;
  check(coamp_max_gain(in.a[0], in.a[1], &unbounded, &g1, &g2));
  Record rec = {{"unbounded", unbounded != 0},
                {"g1max", unbounded ? Value(nullptr) : Value(g1)},
                {"g2max", unbounded ? Value(nullptr) : Value(g2)}};
  res.payload = record_payload(cfg, rec);
  res.exit_code = kExitOk;
}

void cmd_pi(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const Instance in = read_instance(p, res);
  coamp_report r{};
  MatrixHandle pi;
  check(coamp_pi_deterministic(in.a, in.b, 2, p.num_or("tol", 1e-10), &pi.m, &r));
  if (cfg.format == Format::Json) {
    Json j;
    j.begin_object().key("schema_version").value(1LL).key("command").value(cfg.subcommand);
    j.fields(report_fields(r)).key("pi");
    write_matrix(j, pi.m);
    j.end_object();
    res.payload = j.str() + "\n";
  } else {
    std::string text = "i,j,re,im\n";
    for (std::size_t i = 0; i < coamp_matrix_rows(pi.m); ++i) {
      for (std::size_t k = 0; k < coamp_matrix_cols(pi.m); ++k) {
        double re = 0.0, im = 0.0;
        check(coamp_matrix_get(pi.m, i, k, &re, &im));
        text += std::to_string(i) + "," + std::to_string(k) + "," + fmt(re) + "," + fmt(im) + "\n";
      }
    }
    res.payload = text;
  }
  res.exit_code = verdict_exit(r.verdict);
}

std::optional<std::array<double, 2>> read_probabilities(const Params& p) {
  if (!p.has("p")) return std::nullopt;
  const auto values = p.list("p");
  if (values.size() == 1) return std::array<double, 2>{values[0], values[0]};
  if (values.size() == 2) return std::array<double, 2>{values[0], values[1]};
  throw UsageError("--p: expected one value or two comma-separated values");
}

void cmd_dykstra(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const Instance in = read_instance(p, res);
  const double tol = p.num_or("tol", 1e-9);
  if (p.text("p") == "max") {
    double pmax = 0.0;
    check(coamp_max_uniform_success(in.a, in.b, 2, p.num_or("tol", 1e-6), &pmax));
    res.payload = record_payload(cfg, {{"p_max", pmax}});
    res.exit_code = kExitOk;
    return;
  }
  const auto probs = *read_probabilities(p);
  const auto max_iters = p.count("max-iters", 20000);
  if (max_iters < 1 || max_iters > 100'000'000) {
    throw UsageError("--max-iters: must lie in [1, 1e8]");
  }
  coamp_report r{};
  MatrixHandle witness;
  check(coamp_dykstra(in.a, in.b, 2, probs.data(), static_cast<int>(max_iters), tol, &r,
                      &witness.m));
  Record rec = report_fields(r);
  rec.emplace_back("iterations", static_cast<long long>(r.iterations));
  rec.emplace_back("p1", probs[0]);
  rec.emplace_back("p2", probs[1]);
  if (cfg.format == Format::Json) {
    Json j;
    j.begin_object().key("schema_version").value(1LL).key("command").value(cfg.subcommand);
    j.fields(rec).key("witness");
    if (witness.m) {
      write_matrix(j, witness.m);
    } else {
      j.value(nullptr);
    }
    j.end_object();
    res.payload = j.str() + "\n";
  } else {
    res.payload = record_payload(cfg, rec);
  }
  res.exit_code = verdict_exit(r.verdict);
}

struct KrausHandle {
  coamp_kraus* k = nullptr;
  ~KrausHandle() { coamp_kraus_free(k); }
};

Record summary_fields(const coamp_kraus_summary& s) {
  return {{"dim", static_cast<long long>(s.dim)},
          {"M", static_cast<long long>(s.success_count)},
          {"completed", s.completed != 0},
          {"max_action", s.max_action},
          {"max_eq14", s.max_eq14},
          {"span_completeness", s.span_completeness},
          {"full_completeness", s.full_completeness},
          {"gram_transport", s.gram_transport}};
}

// Thresholds a healthy operator set must meet.
bool summary_passes(const coamp_kraus_summary& s) {
  return s.max_action < 1e-7 && s.max_eq14 < 1e-8 && s.span_eig_min >= -1e-8 &&
         s.span_eig_max <= 1.0 + 1e-8 && (!s.completed || s.full_completeness < 1e-8);
}

bool build_kraus(const RunConfig& cfg, RunResult& res, KrausHandle& handle, coamp_report& feas) {
  const Params p(cfg);
  const Instance in = read_instance(p, res);
  const auto probs = read_probabilities(p);
  const double eps = p.num_or("epsilon", 1e-12);
  check(coamp_kraus_build(in.a, in.b, 2, probs ? probs->data() : nullptr, eps, 1, &feas,
                          &handle.k));
  return handle.k != nullptr;
}

void cmd_kraus(const RunConfig& cfg, RunResult& res) {
  KrausHandle handle;
  coamp_report feas{};
  if (!build_kraus(cfg, res, handle, feas)) {
    res.payload = record_payload(cfg, report_fields(feas));
    res.exit_code = verdict_exit(feas.verdict);
    return;
  }
  if (cfg.format == Format::Json) {
    CString json;
    check(coamp_kraus_to_json(handle.k, &json.p));
    res.payload = json.str() + "\n";
  } else {
    coamp_kraus_summary s{};
    check(coamp_kraus_summary_get(handle.k, &s));
    res.payload = record_payload(cfg, summary_fields(s));
  }
  res.exit_code = kExitOk;
}

void cmd_verify(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  KrausHandle handle;
  if (p.has("input")) {
    for (const char* k : {"alpha1", "alpha2", "eta", "g1", "g2", "p", "epsilon"}) {
      if (p.has(k)) throw UsageError(std::string("--") + k + " cannot be combined with --input");
    }
    std::ifstream in(p.text("input"));
    if (!in) throw ApiError(COAMP_ERR_IO, "cannot read '" + p.text("input") + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    check(coamp_kraus_from_json(ss.str().c_str(), &handle.k));
  } else {
    coamp_report feas{};
    if (!build_kraus(cfg, res, handle, feas)) {
      res.payload = record_payload(cfg, report_fields(feas));
      res.exit_code = verdict_exit(feas.verdict);
      return;
    }
  }
  coamp_kraus_summary s{};
  check(coamp_kraus_summary_get(handle.k, &s));
  Record rec = summary_fields(s);
  const bool ok = summary_passes(s);
  rec.emplace(rec.begin(), "passes", ok);
  res.payload = record_payload(cfg, rec);
  res.exit_code = ok ? kExitOk : kExitNegative;
}

void cmd_wigner(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const coamp_label label{p.num("alpha1"), p.num_or("phase", 0.0)};
  const auto resolution = p.count("resolution", 201);
  std::optional<std::array<double, 4>> window;
  if (p.has("window")) {
    const auto w = p.list("window");
    if (w.size() != 4) throw UsageError("--window: expected x_min,x_max,p_min,p_max");
    window = std::array<double, 4>{w[0], w[1], w[2], w[3]};
  }
  struct Grid {
    coamp_wigner* w = nullptr;
    ~Grid() { coamp_wigner_free(w); }
  } grid;
  check(coamp_wigner_grid(label, window ? window->data() : nullptr, resolution, &grid.w));
  CString text;
  check(cfg.format == Format::Json ? coamp_wigner_to_json(grid.w, &text.p)
                                   : coamp_wigner_to_csv(grid.w, &text.p));
  res.payload = text.str();
  if (res.payload.empty() || res.payload.back() != '\n') res.payload += '\n';
  res.exit_code = kExitOk;
}

void cmd_channel(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const Instance in = read_instance(p, res, false);
  const double gamma = p.num("gamma");
  const auto times = p.list("time");
  struct Traj {
    coamp_trajectory* t = nullptr;
    ~Traj() { coamp_trajectory_free(t); }
  } traj;
  check(coamp_trajectory_new(in.a[0], in.a[1], in.g1, in.g2, gamma, times.data(), times.size(),
                             &traj.t));
  const bool feasible = coamp_trajectory_feasible(traj.t) != 0;
  if (!feasible) {
    res.warnings.push_back("gains (" + shortest(in.g1) + ", " + shortest(in.g2) +
                           ") are not deterministically feasible; comparison is exploratory");
  }
  if (cfg.format == Format::Json) {
    Json j;
    j.begin_object().key("schema_version").value(1LL).key("command").value(cfg.subcommand);
    j.key("amplification_feasible").value(feasible);
    j.key("columns").begin_array();
    for (const char* c : {"t", "d_plain", "d_amp", "ratio", "sigma_plain", "sigma_amp"}) {
      j.value(std::string(c));
    }
    j.end_array().key("rows").begin_array();
    for (std::size_t i = 0; i < coamp_trajectory_size(traj.t); ++i) {
      coamp_comparison c{};
      check(coamp_trajectory_row(traj.t, i, &c));
      j.begin_array();
      for (double v : {c.t, c.d_plain, c.d_amp, c.ratio, c.sigma_plain, c.sigma_amp}) j.value(v);
      j.end_array();
    }
    j.end_array().end_object();
    res.payload = j.str() + "\n";
  } else {
    CString text;
    check(coamp_trajectory_csv(traj.t, &text.p));
    res.payload = text.str();
  }
  res.exit_code = kExitOk;
}

void cmd_detector(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  const Instance in = read_instance(p, res, false);
  const double prior = p.num_or("prior", 0.5);
  double p_err = 0.0, helstrom = 0.0;
  CString rule;
  check(coamp_click_error(in.a[0], in.a[1], p.num_or("dark", 0.0), p.num_or("efficiency", 1.0),
                          prior, &p_err, &rule.p));
  check(coamp_helstrom_error(in.a[0], in.a[1], prior, &helstrom));
  res.payload = record_payload(
      cfg, {{"p_err", p_err}, {"rule", rule.str()}, {"helstrom", helstrom}});
  res.exit_code = kExitOk;
}

unsigned thread_cap() {
  const char* env = std::getenv("COHERENT_AMP_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  unsigned v = 0;
  const std::string s(env);
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw UsageError("COHERENT_AMP_THREADS: cannot parse '" + s + "' as a thread count");
  }
  return v;
}

void cmd_sweep(const RunConfig& cfg, RunResult& res) {
  const Params p(cfg);
  struct Spec {
    coamp_sweep_spec* s = nullptr;
    ~Spec() { coamp_sweep_spec_free(s); }
  } spec;
  check(coamp_sweep_spec_new(&spec.s));
  for (const char* axis : {"alpha1", "alpha2", "eta", "g1", "g2"}) {
    if (p.has(axis)) check(coamp_sweep_spec_fix(spec.s, axis, p.num(axis)));
  }
  for (const auto& g : cfg.grid) {
    const auto parts = split(g, ':');
    if (parts.size() != 4) throw UsageError("--grid: expected axis:min:max:steps, got '" + g + "'");
    const double lo = parse_number("grid", parts[1]);
    const double hi = parse_number("grid", parts[2]);
    std::size_t steps = 0;
    auto r = std::from_chars(parts[3].data(), parts[3].data() + parts[3].size(), steps);
    if (parts[3].empty() || r.ec != std::errc() || r.ptr != parts[3].data() + parts[3].size()) {
      throw UsageError("--grid: cannot parse steps '" + parts[3] + "'");
    }
    check(coamp_sweep_spec_range(spec.s, parts[0].c_str(), lo, hi, steps));
  }
  struct Result {
    coamp_sweep_result* r = nullptr;
    ~Result() { coamp_sweep_result_free(r); }
  } result;
  check(coamp_sweep_run(spec.s, thread_cap(), &result.r));
  if (cfg.format == Format::Json) {
    Json j;
    j.begin_object().key("schema_version").value(1LL).key("command").value(cfg.subcommand);
    j.key("columns").begin_array();
    for (const char* c : {"alpha1", "alpha2", "eta", "g1", "g2", "feasible", "margin", "g1max"}) {
      j.value(std::string(c));
    }
    j.end_array().key("rows").begin_array();
    for (std::size_t i = 0; i < coamp_sweep_result_size(result.r); ++i) {
      coamp_sweep_row row{};
      check(coamp_sweep_result_row(result.r, i, &row));
      j.begin_array();
      for (double v : {row.alpha1, row.alpha2, row.eta, row.g1, row.g2}) j.value(v);
      j.value(row.feasible != 0).value(row.margin);
      j.value(row.has_g1max ? Value(row.g1max) : Value(nullptr));
      j.end_array();
    }
    j.end_array().end_object();
    res.payload = j.str() + "\n";
  } else {
    CString text;
    check(coamp_sweep_result_csv(result.r, &text.p));
    res.payload = text.str();
  }
  res.exit_code = kExitOk;
}

using Handler = void (*)(const RunConfig&, RunResult&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"feasible", cmd_feasible}, {"envelope", cmd_envelope}, {"max-gain", cmd_max_gain},
      {"pi", cmd_pi},             {"dykstra", cmd_dykstra},   {"kraus", cmd_kraus},
      {"verify", cmd_verify},     {"wigner", cmd_wigner},     {"channel", cmd_channel},
      {"detector", cmd_detector}, {"sweep", cmd_sweep},
  };
  return table;
}

bool write_atomically(const std::string& path, const std::string& payload, std::string& why) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      why = "cannot open '" + tmp.string() + "' for writing";
      return false;
    }
    out << payload;
    out.flush();
    if (!out) {
      why = "failed writing '" + tmp.string() + "'";
      std::error_code ec;
      fs::remove(tmp, ec);
      return false;
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    why = "cannot move output into '" + path + "': " + ec.message();
    fs::remove(tmp, ec);
    return false;
  }
  return true;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, spec] : specs()) out.push_back(name);
    return out;
  }();
  return names;
}

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Feasibility, construction and analysis of noiseless coherent-state amplifiers",
               "coamp"};
  app.require_subcommand(1, 1);
  app.set_help_all_flag("--help-all", "show help for every subcommand");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::vector<std::string>> grids;
  std::string config_path, format, output;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, spec] : specs()) {
    CLI::App* sc = app.add_subcommand(name, spec.help);
    subs[name] = sc;
    for (const auto& key : spec.allowed) sc->add_option("--" + key, values[name][key]);
    for (const auto& key : kCommonKeys) {
      if (key == "format") {
        sc->add_option("--format", format, "csv or json (default csv)");
      } else if (key == "output") {
        sc->add_option("--output", output, "write to this path instead of standard output");
      } else {
        sc->add_option("--" + key, values[name][key], "seed for randomized paths");
      }
    }
    if (name == "sweep") {
      sc->add_option("--grid", grids[name], "axis:min:max:steps (repeatable)")
          ->allow_extra_args(false);
    }
    sc->add_option("--config", config_path, "JSON file with the same keys; flags win");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  RunConfig cfg;
  for (const auto& [name, sc] : subs) {
    if (sc->parsed()) cfg.subcommand = name;
  }
  const SubSpec& spec = specs().at(cfg.subcommand);
  CLI::App* sc = subs.at(cfg.subcommand);

  if (!config_path.empty()) load_config(config_path, spec, cfg);
  for (const auto& [key, text] : values[cfg.subcommand]) {
    if (sc->count("--" + key) > 0) cfg.params[key] = text;
  }
  if (sc->count("--format") > 0) cfg.params["format"] = format;
  if (sc->count("--output") > 0) cfg.params["output"] = output;
  if (cfg.subcommand == "sweep" && !grids["sweep"].empty()) cfg.grid = grids["sweep"];

  if (auto it = cfg.params.find("format"); it != cfg.params.end()) {
    if (it->second == "csv") {
      cfg.format = Format::Csv;
    } else if (it->second == "json") {
      cfg.format = Format::Json;
    } else {
      throw UsageError("--format: expected csv or json, got '" + it->second + "'");
    }
    cfg.params.erase(it);
  }
  if (auto it = cfg.params.find("output"); it != cfg.params.end()) {
    cfg.output = it->second;
    cfg.params.erase(it);
  }
  for (const auto& key : spec.required) {
    if (!cfg.params.count(key)) {
      throw UsageError("missing required --" + key + " for " + cfg.subcommand);
    }
  }
  return cfg;
}

RunResult dispatch(const RunConfig& config) {
  RunResult res;
  try {
    handlers().at(config.subcommand)(config, res);
  } catch (const UsageError& e) {
    res = RunResult{kExitUsage, "", res.warnings, e.what()};
  } catch (const ApiError& e) {
    res = RunResult{exit_code_for(e.status), "", res.warnings, e.what()};
  } catch (const std::exception& e) {
    res = RunResult{kExitFailure, "", res.warnings, e.what()};
  }
  return res;
}

int emit(const RunResult& result, const RunConfig& config, std::ostream& out, std::ostream& err) {
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  if (!result.error.empty()) err << "error: " << result.error << "\n";
  if (result.payload.empty()) return result.exit_code;
  if (!config.output) {
    out << result.payload;
    out.flush();
    return result.exit_code;
  }
  std::string why;
  if (!write_atomically(*config.output, result.payload, why)) {
    err << "error: " << why << "\n";
    return kExitFailure;
  }
  return result.exit_code;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return emit(dispatch(cfg), cfg, out, err);
}

}  // namespace coamp_cli
