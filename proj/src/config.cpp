#include "fvol/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>

namespace fvol {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string_view s) {
  std::string t = trim(s);
  if (t.size() >= 2 && ((t.front() == '"' && t.back() == '"') || (t.front() == '\'' && t.back() == '\'')))
    return t.substr(1, t.size() - 2);
  return t;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s = unquote(v);
  double out = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(out))
    fail(ErrorCode::kInvalidArgument, std::string(key) + ": expected a number, found '" + s + "'");
  return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v) {
  const std::string s = unquote(v);
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorCode::kInvalidArgument, std::string(key) + ": expected a non-negative integer, found '" + s + "'");
  return out;
}

// Parses `{ a = 1, b = "x" }` into key/value pairs.
std::map<std::string, std::string> inline_table(std::string_view text) {
  std::string s = trim(text);
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    fail(ErrorCode::kInvalidArgument, "expected an inline table, found '" + s + "'");
  s = s.substr(1, s.size() - 2);
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto comma = s.find(',', pos);
    const std::string item = trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
    pos = comma == std::string::npos ? s.size() : comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kInvalidArgument, "inline table entry without '=': '" + item + "'");
    out[trim(item.substr(0, eq))] = unquote(item.substr(eq + 1));
  }
  return out;
}

std::string normalize(std::string_view raw) {
  std::string k = trim(raw);
  std::replace(k.begin(), k.end(), '_', '-');
  for (const std::string_view prefix : {"estimator.", "general."})
    if (k.rfind(prefix, 0) == 0) k = k.substr(prefix.size());
  if (k.rfind("cv.", 0) == 0) k = "cv-" + k.substr(3);
  return k;
}

std::pair<double, double> quantile_range(std::string_view key, std::string_view v) {
  std::string s = trim(v);
  if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  s = unquote(s);
  const auto comma = s.find(',');
  if (comma == std::string::npos)
    fail(ErrorCode::kInvalidArgument, std::string(key) + ": expected 'low,high', found '" + s + "'");
  const double lo = to_double(key, s.substr(0, comma));
  const double hi = to_double(key, s.substr(comma + 1));
  if (!(lo > 0 && lo < hi && hi < 1))
    fail(ErrorCode::kInvalidArgument, std::string(key) + ": need 0 < low < high < 1");
  return {lo, hi};
}

}  // namespace

SemiMetricSpec parse_semimetric(std::string_view text) {
  const std::string t = trim(text);
  std::string kind;
  std::string param;
  if (!t.empty() && t.front() == '{') {
    auto tbl = inline_table(t);
    kind = tbl["kind"];
    if (tbl.count("order")) param = tbl["order"];
    if (tbl.count("k")) param = tbl["k"];
  } else {
    const std::string s = unquote(t);
    const auto colon = s.find(':');
    kind = s.substr(0, colon);
    if (colon != std::string::npos) param = s.substr(colon + 1);
  }
  std::replace(kind.begin(), kind.end(), '-', '_');
  const int p = param.empty() ? -1 : static_cast<int>(to_uint("semimetric", param));
  if (kind == "l2") return SemiMetricSpec::l2();
  if (kind == "deriv_l2") return SemiMetricSpec::deriv_l2(p < 0 ? 1 : p);
  if (kind == "pca") {
    if (p == 0) fail(ErrorCode::kInvalidArgument, "semimetric: pca needs k >= 1");
    return SemiMetricSpec::pca(p < 0 ? 4 : p);
  }
  fail(ErrorCode::kInvalidArgument, "semimetric: unknown kind '" + kind + "' (l2, deriv_l2, pca)");
}

std::vector<std::string> config_keys() {
  return {"seed",         "threads",        "level",          "mode",           "h1",
          "h2",           "h3",             "h4",             "cv-grid-size",   "cv-quantile-range",
          "knn-override", "kernel",         "kernel-m",       "kernel-u",       "kernel-omega",
          "kernel-pi",    "semimetric",     "semimetric-m",   "semimetric-u",   "semimetric-omega",
          "semimetric-pi", "tau-denominator", "simulate.model", "simulate.n",    "simulate.eta",
          "simulate.B",   "simulate.J",     "simulate.grid-size", "finance.zeta", "finance.pca-components"};
}

void RunConfig::set(std::string_view raw_key, std::string_view value) {
  const std::string key = normalize(raw_key);
  const std::string v = unquote(value);

  if (key == "seed") {
    seed = to_uint(key, v);
  } else if (key == "threads") {
    threads = std::max<std::size_t>(1, to_uint(key, v));
  } else if (key == "level") {
    level = to_double(key, v);
    if (!(level > 0 && level < 1)) fail(ErrorCode::kInvalidArgument, "level must lie in (0, 1)");
  } else if (key == "mode") {
    mode = mode_from_name(v);
  } else if (key.size() == 2 && key[0] == 'h' && key[1] >= '1' && key[1] <= '4') {
    const auto role = static_cast<Role>(key[1] - '1');
    if (v == "auto") {
      cv.automatic[static_cast<std::size_t>(role)] = true;
    } else {
      const double h = to_double(key, v);
      if (!(h > 0)) fail(ErrorCode::kInvalidArgument, key + " must be positive");
      cv.automatic[static_cast<std::size_t>(role)] = false;
      estimator.bandwidths[role] = h;
    }
  } else if (key == "cv-grid-size") {
    cv.grid_size = to_uint(key, v);
    if (cv.grid_size < 1) fail(ErrorCode::kInvalidArgument, "cv-grid-size must be >= 1");
  } else if (key == "cv-quantile-range") {
    std::tie(cv.q_min, cv.q_max) = quantile_range(key, value);
  } else if (key == "knn-override") {
    estimator.knn_override = to_uint(key, v);
    knn_set = true;
  } else if (key == "kernel") {
    estimator.kernel_m = estimator.kernel_u = estimator.kernel_omega = estimator.kernel_pi = Kernel::from_name(v);
  } else if (key == "kernel-m") {
    estimator.kernel_m = Kernel::from_name(v);
  } else if (key == "kernel-u") {
    estimator.kernel_u = Kernel::from_name(v);
  } else if (key == "kernel-omega") {
    estimator.kernel_omega = Kernel::from_name(v);
  } else if (key == "kernel-pi") {
    estimator.kernel_pi = Kernel::from_name(v);
  } else if (key == "semimetric") {
    estimator.metric_m = estimator.metric_u = estimator.metric_omega = estimator.metric_pi = parse_semimetric(value);
    semimetric_set = true;
  } else if (key == "semimetric-m") {
    estimator.metric_m = parse_semimetric(value);
    semimetric_set = true;
  } else if (key == "semimetric-u") {
    estimator.metric_u = parse_semimetric(value);
    semimetric_set = true;
  } else if (key == "semimetric-omega") {
    estimator.metric_omega = parse_semimetric(value);
    semimetric_set = true;
  } else if (key == "semimetric-pi") {
    estimator.metric_pi = parse_semimetric(value);
    semimetric_set = true;
  } else if (key == "tau-denominator") {
    if (v == "bandwidth")
      estimator.tau_denominator = TauDenominator::kBandwidth;
    else if (v == "literal")
      estimator.tau_denominator = TauDenominator::kLiteral;
    else
      fail(ErrorCode::kInvalidArgument, "tau-denominator must be 'bandwidth' or 'literal'");
  } else if (key == "simulate.model") {
    model = static_cast<int>(to_uint(key, v));
    if (model < 1 || model > 4) fail(ErrorCode::kInvalidArgument, "simulate.model must be 1..4");
  } else if (key == "simulate.n") {
    n = to_uint(key, v);
  } else if (key == "simulate.eta") {
    eta = to_double(key, v);
  } else if (key == "simulate.B" || key == "simulate.b") {
    replications = to_uint(key, v);
  } else if (key == "simulate.J" || key == "simulate.j") {
    eval_size = to_uint(key, v);
  } else if (key == "simulate.grid-size") {
    grid_size = to_uint(key, v);
  } else if (key == "finance.zeta") {
    zeta = to_double(key, v);
    if (!(zeta >= 0)) fail(ErrorCode::kInvalidArgument, "finance.zeta must be >= 0 (0 = no MAR injection)");
  } else if (key == "finance.pca-components") {
    pca_components = static_cast<int>(to_uint(key, v));
  } else {
    fail(ErrorCode::kInvalidArgument, "unknown configuration key '" + std::string(raw_key) + "'");
  }
}

SimConfig RunConfig::simulation() const {
  SimConfig s;
  s.n = n;
  s.grid_size = grid_size;
  s.error_model = model;
  s.eta = eta;
  s.replications = replications;
  s.eval_size = eval_size;
  s.seed = seed;
  s.nu = level;
  s.threads = threads;
  s.estimator = estimator;
  if (!knn_set) s.estimator.knn_override = kSimulationKnn;
  s.cv = cv;
  return s;
}

PipelineOptions RunConfig::pipeline() const {
  PipelineOptions p;
  p.mode = mode;
  p.level = level;
  p.cv = cv;
  p.threads = threads;
  p.estimator = estimator;
  if (!semimetric_set) {
    const auto pca = SemiMetricSpec::pca(pca_components);
    p.estimator.metric_m = p.estimator.metric_u = p.estimator.metric_omega = p.estimator.metric_pi = pca;
  }
  return p;
}

void parse_config(std::istream& in, RunConfig& cfg, const std::string& source) {
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    const std::string s = trim(line);
    if (s.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']') fail(ErrorCode::kInvalidArgument, where + "malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(ErrorCode::kInvalidArgument, where + "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string full = section.empty() ? key : section + "." + key;
    try {
      cfg.set(full, s.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.what());
    }
  }
}

void load_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open config " + path);
  parse_config(in, cfg, path);
}

}  // namespace fvol
