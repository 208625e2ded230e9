#include "semilinear/run_config.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semilinear/errors.hpp"

namespace semilinear {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* const kInlineKeys[] = {"kind", "f", "g1", "g2", "g", "boundary"};

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool schema_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "schema") {
      if (to_int(key, value) != kSchema) throw ConfigError("unsupported config schema " + value);
      schema_seen = true;
      continue;
    }
    cfg.set(key, value);
  }
  if (!schema_seen) throw ConfigError("config file lacks 'schema = 1'");
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "problem") {
    problem = value;
  } else if (key.starts_with("param.")) {
    params[key.substr(6)] = to_double(key, value);
  } else if (key.starts_with("inline.")) {
    const std::string sub = key.substr(7);
    if (std::find(std::begin(kInlineKeys), std::end(kInlineKeys), sub) == std::end(kInlineKeys))
      throw ConfigError("unknown config key '" + key + "'");
    inline_spec[sub] = value;
  } else if (key == "grid") {
    grid = static_cast<int>(to_int(key, value));
  } else if (key == "solver.tol_linear") {
    tol_linear = to_double(key, value);
  } else if (key == "solver.tol_picard") {
    tol_picard = to_double(key, value);
  } else if (key == "solver.max_picard") {
    max_picard = static_cast<int>(to_int(key, value));
  } else if (key == "solver.damping") {
    damping = to_double(key, value);
  } else if (key == "solver.max_refinement") {
    max_refinement = static_cast<int>(to_int(key, value));
  } else if (key == "diag.r0") {
    r0 = to_double(key, value);
  } else if (key == "diag.scales") {
    scales = static_cast<int>(to_int(key, value));
  } else if (key == "diag.theta") {
    theta = to_double(key, value);
  } else if (key == "diag.lattice") {
    lattice = static_cast<int>(to_int(key, value));
  } else if (key == "sweep.param") {
    sweep_param = value;
  } else if (key == "sweep.values") {
    sweep_values.clear();
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) sweep_values.push_back(to_double(key, trim(item)));
  } else if (key == "out") {
    out = value;
  } else if (key == "seed") {
    const long long s = to_int(key, value);
    if (s < 0) throw ConfigError("seed must be non-negative");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "format") {
    format = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::string RunConfig::serialize() const {
  std::map<std::string, std::string> kv;
  kv["problem"] = problem;
  for (const auto& [k, v] : params) kv["param." + k] = num(v);
  for (const auto& [k, v] : inline_spec) kv["inline." + k] = v;
  kv["grid"] = std::to_string(grid);
  kv["solver.tol_linear"] = num(tol_linear);
  kv["solver.tol_picard"] = num(tol_picard);
  kv["solver.max_picard"] = std::to_string(max_picard);
  kv["solver.damping"] = num(damping);
  kv["solver.max_refinement"] = std::to_string(max_refinement);
  kv["diag.r0"] = num(r0);
  kv["diag.scales"] = std::to_string(scales);
  kv["diag.theta"] = num(theta);
  kv["diag.lattice"] = std::to_string(lattice);
  if (!sweep_param.empty()) {
    kv["sweep.param"] = sweep_param;
    std::string vals;
    for (std::size_t i = 0; i < sweep_values.size(); ++i) vals += (i ? ", " : "") + num(sweep_values[i]);
    kv["sweep.values"] = vals;
  }
  kv["seed"] = std::to_string(seed);
  kv["format"] = format;
  std::string text = "schema = " + std::to_string(kSchema) + "\n";
  for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
  return text;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string RunConfig::hash() const { return sha256_hex(serialize()); }

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = {{"schema", kSchema},   {"problem", problem}, {"grid", grid},     {"r0", r0},
                      {"scales", scales},    {"theta", theta},     {"lattice", lattice},
                      {"seed", seed},        {"format", format}};
  j["params"] = params;
  if (!inline_spec.empty()) j["inline"] = inline_spec;
  j["solver"] = {{"tol_linear", tol_linear},
                 {"tol_picard", tol_picard},
                 {"max_picard", max_picard},
                 {"damping", damping},
                 {"max_refinement", max_refinement}};
  if (!sweep_param.empty()) j["sweep"] = {{"param", sweep_param}, {"values", sweep_values}};
  return j;
}

void RunConfig::validate(bool need_problem) const {
  if (need_problem && problem.empty()) throw ConfigError("no problem given");
  if (problem != "inline" && !inline_spec.empty()) throw ConfigError("inline.* keys need problem = inline");
  if (!problem.empty()) (void)entry();
  solver().validate();
  if (grid != 0 && (grid < 65 || grid % 2 == 0)) throw ConfigError("grid must be odd and >= 65");
  if (r0 != 0.0 && !(r0 > 0.0 && r0 <= 0.25)) throw ConfigError("r0 must lie in (0, 1/4]");
  if (scales < 0) throw ConfigError("scales must be non-negative");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive");
  if (lattice < 2) throw ConfigError("lattice needs at least 2 points per axis");
  if (format != "csv" && format != "json") throw ConfigError("format must be csv or json");
  if (out.empty()) throw ConfigError("empty output directory");
}

CatalogEntry RunConfig::entry() const {
  if (problem == "inline") {
    const auto kind = inline_spec.find("kind");
    const auto boundary = inline_spec.find("boundary");
    if (kind == inline_spec.end()) throw ConfigError("inline problem needs inline.kind");
    if (boundary == inline_spec.end()) throw ConfigError("inline problem needs inline.boundary");
    if (!params.empty()) throw ConfigError("inline problems take no param.* keys");
    std::map<std::string, std::string> exprs(inline_spec);
    exprs.erase("kind");
    exprs.erase("boundary");
    return custom_problem(kind->second, exprs, boundary->second);
  }
  return get(problem, params);
}

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.tol_linear = tol_linear;
  s.tol_picard = tol_picard;
  s.max_picard = max_picard;
  s.damping = damping;
  s.max_refinement = max_refinement;
  return s;
}

int RunConfig::grid_size(const CatalogEntry& e) const { return grid != 0 ? grid : e.diagnose_grid; }
double RunConfig::radius0(const CatalogEntry& e) const { return r0 != 0.0 ? r0 : e.r0; }
int RunConfig::scale_count(const CatalogEntry& e) const { return scales != 0 ? scales : e.scales; }

OutputLock::OutputLock(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  path_ = dir / ".lock";
  fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd_ < 0) throw ConfigError("output directory " + dir.string() + " is locked by another run");
}

OutputLock::~OutputLock() {
  if (fd_ >= 0) {
    ::close(fd_);
    std::filesystem::remove(path_);
  }
}

}  // namespace semilinear
