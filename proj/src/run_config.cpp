#include "spinsqz/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "spinsqz/error.hpp"
#include "spinsqz/lattice.hpp"

namespace spinsqz {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

/// (key, getter) in serialization order.
std::vector<std::pair<std::string, std::function<std::string(const RunConfig&)>>> fields() {
  return {
      {"family", [](const RunConfig& c) { return c.family; }},
      {"L", [](const RunConfig& c) { return std::to_string(c.L); }},
      {"Ly", [](const RunConfig& c) { return std::to_string(c.Ly); }},
      {"delta", [](const RunConfig& c) { return fmt(c.delta); }},
      {"J", [](const RunConfig& c) { return fmt(c.J); }},
      {"alpha", [](const RunConfig& c) { return fmt(c.alpha); }},
      {"rb", [](const RunConfig& c) { return fmt(c.rb); }},
      {"method", [](const RunConfig& c) { return c.method; }},
      {"N", [](const RunConfig& c) { return std::to_string(c.N); }},
      {"chi", [](const RunConfig& c) { return fmt(c.chi); }},
      {"inertia", [](const RunConfig& c) { return c.inertia; }},
      {"spin_waves", [](const RunConfig& c) { return std::string(c.spin_waves ? "true" : "false"); }},
      {"tmax", [](const RunConfig& c) { return fmt(c.tmax); }},
      {"dt_out", [](const RunConfig& c) { return fmt(c.dt_out); }},
      {"grid", [](const RunConfig& c) { return c.grid; }},
      {"n_log", [](const RunConfig& c) { return std::to_string(c.n_log); }},
      {"t_first", [](const RunConfig& c) { return fmt(c.t_first); }},
      {"dt", [](const RunConfig& c) { return fmt(c.dt); }},
      {"ntraj", [](const RunConfig& c) { return std::to_string(c.ntraj); }},
      {"seed", [](const RunConfig& c) { return std::to_string(c.seed); }},
      {"krylov_step", [](const RunConfig& c) { return fmt(c.krylov_step); }},
      {"max_gib", [](const RunConfig& c) { return fmt(c.max_gib); }},
      {"output", [](const RunConfig& c) { return c.output; }},
  };
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

void RunConfig::set(const std::string& key, const std::string& v) {
  if (key == "family") family = v;
  else if (key == "L") L = static_cast<int>(to_int(key, v));
  else if (key == "Ly") Ly = static_cast<int>(to_int(key, v));
  else if (key == "delta") delta = to_double(key, v);
  else if (key == "J") J = to_double(key, v);
  else if (key == "alpha") alpha = to_double(key, v);
  else if (key == "rb") rb = to_double(key, v);
  else if (key == "method") method = v;
  else if (key == "N") N = static_cast<int>(to_int(key, v));
  else if (key == "chi") chi = to_double(key, v);
  else if (key == "inertia") inertia = v;
  else if (key == "spin_waves") spin_waves = to_bool(key, v);
  else if (key == "tmax") tmax = to_double(key, v);
  else if (key == "dt_out") dt_out = to_double(key, v);
  else if (key == "grid") grid = v;
  else if (key == "n_log") n_log = static_cast<int>(to_int(key, v));
  else if (key == "t_first") t_first = to_double(key, v);
  else if (key == "dt") dt = to_double(key, v);
  else if (key == "ntraj") ntraj = static_cast<int>(to_int(key, v));
  else if (key == "seed") seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "krylov_step") krylov_step = to_double(key, v);
  else if (key == "max_gib") max_gib = to_double(key, v);
  else if (key == "output") output = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [key, get] : fields()) out += key + " = " + get(*this) + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  for (const auto& [k, v] : parse_key_values(text)) c.set(k, v);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::validate() const {
  parse_family(family);
  if (L < 1 || Ly < 0) throw ConfigError("L must be >= 1 and Ly >= 0");
  if (method != "ed" && method != "rsw" && method != "dtwa" && method != "oat") {
    throw ConfigError("method must be one of ed, rsw, dtwa, oat; got '" + method + "'");
  }
  if (inertia != "bare" && inertia != "tos" && inertia.rfind("rescaled-from:", 0) != 0) {
    throw ConfigError("inertia must be bare, tos or rescaled-from:L0; got '" + inertia + "'");
  }
  if (!(tmax > 0.0)) throw ConfigError("tmax must be positive");
  if (grid == "linear") {
    if (!(dt_out > 0.0)) throw ConfigError("dt_out must be positive");
  } else if (grid == "log") {
    if (n_log < 2 || !(t_first > 0.0) || t_first >= tmax) {
      throw ConfigError("log grid needs n_log >= 2 and 0 < t_first < tmax");
    }
  } else {
    throw ConfigError("grid must be linear or log");
  }
  if (method == "dtwa" && (!(dt > 0.0) || dt > 0.05 / J)) {
    throw ConfigError("DTWA step must satisfy 0 < dt*J <= 0.05");
  }
  if (method == "dtwa" && ntraj < 100) throw ConfigError("DTWA needs ntraj >= 100");
  if (method == "oat" && N == 0 && L * ly() < 2) throw ConfigError("OAT needs N >= 2");
  if (max_gib <= 0.0) throw ConfigError("max_gib must be positive");
  CouplingSpec{parse_family(family), J, alpha, rb}.validate();
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : parse_key_values(serialize())) j[k] = v;
  return j;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunConfig::hash() const { return fnv1a_hex(serialize()); }

std::vector<double> RunConfig::times() const {
  std::vector<double> t;
  if (grid == "log") {
    t.push_back(0.0);
    const double r = std::log(tmax / t_first) / (n_log - 1);
    for (int k = 0; k < n_log; ++k) t.push_back(t_first * std::exp(r * k));
    t.back() = tmax;
    return t;
  }
  const long n = std::lround(std::floor(tmax / dt_out + 1e-9));
  for (long k = 0; k <= n; ++k) t.push_back(k * dt_out);
  return t;
}

}  // namespace spinsqz
