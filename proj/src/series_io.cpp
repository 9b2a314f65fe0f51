#include "spinsqz/series_io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "spinsqz/error.hpp"

namespace spinsqz {

namespace {

const std::vector<std::string> kBase = {"t",          "m_x",       "var_e1", "var_e2", "cov_12",
                                        "v_perp_min", "theta_min", "xi2",    "n_sw",   "var_jx"};

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out.precision(17);
  return out;
}

void put(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  os.write(buf, res.ptr - buf);
}

}  // namespace

std::vector<std::string> series_columns(const TimeSeries& ts) {
  auto cols = kBase;
  if (!ts.m_x_err.empty()) {
    cols.push_back("m_x_err");
    cols.push_back("xi2_err");
  }
  return cols;
}

void write_series_csv(const TimeSeries& ts, const std::string& path) {
  auto out = open_out(path);
  const auto cols = series_columns(ts);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  const bool errs = !ts.m_x_err.empty();
  for (std::size_t k = 0; k < ts.points.size(); ++k) {
    const auto& p = ts.points[k];
    for (double v : {p.t, p.m_x, p.var_e1, p.var_e2, p.cov12, p.v_perp_min, p.theta_min, p.xi2}) {
      put(out, v);
      out << ',';
    }
    if (p.n_sw) put(out, *p.n_sw);
    out << ',';
    put(out, p.var_jx);
    if (errs) {
      out << ',';
      put(out, ts.m_x_err[k]);
      out << ',';
      put(out, ts.xi2_err[k]);
    }
    out << '\n';
  }
}

std::string sidecar_path(const std::string& csv_path) {
  return std::filesystem::path(csv_path).replace_extension(".json").string();
}

void write_series(const TimeSeries& ts, const std::string& csv_path) {
  write_series_csv(ts, csv_path);
  nlohmann::json side = {{"metadata", ts.metadata}, {"warnings", ts.warnings}, {"columns", series_columns(ts)}};
  write_json(side, sidecar_path(csv_path));
}

TimeSeries read_series(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot read " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(csv_path + ": empty file");
  std::map<std::string, std::size_t> col;
  {
    std::stringstream ss(line);
    std::string name;
    for (std::size_t c = 0; std::getline(ss, name, ','); ++c) col[name] = c;
  }
  for (const auto& req : {"t", "m_x", "xi2"}) {
    if (!col.count(req)) throw ConfigError(csv_path + ": missing column " + std::string(req));
  }
  auto get = [&](const std::vector<std::string>& cells, const std::string& name, double fallback) {
    const auto it = col.find(name);
    if (it == col.end() || it->second >= cells.size() || cells[it->second].empty()) return fallback;
    return std::strtod(cells[it->second].c_str(), nullptr);
  };
  const double nan = std::nan("");
  TimeSeries ts;
  const bool errs = col.count("m_x_err") && col.count("xi2_err");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    SqueezingPoint p;
    p.t = get(cells, "t", nan);
    p.m_x = get(cells, "m_x", nan);
    p.var_e1 = get(cells, "var_e1", nan);
    p.var_e2 = get(cells, "var_e2", nan);
    p.cov12 = get(cells, "cov_12", nan);
    p.v_perp_min = get(cells, "v_perp_min", nan);
    p.theta_min = get(cells, "theta_min", nan);
    p.xi2 = get(cells, "xi2", nan);
    p.var_jx = get(cells, "var_jx", nan);
    const double nsw = get(cells, "n_sw", nan);
    if (col.count("n_sw") && col["n_sw"] < cells.size() && !cells[col["n_sw"]].empty()) p.n_sw = nsw;
    ts.points.push_back(p);
    if (errs) {
      ts.m_x_err.push_back(get(cells, "m_x_err", nan));
      ts.xi2_err.push_back(get(cells, "xi2_err", nan));
    }
  }
  const auto side = sidecar_path(csv_path);
  if (std::filesystem::exists(side)) {
    const auto j = read_json(side);
    if (j.contains("metadata")) ts.metadata = j["metadata"];
    if (j.contains("warnings")) ts.warnings = j["warnings"].get<std::vector<std::string>>();
  }
  return ts;
}

void write_table(const std::string& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << ',';
      put(out, r[c]);
    }
    out << '\n';
  }
}

void write_json(const nlohmann::json& j, const std::string& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace spinsqz
