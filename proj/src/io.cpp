#include "polymer/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "polymer/error.hpp"

#ifndef POLYMER_VERSION
#define POLYMER_VERSION "0.0.0"
#endif

namespace polymer {

std::string tool_version() { return std::string("polymer-lab/") + POLYMER_VERSION; }

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{}", v);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw ConfigError(fmt::format("CSV ({}) has no column '{}'", kind, name));
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void check_cell(const std::string& s) {
  if (s.find_first_of(",\n\r") != std::string::npos) throw DomainError(fmt::format("CSV cell '{}' needs quoting", s));
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ResourceError(fmt::format("cannot write {}", tmp.string()));
    os << text;
    if (!os) throw ResourceError(fmt::format("write failed for {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path);
}

void write_csv(const std::filesystem::path& path, const CsvTable& t) {
  std::string out = fmt::format("# schema={} tool={} digest={} kind={} status={}\n", kSchemaVersion, t.tool.empty() ? tool_version() : t.tool,
                                t.digest, t.kind, t.complete ? "complete" : "incomplete");
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    check_cell(t.columns[i]);
    out += (i ? "," : "") + t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) throw DomainError("CSV row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      check_cell(row[i]);
      out += (i ? "," : "") + row[i];
    }
    out += '\n';
  }
  write_text(path, out);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError(fmt::format("cannot read {}", path.string()));
  CsvTable t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
    throw ConfigError(fmt::format("{}: missing schema header", path.string()));
  }
  std::istringstream hs(line.substr(2));
  std::string field;
  bool has_schema = false;
  while (hs >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = field.substr(0, eq), v = field.substr(eq + 1);
    if (k == "schema") {
      has_schema = true;
      try {
        t.schema = std::stoi(v);
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}: bad schema field '{}'", path.string(), v));
      }
    } else if (k == "tool") {
      t.tool = v;
    } else if (k == "digest") {
      t.digest = v;
    } else if (k == "kind") {
      t.kind = v;
    } else if (k == "status") {
      t.complete = v == "complete";
    }
  }
  if (!has_schema) throw ConfigError(fmt::format("{}: header has no schema version", path.string()));
  if (t.schema != kSchemaVersion) {
    throw ConfigError(fmt::format("{}: schema {} but this build reads {}", path.string(), t.schema, kSchemaVersion));
  }
  if (!std::getline(is, line) || line.empty()) throw ConfigError(fmt::format("{}: missing column row", path.string()));
  t.columns = split(line, ',');
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split(line, ',');
    if (row.size() != t.columns.size()) throw ConfigError(fmt::format("{}: ragged row '{}'", path.string(), line));
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable checks_table(const CheckReport& rep, const std::string& kind, const std::string& digest) {
  CsvTable t;
  t.kind = kind;
  t.digest = digest;
  t.columns = {"check", "inputs", "lhs", "rhs", "pass", "gating"};
  for (const auto& r : rep.rows()) {
    std::string in = r.inputs;
    for (char& c : in) {
      if (c == ',') c = ';';
    }
    t.rows.push_back({r.check, in, format_number(r.lhs), format_number(r.rhs), r.pass ? "1" : "0", r.gating ? "1" : "0"});
  }
  return t;
}

CsvTable scan_table(const std::vector<ScanRow>& rows, const std::string& kind, const std::string& digest, bool complete) {
  CsvTable t;
  t.kind = kind;
  t.digest = digest;
  t.complete = complete;
  t.columns = {"experiment", "t", "where", "n", "mean", "stderr", "reference", "extra"};
  for (const auto& r : rows) {
    t.rows.push_back({r.experiment, std::to_string(r.t), r.where, std::to_string(r.n), format_number(r.mean),
                      format_number(r.stderr_), format_number(r.reference), format_number(r.extra)});
  }
  return t;
}

CsvTable delta_table(const std::vector<DeltaSample>& rows, const std::string& digest, bool complete) {
  CsvTable t;
  t.kind = "delta_samples";
  t.digest = digest;
  t.complete = complete;
  t.columns = {"t", "y", "seed", "value"};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.t), std::to_string(r.m), std::to_string(r.seed), format_number(r.value)});
  }
  return t;
}

CsvTable kernel_table_csv(const KernelTable& table, int t_hi, const std::string& digest) {
  CsvTable t;
  t.kind = "kernel_table";
  t.digest = digest;
  t.columns = {"t"};
  for (int k = 0; k < table.dim(); ++k) t.columns.push_back("z" + std::to_string(k + 1));
  t.columns.push_back("q");
  for (int s = 0; s <= std::min(t_hi, table.t_max()); ++s) {
    table.for_each(s, [&](const Point& z, double q) {
      if (q == 0.0) return;
      std::vector<std::string> row = {std::to_string(s)};
      for (int k = 0; k < table.dim(); ++k) row.push_back(std::to_string(z[k]));
      row.push_back(format_number(q));
      t.rows.push_back(std::move(row));
    });
  }
  return t;
}

CsvTable correlation_table(const CorrelationResult& r, const std::string& digest) {
  CsvTable t;
  const bool spatial = r.mode == CorrelationMode::kSpatial;
  t.kind = spatial ? "correlation_spatial" : "correlation_temporal";
  t.digest = digest;
  t.complete = r.complete;
  t.columns = {"mode", "y", "norm", "s", "T", "n", "mean", "stderr", "closed_form", "exact_finite", "scale"};
  for (const auto& row : r.rows) {
    std::string y;
    for (int k = 0; k < row.y.dim(); ++k) y += (k ? ":" : "") + std::to_string(row.y[k]);
    t.rows.push_back({spatial ? "spatial" : "temporal", y, format_number(row.y.l2()), std::to_string(row.s),
                      std::to_string(r.t_proxy), std::to_string(r.n), format_number(row.mc), format_number(row.stderr_),
                      format_number(row.closed_form), format_number(row.exact_finite), format_number(row.scale)});
  }
  return t;
}

nlohmann::json fit_json(const RateFit& f) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [t, v] : f.points) pts.push_back({t, v});
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"half_width", f.half_width}, {"points", pts}};
}

nlohmann::json checks_json(const CheckReport& rep) {
  nlohmann::json j = {{"pass", rep.pass()}, {"rows", rep.rows().size()}, {"failures", rep.failures()}};
  if (const CheckRow* w = rep.worst()) {
    j["worst"] = {{"check", w->check}, {"inputs", w->inputs}, {"lhs", w->lhs}, {"rhs", w->rhs}, {"pass", w->pass}};
  }
  return j;
}

}  // namespace polymer
