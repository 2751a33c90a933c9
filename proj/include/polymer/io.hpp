#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "polymer/checks.hpp"
#include "polymer/experiments.hpp"
#include "polymer/rw_kernel.hpp"

namespace polymer {

inline constexpr int kSchemaVersion = 1;
std::string tool_version();  // "polymer-lab/<version>"

// Shortest round-trip representation; NaN and infinities as nan/inf/-inf.
std::string format_number(double v);

struct CsvTable {
  int schema = 0;
  std::string tool;
  std::string digest;
  std::string kind;
  bool complete = true;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // ConfigError if absent
};

// First line: "# schema=1 tool=... digest=... kind=... status=complete|incomplete".
void write_csv(const std::filesystem::path& path, const CsvTable& table);
// Rejects a missing header, another schema version, or ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

CsvTable checks_table(const CheckReport& rep, const std::string& kind, const std::string& digest);
CsvTable scan_table(const std::vector<ScanRow>& rows, const std::string& kind, const std::string& digest, bool complete);
CsvTable delta_table(const std::vector<DeltaSample>& rows, const std::string& digest, bool complete);
CsvTable correlation_table(const CorrelationResult& r, const std::string& digest);
// Nonzero cells of blocks 0..t_hi: t, z1..zd, q.
CsvTable kernel_table_csv(const KernelTable& table, int t_hi, const std::string& digest);

nlohmann::json fit_json(const RateFit& f);
nlohmann::json checks_json(const CheckReport& rep);

// Writes through a temporary file and renames.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace polymer
