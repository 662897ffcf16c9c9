#pragma once

// Serialization of results: locale-free CSV with 17 significant digits and
// JSON operator dumps, with readers for everything that is written.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ahtsim/experiments.hpp"
#include "ahtsim/spin_algebra.hpp"

namespace ahtsim {

/// Shortest text holding 17 significant digits; independent of locale.
std::string format_double(double v);
double parse_double(std::string_view text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);

/// Rows "tau_D,tau_dw,fidelity", tau_D outermost.
CsvTable scan_to_csv(const ScanResult& r);
ScanResult scan_from_csv(const CsvTable& t);

nlohmann::json operator_to_json(const OperatorSum& h);
OperatorSum operator_from_json(const nlohmann::json& j);

nlohmann::json scan_to_json(const ScanResult& r);
ScanResult scan_from_json(const nlohmann::json& j);

nlohmann::json recoupling_to_json(const RecouplingReport& r);
RecouplingReport recoupling_from_json(const nlohmann::json& j);

std::string read_text(const std::filesystem::path& path);
/// Writes through a temporary file and renames into place.
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ahtsim
