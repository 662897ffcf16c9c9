#include "ahtsim/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace ahtsim {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf, res.ptr};
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw std::invalid_argument("not a number: '" + std::string(text) + "'");
  }
  return v;
}

// ---------------------------------------------------------------------------
// CSV

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::out_of_range("no CSV column '" + std::string(name) + "'");
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  return parse_double(rows.at(row).at(column(name)));
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) {
        throw std::invalid_argument("CSV line " + std::to_string(line_no) + " has " +
                                    std::to_string(cells.size()) + " cells, expected " +
                                    std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw std::invalid_argument("CSV has no header");
  return t;
}

CsvTable scan_to_csv(const ScanResult& r) {
  CsvTable t;
  t.header = {r.x_axis.label, r.y_axis.label, "fidelity"};
  for (std::size_t i = 0; i < r.x_axis.values.size(); ++i) {
    for (std::size_t j = 0; j < r.y_axis.values.size(); ++j) {
      t.rows.push_back({format_double(r.x_axis.values[i]), format_double(r.y_axis.values[j]),
                        format_double(r.values(static_cast<Eigen::Index>(i),
                                               static_cast<Eigen::Index>(j)))});
    }
  }
  return t;
}

ScanResult scan_from_csv(const CsvTable& t) {
  if (t.header.size() != 3) throw std::invalid_argument("scan CSV needs three columns");
  ScanResult r;
  r.x_axis.label = t.header[0];
  r.y_axis.label = t.header[1];
  // x is outermost: y repeats until x changes
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    const double x = parse_double(t.rows[row][0]);
    const double y = parse_double(t.rows[row][1]);
    if (xs.empty() || xs.back() != x) xs.push_back(x);
    if (xs.size() == 1) ys.push_back(y);
  }
  if (xs.empty() || xs.size() * ys.size() != t.rows.size()) {
    throw std::invalid_argument("scan CSV is not a rectangular grid");
  }
  r.x_axis.values = xs;
  r.y_axis.values = ys;
  r.values.resize(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t row = 0; row < t.rows.size(); ++row) {
    const std::size_t i = row / ys.size();
    const std::size_t j = row % ys.size();
    if (parse_double(t.rows[row][0]) != xs[i] || parse_double(t.rows[row][1]) != ys[j]) {
      throw std::invalid_argument("scan CSV rows are out of grid order");
    }
    r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        parse_double(t.rows[row][2]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json operator_to_json(const OperatorSum& h) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [w, c] : h.terms()) {
    terms.push_back({{"word", w.str()}, {"re", c.real()}, {"im", c.imag()}});
  }
  return {{"n", h.spin_count()}, {"terms", terms}};
}

OperatorSum operator_from_json(const nlohmann::json& j) {
  const auto n = j.at("n").get<std::size_t>();
  OperatorSum h(n);
  for (const auto& t : j.at("terms")) {
    const SpinWord w = SpinWord::parse(t.at("word").get<std::string>());
    if (w.size() != n) throw DimensionError("operator word length does not match n");
    h.add_term(w, Complex(t.at("re").get<double>(), t.value("im", 0.0)));
  }
  return h;
}

nlohmann::json scan_to_json(const ScanResult& r) {
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.values.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.values.cols()));
    for (Eigen::Index j = 0; j < r.values.cols(); ++j) row[static_cast<std::size_t>(j)] = r.values(i, j);
    values.push_back(row);
  }
  return {{"x_axis", {{"label", r.x_axis.label}, {"values", r.x_axis.values}}},
          {"y_axis", {{"label", r.y_axis.label}, {"values", r.y_axis.values}}},
          {"values", values},
          {"metadata", r.metadata}};
}

ScanResult scan_from_json(const nlohmann::json& j) {
  ScanResult r;
  r.x_axis = {j.at("x_axis").at("label").get<std::string>(),
              j.at("x_axis").at("values").get<std::vector<double>>()};
  r.y_axis = {j.at("y_axis").at("label").get<std::string>(),
              j.at("y_axis").at("values").get<std::vector<double>>()};
  const auto& values = j.at("values");
  if (values.size() != r.x_axis.values.size()) throw std::invalid_argument("scan rows mismatch");
  r.values.resize(static_cast<Eigen::Index>(r.x_axis.values.size()),
                  static_cast<Eigen::Index>(r.y_axis.values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto row = values[i].get<std::vector<double>>();
    if (row.size() != r.y_axis.values.size()) throw std::invalid_argument("scan columns mismatch");
    for (std::size_t k = 0; k < row.size(); ++k) {
      r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  }
  r.metadata = j.value("metadata", nlohmann::json::object());
  return r;
}

nlohmann::json recoupling_to_json(const RecouplingReport& r) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"a", p.a},
                     {"b", p.b},
                     {"effective", operator_to_json(p.effective)},
                     {"expected", operator_to_json(p.expected)},
                     {"deviation_norm", p.deviation_norm}});
  }
  nlohmann::json j = {{"target_pair", {r.target_pair.first, r.target_pair.second}},
                      {"pairs", pairs},
                      {"cycle_time", r.cycle_time},
                      {"cycles", r.cycles},
                      {"evolution_time", r.evolution_time},
                      {"max_spectator_deviation", r.max_spectator_deviation()}};
  auto opt = [&j](const char* key, const std::optional<double>& v) {
    j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  opt("target_fidelity", r.target_fidelity);
  opt("spectator_infidelity", r.spectator_infidelity);
  opt("spectator_phase_error", r.spectator_phase_error);
  return j;
}

RecouplingReport recoupling_from_json(const nlohmann::json& j) {
  RecouplingReport r;
  r.target_pair = {j.at("target_pair").at(0).get<std::size_t>(),
                   j.at("target_pair").at(1).get<std::size_t>()};
  for (const auto& p : j.at("pairs")) {
    r.pairs.push_back({p.at("a").get<std::size_t>(), p.at("b").get<std::size_t>(),
                       operator_from_json(p.at("effective")), operator_from_json(p.at("expected")),
                       p.at("deviation_norm").get<double>()});
  }
  r.cycle_time = j.at("cycle_time").get<double>();
  r.cycles = j.at("cycles").get<std::size_t>();
  r.evolution_time = j.at("evolution_time").get<double>();
  auto opt = [&j](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
  };
  r.target_fidelity = opt("target_fidelity");
  r.spectator_infidelity = opt("spectator_infidelity");
  r.spectator_phase_error = opt("spectator_phase_error");
  return r;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace ahtsim
