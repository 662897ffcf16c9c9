#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <random>

#include "ahtsim/config.hpp"
#include "ahtsim/io.hpp"

using namespace ahtsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ahtsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<Diagnostic> diagnose(const json& doc) { return validate(RunConfig{doc}); }

json small_scan() {
  return {{"seed", 5},
          {"experiment",
           {{"type", "fidelity-scan"}, {"tau_D", {1e-4, 1e-3}}, {"tau_dw", {{"min", 1e-3}, {"max", 1e-2}, {"count", 2}}},
            {"tau", 1e-6}, {"seeds", 2}}},
          {"sequence", {{"notation", "[Z,Y,X][Z,-Y,X][Z,Y,-X][Z,-Y,-X]"}, {"tau", 1e-6}}},
          {"output", {{"name", "scan"}, {"format", "csv"}}}};
}

}  // namespace

TEST_CASE("numbers print with 17 significant digits and read back exactly") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1e10, 1e10);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, i % 40 - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  CHECK_THROWS(parse_double("1.0x"));
  CHECK_THROWS(parse_double(""));
}

TEST_CASE("CSV tables round-trip") {
  const auto t = parse_csv("a,b\n1,2\n3,4\n");
  CHECK(t.header == std::vector<std::string>{"a", "b"});
  CHECK(t.number(1, "b") == 4.0);
  CHECK(t.str() == "a,b\n1,2\n3,4\n");
  CHECK_THROWS(t.column("c"));
  CHECK_THROWS(parse_csv("a,b\n1\n"));

  ScanResult r;
  r.x_axis = {"tau_D", {1e-4, 1e-3}};
  r.y_axis = {"tau_dw", {0.1, 0.2, 0.3}};
  r.values = Eigen::MatrixXd{{0.9, 0.8, 0.7}, {0.6, 0.5, 1.0 / 3}};
  const CsvTable csv = scan_to_csv(r);
  CHECK(csv.header == std::vector<std::string>{"tau_D", "tau_dw", "fidelity"});
  CHECK(csv.rows.size() == 6);
  CHECK(csv.rows[1][1] == "0.20000000000000001");
  const ScanResult back = scan_from_csv(parse_csv(csv.str()));
  CHECK(back.values == r.values);
  CHECK(back.x_axis.values == r.x_axis.values);
  CHECK(back.y_axis.values == r.y_axis.values);
}

TEST_CASE("operators, scans and recoupling reports round-trip through JSON") {
  OperatorSum h(3);
  h.add_term(SpinWord::parse("XEZ"), Complex(0.1, -2.0));
  h.add_term(SpinWord::parse("EEY"), 1.0 / 3);
  const json j = operator_to_json(h);
  CHECK(j.at("n") == 3);
  CHECK(operator_from_json(json::parse(j.dump())).terms() == h.terms());
  CHECK_THROWS(operator_from_json(json{{"n", 2}, {"terms", {{{"word", "XXX"}, {"re", 1.0}, {"im", 0.0}}}}}));

  ScanResult r;
  r.x_axis = {"tau_D", {1e-4}};
  r.y_axis = {"tau_dw", {1e-3, 1e-2}};
  r.values = Eigen::MatrixXd{{0.99, 0.5}};
  r.metadata = {{"k", "v"}};
  const ScanResult rs = scan_from_json(json::parse(scan_to_json(r).dump()));
  CHECK(rs.values == r.values);
  CHECK(rs.metadata == r.metadata);

  RecouplingParams p;
  p.evolve = false;
  const RecouplingReport rep = recoupling_check(p);
  const RecouplingReport back = recoupling_from_json(json::parse(recoupling_to_json(rep).dump()));
  CHECK(back.target_pair == rep.target_pair);
  REQUIRE(back.pairs.size() == rep.pairs.size());
  CHECK(back.pairs[0].effective.terms() == rep.pairs[0].effective.terms());
  CHECK(back.cycle_time == rep.cycle_time);
  CHECK_FALSE(back.target_fidelity.has_value());
}

TEST_CASE("files are written whole") {
  const fs::path dir = scratch_dir("io");
  write_text(dir / "a.txt", "hello\n");
  CHECK(read_text(dir / "a.txt") == "hello\n");
  write_text(dir / "a.txt", "bye");
  CHECK(read_text(dir / "a.txt") == "bye");
  CHECK_THROWS(read_text(dir / "missing.txt"));
}

TEST_CASE("validation points at the offending field") {
  json doc = small_scan();
  CHECK(diagnose(doc).empty());

  doc["sequence"]["notation"] = "[Z,Q,X]";
  auto d = diagnose(doc);
  REQUIRE(d.size() == 1);
  CHECK(d[0].path == "/sequence/notation");
  CHECK(d[0].message.find("column 4") != std::string::npos);

  doc = small_scan();
  doc["experiment"]["type"] = "nope";
  d = diagnose(doc);
  REQUIRE(d.size() == 1);
  CHECK(d[0].path == "/experiment/type");

  doc = small_scan();
  doc["experiment"]["tau_D"] = json::array();
  CHECK(diagnose(doc).at(0).path == "/experiment/tau_D");

  doc = small_scan();
  doc["output"]["format"] = "xml";
  CHECK(diagnose(doc).at(0).path == "/output/format");

  json rec = preset("recouple3").document;
  rec["experiment"]["k"] = 3;
  d = diagnose(rec);
  REQUIRE(d.size() == 1);
  CHECK(d[0].path == "/experiment/k");
  CHECK(d[0].str().rfind("/experiment/k: ", 0) == 0);

  rec = preset("recouple3").document;
  rec["experiment"]["l"] = 0;
  CHECK(diagnose(rec).at(0).path == "/experiment/l");

  CHECK(diagnose(json::array()).at(0).path.empty());
  CHECK_THROWS_AS(RunConfig::parse("{\"a\": "), ConfigParseError);
}

TEST_CASE("presets validate") {
  CHECK(preset_names().size() == 4);
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    CHECK(diagnose(preset(name).document).empty());
  }
  CHECK_THROWS_AS(preset("fig3"), std::out_of_range);
}

TEST_CASE("runs write a result file and a manifest") {
  const fs::path dir = scratch_dir("run");
  RunOptions o;
  o.out_dir = dir;
  const RunOutcome out = run(preset("mrev16-offsets"), o);
  CHECK(out.result_file == dir / "mrev16-offsets.json");
  CHECK(out.manifest_file == dir / "mrev16-offsets.manifest.json");
  const json result = json::parse(read_text(out.result_file));
  REQUIRE(result.at("results").size() == 3);
  CHECK(operator_from_json(result["results"][0]["average"]).coefficient(SpinWord::parse("Z")) == Complex(1.0 / 3));
  const json manifest = json::parse(read_text(out.manifest_file));
  CHECK(manifest.at("config") == preset("mrev16-offsets").document);
  CHECK(manifest.contains("wall_time_s"));

  const RunOutcome t1 = run(preset("table1"), o);
  const json table = json::parse(read_text(t1.result_file));
  CHECK(table.at("results").size() == 16);

  const RunOutcome rc = run(preset("recouple3"), o);
  const RecouplingReport rep = recoupling_from_json(json::parse(read_text(rc.result_file)));
  CHECK(rep.max_spectator_deviation() == 0.0);
  CHECK(*rep.target_fidelity >= 0.99);

  json bad = small_scan();
  bad["experiment"]["seeds"] = 0;
  CHECK_THROWS_AS(run(RunConfig{bad}, o), std::invalid_argument);
}

TEST_CASE("output directory comes from the option, the config, then the environment") {
  const fs::path a = scratch_dir("dir_a"), b = scratch_dir("dir_b"), c = scratch_dir("dir_c");
  json doc = preset("mrev16-offsets").document;
  doc["output"]["dir"] = b.string();
  ::setenv(kOutputDirEnv, c.string().c_str(), 1);
  RunOptions o;
  o.out_dir = a;
  CHECK(run(RunConfig{doc}, o).result_file.parent_path() == a);
  CHECK(run(RunConfig{doc}).result_file.parent_path() == b);
  doc["output"].erase("dir");
  CHECK(run(RunConfig{doc}).result_file.parent_path() == c);
  ::unsetenv(kOutputDirEnv);
}

TEST_CASE("equal seeds give byte-identical scan CSV") {
  const fs::path a = scratch_dir("det_a"), b = scratch_dir("det_b");
  RunOptions oa, ob;
  oa.out_dir = a;
  ob.out_dir = b;
  ob.threads = 2;
  const auto ra = run(RunConfig{small_scan()}, oa);
  const auto rb = run(RunConfig{small_scan()}, ob);
  CHECK(read_text(ra.result_file) == read_text(rb.result_file));
  const ScanResult s = scan_from_csv(parse_csv(read_text(ra.result_file)));
  CHECK(s.values.rows() == 2);
  CHECK(s.values.cols() == 2);
  RunOptions oc = oa;
  oc.seed = 99;
  oc.out_dir = scratch_dir("det_c");
  CHECK(read_text(run(RunConfig{small_scan()}, oc).result_file) != read_text(ra.result_file));
}
