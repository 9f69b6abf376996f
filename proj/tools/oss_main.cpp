#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oss/runner.hpp"

namespace {

struct Args {
  std::string target;
  std::string out_dir;
  std::string variant;
  double h = 0.0;
  double t_end = 0.0;
  bool sweep = false;
  bool json = false;
};

void emit(const oss::RunReport& rep, bool json) {
  if (json) {
    std::cout << rep.to_json().dump(2) << "\n";
  } else {
    std::cout << rep.to_text();
  }
}

int do_check(const Args& a) {
  const oss::ScenarioSet set = oss::load_scenario_set(oss::read_scenario_document(a.target), a.variant);
  oss::RunReport rep = oss::cmd_check(set);
  rep.variant = a.variant;
  emit(rep, a.json);
  return rep.exit_code();
}

int do_run(const Args& a) {
  const oss::ScenarioSet set = oss::load_scenario_set(oss::read_scenario_document(a.target), a.variant);
  oss::RunOptions opts;
  if (a.h > 0.0) opts.h = a.h;
  if (a.t_end > 0.0) opts.t_end = a.t_end;
  opts.sweep = a.sweep;
  opts.keep_csv = !a.out_dir.empty();
  oss::RunReport rep = oss::cmd_run(set, opts);
  rep.variant = a.variant;
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    for (const auto& r : rep.runs) {
      std::string file = set.name + "__" + r.label + ".csv";
      for (char& c : file) {
        if (c == '/' || c == ' ') c = '_';
      }
      std::ofstream out(std::filesystem::path(a.out_dir) / file, std::ios::binary);
      if (!out) throw std::invalid_argument("cannot write " + file + " in " + a.out_dir);
      out << r.csv;
    }
  }
  emit(rep, a.json);
  return rep.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal steady-state control: scenario checks and closed-loop simulation"};
  app.require_subcommand(1);
  Args a;

  auto* check = app.add_subcommand("check", "Robustness, stabilizability and spectrum checks");
  check->add_option("scenario", a.target, "Bundled scenario name or JSON file")->required();
  check->add_option("--variant", a.variant, "Named variant inside the scenario file");
  check->add_flag("--json", a.json, "Machine-readable report");

  auto* run = app.add_subcommand("run", "Simulate every run of a scenario");
  run->add_option("scenario", a.target, "Bundled scenario name or JSON file")->required();
  run->set_help_flag("--help", "Print this help message and exit");
  run->add_option("--out", a.out_dir, "Directory for CSV traces");
  run->add_option("--h", a.h, "RK4 step override")->check(CLI::PositiveNumber);
  run->add_option("--t-end", a.t_end, "Horizon override")->check(CLI::PositiveNumber);
  run->add_option("--variant", a.variant, "Named variant inside the scenario file");
  run->add_flag("--sweep", a.sweep, "Repeat each run at every delta sample");
  run->add_flag("--json", a.json, "Machine-readable report");

  auto* list = app.add_subcommand("list", "Names of the bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) {
      for (const auto& name : oss::bundled_scenarios()) std::cout << name << "\n";
      return 0;
    }
    if (check->parsed()) return do_check(a);
    return do_run(a);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: scenario schema: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
