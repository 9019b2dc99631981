// Black-box checks of the command-line tool: flags, exit codes, stdout
// formatting and the files it writes. Every case runs the real binary in a
// subprocess.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support/check.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = COPLAN_CLI_PATH;
const std::string kFixtures = COPLAN_FIXTURE_DIR;

fs::path scratch_root() {
  return fs::temp_directory_path() / "coplan_cli_tests";
}

fs::path scratch(const std::string& name) {
  const fs::path dir = scratch_root() / name;
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr, interleaved
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const fs::path log = dir / "cli_output.txt";
  const std::string command =
      "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(command.c_str());
  CliResult result;
  if (status != -1 && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.output = slurp(log);
  return result;
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::string fixture(const std::string& name) {
  return kFixtures + "/" + name + ".json";
}

void plan_prints_the_allocation() {
  const fs::path dir = scratch("plan");
  const CliResult result = run_cli(
      "plan " + fixture("s1") + " --out-dir " + dir.string(), dir);
  CHECK_EQ(result.exit_code, 0);
  CHECK_TRUE(contains(result.output, "devices: d0, d1, d2"));
  CHECK_TRUE(contains(result.output, "x = (0, 4, 0)"));
  CHECK_TRUE(contains(result.output, "t = 8 s"));
  CHECK_TRUE(contains(result.output, "energy = 4 J"));
  CHECK_TRUE(contains(result.output, "payment = 4"));
  CHECK_EQ(slurp(dir / "plan.csv"),
           std::string("device,kind,share_mb,sensitive_share_mb,busy_time_s,"
                       "energy_j,payment\n"
                       "d0,initiator,0,0,0,0,0\n"
                       "d1,peer,4,0,8,4,4\n"
                       "d2,peer,0,0,0,0,0\n"));
}

void gamma_flag_switches_to_time_first() {
  const fs::path dir = scratch("plan_inf");
  const CliResult result = run_cli(
      "plan " + fixture("s1") + " --gamma inf --out-dir " + dir.string(), dir);
  CHECK_EQ(result.exit_code, 0);
  CHECK_TRUE(contains(result.output, "gamma = inf"));
  CHECK_TRUE(contains(result.output, "t = 1.33333333 s"));
}

void sweep_writes_the_tradeoff_curve() {
  const fs::path dir = scratch("sweep");
  const CliResult result = run_cli(
      "sweep " + fixture("s1") + " --gammas 0,1,inf --out-dir " + dir.string(),
      dir);
  CHECK_EQ(result.exit_code, 0);
  CHECK_TRUE(contains(result.output, "gamma,t,energy,payment,objective"));
  CHECK_EQ(slurp(dir / "pareto.csv"),
           std::string("gamma,t,energy,payment,objective\n"
                       "0,8,4,4,4\n"
                       "1,4,8,2,12\n"
                       "inf,1.33333333,13.3333333,3.33333333,1.33333333\n"));
}

void baseline_spreads_the_work_evenly() {
  const fs::path dir = scratch("baseline");
  const CliResult result = run_cli(
      "baseline " + fixture("s1") + " --out-dir " + dir.string(), dir);
  CHECK_EQ(result.exit_code, 0);
  CHECK_TRUE(contains(result.output,
                      "x = (1.33333333, 1.33333333, 1.33333333)"));
  CHECK_TRUE(fs::exists(dir / "baseline.csv"));
}

void simulate_is_deterministic_per_seed() {
  const fs::path dir_a = scratch("sim_a");
  const fs::path dir_b = scratch("sim_b");
  const std::string args = "simulate " + fixture("pipeline_cloudlet") +
                           " --seed 7 --out-dir ";
  const CliResult first = run_cli(args + dir_a.string(), dir_a);
  const CliResult second = run_cli(args + dir_b.string(), dir_b);
  CHECK_EQ(first.exit_code, 0);
  CHECK_EQ(second.exit_code, 0);
  const std::string trace_a = slurp(dir_a / "trace.csv");
  CHECK_TRUE(!trace_a.empty());
  CHECK_TRUE(trace_a == slurp(dir_b / "trace.csv"));
  CHECK_TRUE(contains(slurp(dir_a / "report.json"), "\"seed\": 7"));
}

void infeasible_scenarios_exit_with_three() {
  const fs::path dir = scratch("infeasible");
  const CliResult result = run_cli(
      "simulate " + fixture("infeasible_energy") + " --out-dir " + dir.string(),
      dir);
  CHECK_EQ(result.exit_code, 3);
  CHECK_TRUE(contains(result.output, "status: infeasible (energy_budgets)"));
  // The report still lands on disk for inspection.
  CHECK_TRUE(contains(slurp(dir / "report.json"), "\"energy_budgets\""));
}

void bad_invocations_map_to_exit_codes() {
  const fs::path dir = scratch("errors");
  CHECK_EQ(run_cli("plan " + kFixtures + "/does_not_exist.json", dir)
               .exit_code,
           4);  // io error
  CHECK_EQ(run_cli("plan " + fixture("no_task"), dir).exit_code,
           4);  // config error: nothing to plan
  CHECK_EQ(run_cli("plan " + fixture("s1") + " --frobnicate", dir).exit_code,
           2);  // unknown flag
  CHECK_EQ(run_cli("", dir).exit_code, 2);  // a subcommand is required
  const CliResult gamma = run_cli(
      "plan " + fixture("s1") + " --gamma nope --out-dir " + dir.string(), dir);
  CHECK_EQ(gamma.exit_code, 2);
  CHECK_TRUE(contains(gamma.output, "gamma must be"));
  const CliResult help = run_cli("--help", dir);
  CHECK_EQ(help.exit_code, 0);
  CHECK_TRUE(contains(help.output, "coplan"));
}

void pipeline_scenarios_print_the_placement() {
  const fs::path dir = scratch("pipeline");
  const CliResult result = run_cli("plan " + fixture("pipeline_cloudlet"), dir);
  CHECK_EQ(result.exit_code, 0);
  CHECK_TRUE(contains(result.output, "stage sense -> d0"));
  CHECK_TRUE(contains(result.output, "stage detect -> cl"));
  CHECK_TRUE(contains(result.output, "stage classify -> cl"));
  CHECK_TRUE(contains(result.output, "expected time = 0.1312 s"));
  CHECK_TRUE(contains(result.output, "mobile energy = 0.0376 J"));
}

void transfer_augmentation_can_be_disabled() {
  const fs::path dir = scratch("no_transfer");
  const CliResult with = run_cli(
      "plan " + fixture("s1_bt") + " --out-dir " + dir.string(), dir);
  CHECK_EQ(with.exit_code, 0);
  CHECK_TRUE(contains(with.output, "t = 5.95121951 s"));
  const CliResult without = run_cli(
      "plan " + fixture("s1_bt") + " --no-transfer --out-dir " + dir.string(),
      dir);
  CHECK_EQ(without.exit_code, 0);
  // Raw rates make this the classic three-device split again.
  CHECK_TRUE(contains(without.output, "t = 4 s"));
  CHECK_TRUE(contains(without.output, "x = (2, 2, 0)"));
}

}  // namespace

int main() {
  std::error_code ec;
  fs::remove_all(scratch_root(), ec);
  plan_prints_the_allocation();
  gamma_flag_switches_to_time_first();
  sweep_writes_the_tradeoff_curve();
  baseline_spreads_the_work_evenly();
  simulate_is_deterministic_per_seed();
  infeasible_scenarios_exit_with_three();
  bad_invocations_map_to_exit_codes();
  pipeline_scenarios_print_the_placement();
  transfer_augmentation_can_be_disabled();
  return testsupport::summary("cli");
}
