// End-to-end checks of the command-line tool: exit codes, JSON report shape
// and byte-level determinism of payloads and CSV outputs.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

namespace {

const std::string kCli = CCAG_CLI_PATH;
const std::string kData = CCAG_DATA_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  std::string cmd = kCli + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), got);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

using nlohmann::json;

json parse_report(const RunResult& result) {
  auto doc = json::parse(result.out, nullptr, false);
  REQUIRE_FALSE(doc.is_discarded());
  CHECK(doc.contains("command"));
  CHECK(doc.contains("config"));
  CHECK(doc.contains("payload"));
  CHECK(doc.contains("warnings"));
  CHECK(doc.contains("wall_time_ms"));
  return doc;
}

}  // namespace

TEST_CASE("solve emits the symmetric closed form") {
  auto result = run("solve " + kData + "/scenarios/symmetric2.json");
  CHECK(result.exit_code == 0);
  auto doc = parse_report(result);
  CHECK(doc["command"] == "solve");
  double t1 = doc["payload"]["coalitions"]["S1"]["efforts"]["p1"].get<double>();
  CHECK(t1 == doctest::Approx(std::sqrt(0.125)).epsilon(1e-6));
  CHECK(doc["payload"]["coalitions"]["S1"]["kind"] == "pure-converged");
  // lone coalition wins with certainty
  CHECK(doc["payload"]["win_probabilities"]["S1"].get<double>() == doctest::Approx(1.0));
  CHECK(doc["payload"]["coalition_choice"]["p1"]["chosen"] == "S1");
}

TEST_CASE("two-layer covers every coalition") {
  auto result = run("two-layer " + kData + "/scenarios/two_coalitions.json");
  CHECK(result.exit_code == 0);
  auto doc = parse_report(result);
  CHECK(doc["payload"]["coalitions"].contains("S1"));
  CHECK(doc["payload"]["coalitions"].contains("S2"));
  double p1 = doc["payload"]["win_probabilities"]["S1"].get<double>();
  double p2 = doc["payload"]["win_probabilities"]["S2"].get<double>();
  CHECK(p1 + p2 == doctest::Approx(1.0));
}

TEST_CASE("payloads are byte-deterministic for a fixed seed") {
  SUBCASE("mixed solve") {
    std::string args = "mixed " + kData +
                       "/scenarios/symmetric2.json --grid 31 --max-iter 300 --tol 1e-3 --seed 11";
    auto a = run(args);
    auto b = run(args);
    CHECK(parse_report(a)["payload"].dump() == parse_report(b)["payload"].dump());
  }
  SUBCASE("woa samples") {
    std::string args = "woa --prize 1 --samples 64 --seed 7";
    auto a = run(args);
    auto b = run(args);
    auto pa = parse_report(a)["payload"];
    CHECK(pa.dump() == parse_report(b)["payload"].dump());
    CHECK(pa["samples"].size() == 64);
  }
}

TEST_CASE("woa writes a deterministic sample file") {
  auto dir1 = std::filesystem::temp_directory_path() / "ccag_cli_woa1";
  auto dir2 = std::filesystem::temp_directory_path() / "ccag_cli_woa2";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
  CHECK(run("woa --prize 2 --samples 100 --seed 3 --out-dir " + dir1.string()).exit_code == 0);
  CHECK(run("woa --prize 2 --samples 100 --seed 3 --out-dir " + dir2.string()).exit_code == 0);
  CHECK(slurp(dir1 / "woa_samples.csv") == slurp(dir2 / "woa_samples.csv"));
}

TEST_CASE("woa fictitious play approaches the exponential mixture") {
  auto result = run("woa --prize 1 --fp --grid 101 --t-max 5 --max-iter 2000 --tol 2e-3");
  CHECK(result.exit_code == 0);
  auto doc = parse_report(result);
  CHECK(doc["payload"]["fictitious_play"]["sup_distance_to_exponential"].get<double>() < 0.08);
}

TEST_CASE("shapley and core on the bundled game") {
  auto result = run("shapley " + kData + "/games/two_player.json");
  CHECK(result.exit_code == 0);
  auto doc = parse_report(result);
  CHECK(doc["payload"]["shapley"][0].get<double>() == doctest::Approx(1.5));
  CHECK(doc["payload"]["shapley"][1].get<double>() == doctest::Approx(2.5));

  result = run("core " + kData + "/games/two_player.json --allocation 1.5,2.5");
  CHECK(result.exit_code == 0);
  CHECK(parse_report(result)["payload"]["in_core"] == true);

  result = run("core " + kData + "/games/two_player.json --allocation 0.5,0.5");
  CHECK(result.exit_code == 0);
  auto payload = parse_report(result)["payload"];
  CHECK(payload["in_core"] == false);
}

TEST_CASE("casestudy pipeline and figure files") {
  auto dir1 = std::filesystem::temp_directory_path() / "ccag_cli_cs1";
  auto dir2 = std::filesystem::temp_directory_path() / "ccag_cli_cs2";
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);

  auto result = run("casestudy " + kData + "/casestudy.json --out-dir " + dir1.string());
  CHECK(result.exit_code == 0);
  auto doc = parse_report(result);
  CHECK(doc["payload"]["chosen_coalition"] == "crypto");
  CHECK(doc["payload"]["estimates"].size() == 6);
  CHECK(doc["payload"]["endurance"].contains("traditional"));

  CHECK(run("casestudy " + kData + "/casestudy.json --out-dir " + dir2.string()).exit_code == 0);
  for (const char* name : {"figure1_sharpe.csv", "figure2_endurance.csv", "figure3_shares.csv"}) {
    INFO(name);
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }
  // figure 3 starts with the header and contains the late-starting asset only
  // from 2020 onward
  auto fig3 = slurp(dir1 / "figure3_shares.csv");
  CHECK(fig3.rfind("year,asset,share\n", 0) == 0);
  CHECK(fig3.find("2018,solana") == std::string::npos);
  CHECK(fig3.find("2021,solana") != std::string::npos);
}

TEST_CASE("counterfactual reports deltas and winner changes") {
  auto result = run("counterfactual " + kData +
                    "/scenarios/two_coalitions.json --target reward --multiplier 1.0");
  CHECK(result.exit_code == 0);
  auto doc = parse_report(result);
  for (const auto& [pid, d] : doc["payload"]["deltas"]["efforts"].items())
    CHECK(std::abs(d.get<double>()) < 1e-9);
  CHECK(doc["payload"]["winner_changed"] == false);

  result = run("counterfactual " + kData +
               "/scenarios/two_coalitions.json --target cost --player a1 --multiplier 4");
  CHECK(result.exit_code == 0);
  doc = parse_report(result);
  CHECK(doc["payload"]["deltas"]["efforts"]["a1"].get<double>() < 0.0);
}

TEST_CASE("exit codes distinguish input failures") {
  CHECK(run("solve " + kData + "/scenarios/missing.json").exit_code == 2);
  CHECK(run("solve " + kData + "/scenarios/malformed.json").exit_code == 3);
  CHECK(run("solve " + kData + "/scenarios/overlap.json").exit_code == 4);
  CHECK(run("frobnicate").exit_code == 64);
  CHECK(run("solve").exit_code == 64);
  CHECK(run("--help").exit_code == 0);
  CHECK(run("counterfactual " + kData +
            "/scenarios/two_coalitions.json --target reward --multiplier 2 --coalition nope")
            .exit_code == 4);
}
