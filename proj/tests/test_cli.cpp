#include <doctest.h>

#include "helpers.hpp"
#include "nfdm/io.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <algorithm>
#include <fstream>

using namespace nfdm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("nfdm_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

int run(const std::string& args, const std::string& out = "/dev/null", const std::string& err = "/dev/null") {
  const std::string cmd = std::string(NFDM_CLI_PATH) + " " + args + " > " + out + " 2> " + err;
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(read_text_file(path)); }

const char* kS4 =
    R"({"discrete":[{"re_lambda":0,"im_lambda":0.25,"re_amp":1,"im_amp":0},{"re_lambda":0,"im_lambda":0.5,"re_amp":1,"im_amp":0}]})";

}  // namespace

TEST_CASE("cli nft finds the sech eigenvalue") {
  TempDir d;
  save_signal(d / "sech.csv", test::sech_signal(TimeGrid::span(-20, 20, 1.0 / 64)));
  REQUIRE(run("nft " + d / "sech.csv" + " -o " + d / "spec.json") == 0);
  const auto j = read_json(d / "spec.json");
  REQUIRE(j["discrete"].size() == 1);
  CHECK(std::abs(j["discrete"][0]["re_lambda"].get<double>()) < 1e-6);
  CHECK(std::abs(j["discrete"][0]["im_lambda"].get<double>() - 0.5) < 1e-4);
  CHECK(j["diagnostics"]["winding_number"] == 1);
}

TEST_CASE("cli nft of a zero signal") {
  TempDir d;
  save_signal(d / "zero.csv", TimeSignal::zeros(TimeGrid(64, -4, 0.125)));
  REQUIRE(run("nft " + d / "zero.csv" + " -o " + d / "spec.json") == 0);
  CHECK(read_json(d / "spec.json")["discrete"].empty());
}

TEST_CASE("cli rejects malformed input") {
  TempDir d;
  write_file(d / "bad.csv", "t,re,im\n0,1,0\n0.1,abc,0\n");
  const std::string err = d / "err.txt";
  CHECK(run("nft " + d / "bad.csv", "/dev/null", err) == 2);
  CHECK(read_text_file(err).find("line 3") != std::string::npos);
  CHECK(run("nft " + d / "missing.csv") == 2);
  CHECK(run("nft") == 1);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("cli inverse methods agree") {
  TempDir d;
  write_file(d / "s4.json", kS4);
  const std::string grid = " --t-min -30 --t-max 30 --dt 0.00390625";
  REQUIRE(run("inft " + d / "s4.json" + " -o " + d / "a.csv" + grid) == 0);
  REQUIRE(run("inft " + d / "s4.json" + " --method rh -o " + d / "b.csv" + grid) == 0);
  const TimeSignal a = load_signal(d / "a.csv"), b = load_signal(d / "b.csv");
  REQUIRE(a.size() == b.size());
  CHECK(test::max_abs_diff(a, b) < 1e-8);

  write_file(d / "empty.json", R"({"discrete":[]})");
  REQUIRE(run("inft " + d / "empty.json" + " -o " + d / "z.csv --t-min -1 --t-max 1 --dt 0.5") == 0);
  CHECK(load_signal(d / "z.csv").samples.cwiseAbs().maxCoeff() == 0.0);

  nlohmann::json four = {{"discrete", nlohmann::json::array()}};
  for (int i = 1; i <= 4; ++i)
    four["discrete"].push_back({{"re_lambda", 0}, {"im_lambda", 0.2 * i}, {"re_amp", 1}, {"im_amp", 0}});
  write_file(d / "four.json", four.dump());
  const std::string err = d / "err.txt";
  CHECK(run("inft " + d / "four.json" + " --method hirota -o " + d / "h.csv", "/dev/null", err) == 2);
  CHECK(read_text_file(err).find("UnsupportedOrder") != std::string::npos);
}

TEST_CASE("cli propagate and backpropagate") {
  TempDir d;
  const TimeSignal s = test::sech_signal(TimeGrid(512, -16, 1.0 / 16), 0.8);
  save_signal(d / "in.json", s);
  REQUIRE(run("propagate " + d / "in.json" + " -o " + d / "out.json --z 1 --steps 100") == 0);
  REQUIRE(run("propagate " + d / "out.json" + " -o " + d / "back.json --z 1 --steps 100 --backward") == 0);
  CHECK(test::max_abs_diff(load_signal(d / "back.json"), s) < 1e-9);
}

TEST_CASE("cli stats") {
  TempDir d;
  save_signal(d / "sech.csv", test::sech_signal(TimeGrid::span(-20, 20, 1.0 / 64)));
  REQUIRE(run("stats " + d / "sech.csv --center origin --lambda 0 0.5", d / "out.json") == 0);
  const auto j = read_json(d / "out.json");
  CHECK(j["energy"].get<double>() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(j["eigenvalue_variance_per_density"].get<double>() > 0);
}

TEST_CASE("cli experiment output is reproducible") {
  TempDir d;
  write_file(d / "cfg.json", R"({"experiment":"eig-noise","trials":16,"sweep":[30],"link":{"n_steps":10}})");
  REQUIRE(run("--threads 1 experiment " + d / "cfg.json" + " --output-dir " + d / "a") == 0);
  REQUIRE(run("--threads 3 experiment " + d / "cfg.json" + " --output-dir " + d / "b") == 0);
  const std::string a = read_text_file(d / "a/eig-noise.csv");
  CHECK(a == read_text_file(d / "b/eig-noise.csv"));
  const std::string first = a.substr(0, a.find('\n'));
  CHECK(first.rfind("# nfdm-experiment eig-noise schema 1 config ", 0) == 0);
  CHECK(first.size() == std::string("# nfdm-experiment eig-noise schema 1 config ").size() + 16);
  const auto s = read_json(d / "a/eig-noise_summary.json");
  CHECK(s["config_hash"].get<std::string>() == first.substr(first.size() - 16));
  // 16 trials, one row each, after the two header lines
  CHECK(std::count(a.begin(), a.end(), '\n') == 18);
}

TEST_CASE("cli experiment config validation") {
  TempDir d;
  const std::string err = d / "err.txt";
  write_file(d / "unknown.json", R"({"experiment":"eig-noise","trails":10})");
  CHECK(run("experiment " + d / "unknown.json", "/dev/null", err) == 2);
  CHECK(read_text_file(err).find("trails") != std::string::npos);
  write_file(d / "type.json", R"({"experiment":"wdm-baseline","wdm":{"n_spans":"ten"}})");
  CHECK(run("experiment " + d / "type.json") == 2);
  write_file(d / "value.json", R"({"experiment":"wdm-baseline","wdm":{"n_channels":4}})");
  CHECK(run("experiment " + d / "value.json") == 2);
  write_file(d / "sweep.json", R"({"experiment":"signalset-a","sweep":[]})");
  CHECK(run("experiment " + d / "sweep.json") == 2);
  write_file(d / "id.json", R"({"experiment":"nope"})");
  CHECK(run("experiment " + d / "id.json") == 2);
  write_file(d / "syntax.json", R"({"experiment":)");
  CHECK(run("experiment " + d / "syntax.json") == 2);
  // nothing was written for the rejected configs
  CHECK_FALSE(fs::exists("wdm-baseline.csv"));
}

TEST_CASE("cli signal set A noiseless experiment") {
  TempDir d;
  write_file(d / "cfg.json", R"({"experiment":"signalset-a","noiseless":true,"trials":2,"bootstrap":0})");
  REQUIRE(run("experiment " + d / "cfg.json" + " --output-dir " + d.path.string()) == 0);
  const auto s = read_json(d / "signalset-a_summary.json");
  CHECK(s["points"][0]["diagonal_fraction"].get<double>() == 1.0);
  CHECK(fs::exists(d / "signalset-a_summary.csv"));
}
