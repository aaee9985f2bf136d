#include <catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(BRAN_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult res;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf;
    while (std::size_t n = fread(buf.data(), 1, buf.size(), pipe))
        res.stdout_text.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WEXITSTATUS(status);
    return res;
}

std::string write_config(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream f(path);
    f << body;
    return path.string();
}

}  // namespace

TEST_CASE("latency subcommand emits the latency key") {
    const std::string cfg = write_config(
        "bran_cli_test_cfg.json",
        R"({"lambda_a":0.4,"lambda_b":25,"lambda_c":1,"s":4})");
    const auto res = run_cli("latency --config " + cfg + " --n-confirmations 3");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("\"latency\":") != std::string::npos);
    CHECK(res.stdout_text.find("\"relative_to\":\"T_c\"") != std::string::npos);
}

TEST_CASE("missing config file exits 2") {
    const auto res = run_cli("latency --config /nonexistent/cfg.json");
    CHECK(res.exit_code == 2);
}

TEST_CASE("unstable configuration exits 3") {
    const auto res = run_cli("latency --lambda_a 8 --lambda_b 25 --lambda_c 1 --s 4");
    CHECK(res.exit_code == 3);
}

TEST_CASE("unknown flag exits 2") {
    const auto res = run_cli("latency --definitely-not-a-flag 1");
    CHECK(res.exit_code == 2);
}

TEST_CASE("identical argv and seed give byte-identical output") {
    const std::string args =
        "security --beta 0.2 --n-confirmations 2 --mc-trials 20000 --seed 9";
    const auto a = run_cli(args);
    const auto b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
    CHECK(a.stdout_text.find("\"monte_carlo\":") != std::string::npos);
}

TEST_CASE("tradeoff emits the CSV header and n_max rows") {
    const auto res = run_cli("tradeoff --beta 0.2 --n-max 4 --lambda_a 0.4");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.rfind("n,latency,attack_prob\n", 0) == 0);
    int lines = 0;
    for (char c : res.stdout_text)
        if (c == '\n') ++lines;
    CHECK(lines == 5);
}

TEST_CASE("security sweep covers the requested grid") {
    const auto res = run_cli("security-sweep --beta-range 0.1:0.3:0.1 --n-range 1:2");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.rfind("beta,n,give_up,probability\n", 0) == 0);
    int lines = 0;
    for (char c : res.stdout_text)
        if (c == '\n') ++lines;
    CHECK(lines == 7);  // header + 3 betas x 2 n values
}

TEST_CASE("mining emits a block_time column with count rows") {
    const auto res = run_cli("mining --rate 1 --count 50 --seed 3");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.rfind("block_time\n", 0) == 0);
    int lines = 0;
    for (char c : res.stdout_text)
        if (c == '\n') ++lines;
    CHECK(lines == 51);
}

TEST_CASE("json format renders tables as object arrays") {
    const auto res = run_cli("tradeoff --beta 0.2 --n-max 2 --format json");
    CHECK(res.exit_code == 0);
    CHECK(res.stdout_text.find("\"attack_prob\":") != std::string::npos);
    CHECK(res.stdout_text.rfind("[", 0) == 0);
}

TEST_CASE("out-dir writes artifacts and a manifest") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "bran_cli_outdir_test";
    fs::remove_all(dir);
    const auto res = run_cli("bounds --lambda_a 0.4 --n-confirmations 2 --out-dir " +
                             dir.string());
    CHECK(res.exit_code == 0);
    CHECK(fs::exists(dir / "bounds.json"));
    CHECK(fs::exists(dir / "manifest.jsonl"));
    std::ifstream m(dir / "manifest.jsonl");
    std::string line;
    std::getline(m, line);
    CHECK(line.find("\"subcommand\":\"bounds\"") != std::string::npos);
    CHECK(line.find("\"digest\":") != std::string::npos);
    fs::remove_all(dir);
}
