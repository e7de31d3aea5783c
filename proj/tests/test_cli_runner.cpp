// End-to-end checks of the command-line experiment runner.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWorkRoot = fs::temp_directory_path() / "isac_cli_tests";

fs::path fresh_dir(const std::string& name)
{
    const fs::path dir = kWorkRoot / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path scenario(const std::string& name)
{
    return fs::path(ISAC_SCENARIO_DIR) / name;
}

/// Runs the CLI with stdout/stderr captured next to `capture_dir`.
/// Returns the process exit code (-1 when it did not exit normally).
int run_cli(const std::string& args, const fs::path& capture_dir)
{
    const std::string cmd = std::string(ISAC_CLI_PATH) + " " + args + " > " +
                            (capture_dir / "stdout.txt").string() + " 2> " +
                            (capture_dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status))
        return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli writes a complete artifact set with a manifest")
{
    const auto out = fresh_dir("basic");
    const auto cap = fresh_dir("basic_cap");
    const int rc = run_cli("run range-profile --scenario " +
                               scenario("default.json").string() +
                               " --seed 7 --out " + out.string(),
                           cap);
    CHECK(rc == 0);
    CHECK(slurp(cap / "stdout.txt").find("wrote artifacts for range-profile") !=
          std::string::npos);

    for (const char* name :
         {"rd_map.csv", "range_profile.csv", "detections.csv", "kpi.json",
          "manifest.json"})
        CHECK_MESSAGE(fs::exists(out / name), name);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("experiment") == "range-profile");
    CHECK(manifest.at("seed").get<std::uint64_t>() == 7);
    CHECK(manifest.at("scenario").at("frame").at("n_subcarriers") == 256);
    CHECK(manifest.at("versions").contains("project"));

    const auto kpi = nlohmann::json::parse(slurp(out / "kpi.json"));
    CHECK(kpi.at("crb_range_m2").get<double>() > 0.0);
    CHECK(kpi.at("rate_bits").get<double>() > 0.0);
}

TEST_CASE("cli reruns with one seed are byte-identical")
{
    const auto out_a = fresh_dir("repro_a");
    const auto out_b = fresh_dir("repro_b");
    const auto cap = fresh_dir("repro_cap");
    const std::string base = "run range-profile --scenario " +
                             scenario("default.json").string() + " --seed 42 --out ";
    REQUIRE(run_cli(base + out_a.string(), cap) == 0);
    REQUIRE(run_cli(base + out_b.string(), cap) == 0);

    for (const char* name : {"rd_map.csv", "range_profile.csv", "detections.csv",
                             "kpi.json"})
        CHECK_MESSAGE(slurp(out_a / name) == slurp(out_b / name), name);
}

TEST_CASE("cli refuses to overwrite finished runs unless asked")
{
    const auto out = fresh_dir("clobber");
    const auto cap = fresh_dir("clobber_cap");
    const std::string base = "run range-profile --scenario " +
                             scenario("default.json").string() +
                             " --seed 3 --out " + out.string();
    REQUIRE(run_cli(base, cap) == 0);
    CHECK(run_cli(base, cap) != 0);
    CHECK(slurp(cap / "stderr.txt").find("error:") != std::string::npos);
    CHECK(run_cli(base + " --overwrite", cap) == 0);
}

TEST_CASE("cli rejects bad invocations")
{
    const auto out = fresh_dir("bad");
    const auto cap = fresh_dir("bad_cap");
    const std::string tail =
        " --seed 1 --out " + out.string() + "/x";

    SUBCASE("unknown experiment")
    {
        CHECK(run_cli("run no-such-experiment --scenario " +
                          scenario("default.json").string() + tail,
                      cap) != 0);
        CHECK(slurp(cap / "stderr.txt").find("error:") != std::string::npos);
    }
    SUBCASE("missing scenario file")
    {
        CHECK(run_cli("run range-profile --scenario " +
                          (out / "nope.json").string() + tail,
                      cap) != 0);
    }
    SUBCASE("malformed scenario json")
    {
        const auto broken = out / "broken.json";
        std::ofstream(broken) << "{ this is not json";
        CHECK(run_cli("run range-profile --scenario " + broken.string() + tail,
                      cap) != 0);
        CHECK(slurp(cap / "stderr.txt").find("error:") != std::string::npos);
    }
    SUBCASE("missing required seed")
    {
        CHECK(run_cli("run range-profile --scenario " +
                          scenario("default.json").string() + " --out " +
                          (out / "y").string(),
                      cap) != 0);
    }
    SUBCASE("no subcommand")
    {
        CHECK(run_cli("", cap) != 0);
    }
}
