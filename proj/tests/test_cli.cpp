#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "sinodiff/io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("SINODIFF_CLI");
    return p ? p : "";
}

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = cli_path() + " " + args + " > " + stdout_file + " 2>/dev/null";
    const int status      = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json first_json_line(const std::string& path) {
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    return nlohmann::json::parse(line);
}

std::vector<char> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct TmpDir {
    fs::path dir;
    TmpDir() {
        dir = fs::path("cli_scratch");
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("defaults prints the full run configuration", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("defaults", tmp / "out.json") == 0);
    std::ifstream f(tmp / "out.json");
    const nlohmann::json j = nlohmann::json::parse(f);
    REQUIRE(j.contains("geometry"));
    REQUIRE(j.contains("recon"));
    REQUIRE(j.at("eta").get<double>() == 22000.0);
}

TEST_CASE("usage errors exit with status 1", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    REQUIRE(run("no-such-command") == 1);
    REQUIRE(run("phantom --no-such-flag 3") == 1);
    REQUIRE(run("phantom --size 64 --kind bogus --out x") == 1);
}

TEST_CASE("data errors exit with status 2", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("project --image " + (tmp / "missing") + " --out " + (tmp / "s")) == 2);
}

TEST_CASE("zero pipeline reports exactly zero error", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("phantom --size 32 --kind constant --value 0 --out " + (tmp / "z")) == 0);
    REQUIRE(run("project --image " + (tmp / "z") + " --views 24 --detectors 32 --out " +
                (tmp / "z_sino")) == 0);
    REQUIRE(run("metrics --ref " + (tmp / "z_sino") + " --test " + (tmp / "z_sino"),
                tmp / "metrics.json") == 0);
    const nlohmann::json m = first_json_line(tmp / "metrics.json");
    REQUIRE(m.at("mse").get<double>() == 0.0);
    REQUIRE(m.at("psnr").is_null());
    REQUIRE(m.at("identical").get<bool>());
    REQUIRE(m.at("domain").get<std::string>() == "sinogram");
}

TEST_CASE("lowdose is byte-identical under a fixed seed", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("phantom --size 32 --kind uniform-disk --value 1 --out " + (tmp / "d")) == 0);
    REQUIRE(run("project --image " + (tmp / "d") + " --views 20 --detectors 24 --out " +
                (tmp / "sino")) == 0);
    const std::string common =
        "lowdose --sino " + (tmp / "sino") + " --intensity 1e5 --seed 7 --out ";
    REQUIRE(run(common + (tmp / "y1")) == 0);
    REQUIRE(run(common + (tmp / "y2")) == 0);
    REQUIRE(slurp(tmp / "y1.raw") == slurp(tmp / "y2.raw"));
    REQUIRE(slurp(tmp / "y1.json") == slurp(tmp / "y2.json"));

    // a different seed must change the payload
    REQUIRE(run("lowdose --sino " + (tmp / "sino") + " --intensity 1e5 --seed 8 --out " +
                (tmp / "y3")) == 0);
    REQUIRE(slurp(tmp / "y1.raw") != slurp(tmp / "y3.raw"));
}

TEST_CASE("run records carry the config hash and seed", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("phantom --size 32 --kind constant --value 0.5 --out " + (tmp / "c"),
                tmp / "rec.json") == 0);
    const nlohmann::json rec = first_json_line(tmp / "rec.json");
    REQUIRE(rec.at("command").get<std::string>() == "phantom");
    REQUIRE(rec.at("config_hash").get<std::string>().size() == 16);
    REQUIRE(rec.contains("timings_ms"));
    REQUIRE(rec.at("outputs").size() == 2);
}

TEST_CASE("export-png writes a decodable 16-bit file", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("phantom --size 32 --kind constant --value 0.5 --out " + (tmp / "c")) == 0);
    REQUIRE(run("export-png --in " + (tmp / "c") + " --low 0 --high 1 --out " +
                (tmp / "c.png")) == 0);
    const sinodiff::ArrayRM q = sinodiff::read_png16(tmp / "c.png");
    REQUIRE(q.rows() == 32);
    REQUIRE((q - 32768.0).abs().maxCoeff() <= 1.0);
}

TEST_CASE("reconstruct logs per-iteration psnr and dumps hankel debug files", "[cli]") {
    if (cli_path().empty()) SKIP("SINODIFF_CLI not set");
    TmpDir tmp;
    REQUIRE(run("phantom --size 32 --kind uniform-disk --value 1 --radius 11 --out " +
                (tmp / "d")) == 0);
    REQUIRE(run("project --image " + (tmp / "d") + " --views 20 --detectors 20 --out " +
                (tmp / "sino")) == 0);
    REQUIRE(run("lowdose --sino " + (tmp / "sino") + " --intensity 1e5 --seed 3 --out " +
                (tmp / "y")) == 0);
    REQUIRE(run("train --sino " + (tmp / "y") + " --steps 10 --batch 4 --hidden 8 "
                "--patches-per-epoch 16 --seed 3 --out " + (tmp / "m")) == 0);
    REQUIRE(run("reconstruct --lowdose " + (tmp / "y") + " --models " + (tmp / "m") +
                " --ref " + (tmp / "sino") + " --iters 2 --correctors 0 --image-size 16 " +
                "--seed 3 --dump-hankel " + (tmp / "hank") + " --out " + (tmp / "rec"),
                tmp / "log.json") == 0);

    // one JSON line per outer iteration, then the run record
    std::ifstream f(tmp / "log.json");
    std::string line;
    int iters = 0;
    nlohmann::json last;
    while (std::getline(f, line)) {
        last = nlohmann::json::parse(line);
        if (last.contains("iter")) {
            REQUIRE(last.contains("psnr"));
            ++iters;
        }
    }
    REQUIRE(iters == 2);
    REQUIRE(last.at("command").get<std::string>() == "reconstruct");

    const sinodiff::RawArray h = sinodiff::load_raw(tmp / "hank");
    REQUIRE(h.kind == "hankel");
    REQUIRE(h.sidecar.contains("partitions"));
    REQUIRE(h.sidecar.at("src_dims").at("l").get<int>() == 8);
}
