#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "sgru/data.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SGRU_CLI_PATH) + " " + args + " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "sgru_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string kTinyFlags = " --epochs 1 --hidden 4 --layers 1 --batch 16 --jobs 1";

} // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("") == 2);                       // missing subcommand
    CHECK(run_cli("frobnicate") == 2);             // unknown subcommand
    CHECK(run_cli("synth --days 10") == 2);        // missing required --out
    CHECK(run_cli("train --out /tmp/x") == 2);     // no datasets
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("synth writes a loadable canonical csv") {
    fs::path dir = fresh_dir("synth");
    const std::string out = (dir / "d.csv").string();
    CHECK(run_cli("synth --days 3 --seed 9 --out " + out) == 0);
    auto table = sgru::read_canonical_csv_file(out);
    CHECK(table.rows.size() == 72);

    SUBCASE("days below the minimum is a usage error") {
        CHECK(run_cli("synth --days 1 --out " + (dir / "bad.csv").string()) == 2);
        CHECK(!fs::exists(dir / "bad.csv"));
    }
    SUBCASE("same seed, same bytes") {
        const std::string again = (dir / "d2.csv").string();
        CHECK(run_cli("synth --days 3 --seed 9 --out " + again) == 0);
        CHECK(slurp(out) == slurp(again));
    }
}

TEST_CASE("train smoke run and failure contracts") {
    fs::path dir = fresh_dir("train");
    const std::string out = (dir / "run").string();

    SUBCASE("missing dataset path exits 2 with no partial outputs") {
        CHECK(run_cli("train --dataset A,Jan," + (dir / "absent.csv").string() + " --out " + out +
                      kTinyFlags) == 2);
        CHECK(!fs::exists(out));
    }
    SUBCASE("bad mode value exits 2") {
        CHECK(run_cli("train --synth A,Jan,8 --mode sideways --out " + out + kTinyFlags) == 2);
    }
    SUBCASE("synthetic training produces artifacts, deterministically") {
        CHECK(run_cli("train --synth A,Jan,8 --seed 4 --mode stateful --out " + out + kTinyFlags) ==
              0);
        CHECK(fs::exists(fs::path(out) / "A_Jan_stateful" / "model.ckpt"));
        const std::string first = slurp(fs::path(out) / "A_Jan_stateful" / "epochs.csv");

        const std::string out2 = (dir / "run2").string();
        CHECK(run_cli("train --synth A,Jan,8 --seed 4 --mode stateful --out " + out2 + kTinyFlags) ==
              0);
        CHECK(slurp(fs::path(out2) / "A_Jan_stateful" / "epochs.csv") == first);
    }
}

TEST_CASE("compare plus evaluate round trip") {
    fs::path dir = fresh_dir("compare");
    const std::string out = (dir / "cmp").string();
    CHECK(run_cli("compare --synth A,Jan,8 --seed 11 --out " + out + kTinyFlags) == 0);
    CHECK(fs::exists(fs::path(out) / "compare.csv"));
    CHECK(fs::exists(fs::path(out) / "A_Jan_stateless" / "hour_ghi.csv"));
    CHECK(fs::exists(fs::path(out) / "A_Jan_stateful" / "hour_ghi.csv"));

    const std::string model = (fs::path(out) / "A_Jan_stateful" / "model.ckpt").string();
    CHECK(run_cli("evaluate --model " + model + " --synth A,Jan,8 --seed 11 --mode stateful" +
                  kTinyFlags) == 0);
    CHECK(run_cli("evaluate --model " + (dir / "nope.ckpt").string() +
                  " --synth A,Jan,8 --seed 11 --mode stateful" + kTinyFlags) == 2);
}

TEST_CASE("config file supplies defaults and flags win") {
    fs::path dir = fresh_dir("config");
    const fs::path cfg = dir / "run.ini";
    {
        std::ofstream out(cfg);
        out << "[train]\nepochs=1\nhidden=4\nlayers=1\nbatch=16\nseed=21\nsynth=\"A,Jan,8\"\n";
        out << "out=" << (dir / "from_config").string() << "\n";
    }
    CHECK(run_cli("train --config " + cfg.string()) == 0);
    CHECK(fs::exists(dir / "from_config" / "A_Jan_stateless" / "epochs.csv"));

    // --out on the command line overrides the config value.
    CHECK(run_cli("train --config " + cfg.string() + " --out " + (dir / "flag_out").string()) == 0);
    CHECK(fs::exists(dir / "flag_out" / "A_Jan_stateless" / "epochs.csv"));
}
