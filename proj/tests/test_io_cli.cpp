#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cib/io.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cib;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir(const std::string& tag) {
    auto p = fs::temp_directory_path() / ("cib2_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("config parsing") {
    SUBCASE("minimal text fills defaults") {
        Config c = parse_config_text("a = 4\n# comment\nn_t = 65\n");
        CHECK(c.a == 4.0);
        CHECK(c.n_t == 65);
        CHECK(c.n == 512);
        CHECK(c.mode == "toy");
    }
    SUBCASE("desk preset") {
        Config c = parse_config_text("preset = desk\n");
        CHECK(c.a == 4.0);
        CHECK(c.lambda0 == 5);
        CHECK(c.n == 512);
        CHECK(c.n_t == 257);
    }
    SUBCASE("errors name the offending key") {
        CHECK_THROWS_WITH_AS(parse_config_text("energy_coeffs = \n"),
                             doctest::Contains("energy_coeffs"), ConfigError);
        CHECK_THROWS_WITH_AS(parse_config_text("bogus_key = 3\n"),
                             doctest::Contains("bogus_key"), ConfigError);
        CHECK_THROWS_WITH_AS(parse_config_text("mode = fancy\n"),
                             doctest::Contains("mode"), ConfigError);
        CHECK_THROWS_WITH_AS(parse_config_text("lambdas = 7\n"),
                             doctest::Contains("lambdas"), ConfigError);
    }
    SUBCASE("round trip through text") {
        Config c = parse_config_text("preset = mini\nstages = 2\n");
        Config c2 = parse_config_text(config_to_text(c));
        CHECK(c2.n == c.n);
        CHECK(c2.stages == 2);
        CHECK(c2.lambdas == c.lambdas);
    }
}

TEST_CASE("binary dump round trip") {
    auto dir = temp_dir("dump");
    Grid g(32);
    TimeGrid tg(9);
    TimeSeries<VectorField2> v(tg);
    for (int j = 0; j < tg.n_t; ++j) {
        VectorField2 s(g);
        s.u1 = cib::testing::random_band_limited(g, 8, 100 + j);
        s.u2 = cib::testing::random_band_limited(g, 8, 200 + j);
        v.slices.push_back(std::move(s));
    }
    dump_series(dir / "v.cib2", v);
    auto ls = load_series(dir / "v.cib2");
    CHECK(ls.n_components == 2);
    CHECK(int(ls.times.size()) == tg.n_t);
    auto v2 = as_vector_series(ls);
    for (int j = 0; j < tg.n_t; ++j) {
        CHECK(cib::testing::max_abs_diff(v.at(j).u1, v2.at(j).u1) == 0.0);
        CHECK(cib::testing::max_abs_diff(v.at(j).u2, v2.at(j).u2) == 0.0);
    }
    fs::remove_all(dir);
}

TEST_CASE("manifest hashes detect corruption") {
    auto dir = temp_dir("hash");
    {
        std::ofstream f(dir / "data.bin", std::ios::binary);
        f << "payload-payload";
    }
    RunManifest m;
    m.set("kind", "test");
    m.add_file(dir, "data.bin");
    write_manifest(dir / "manifest.txt", m);

    RunManifest back = read_manifest(dir / "manifest.txt");
    CHECK(verify_manifest_hashes(dir, back) == "");
    {
        std::ofstream f(dir / "data.bin", std::ios::binary);
        f << "payload-corrupt";
    }
    const std::string err = verify_manifest_hashes(dir, back);
    CHECK(err.find("checksum mismatch") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli end to end at mini preset") {
    auto dir = temp_dir("cli");
    {
        std::ofstream f(dir / "run.cfg");
        f << "preset = mini\nn_t = 33\nstages = 1\nout_dir = " << (dir / "out").string()
          << "\n";
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = "./cib2 " + args + " > " +
                                (dir / "log.txt").string() + " 2>&1";
        return std::system(cmd.c_str()) / 256;
    };
    CHECK(run("init --config " + (dir / "run.cfg").string()) == 0);
    CHECK(fs::exists(dir / "out" / "config.cfg"));
    CHECK(run("run --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "state1_v.cib2"));
    CHECK(fs::exists(dir / "out" / "stage0_stress.csv"));
    CHECK(run("verify --out " + (dir / "out").string()) == 0);
    // idempotence: a second verify on unchanged data prints the same bytes
    {
        std::filesystem::copy_file(dir / "log.txt", dir / "log1.txt");
        CHECK(run("verify --out " + (dir / "out").string()) == 0);
        std::ifstream a(dir / "log1.txt"), b(dir / "log.txt");
        std::string sa((std::istreambuf_iterator<char>(a)),
                       std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)),
                       std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }
    // strict mode refuses toy parameters with a violation report
    CHECK(run("run --out " + (dir / "out").string() + " --mode strict") == 2);
    // corrupt a dump: verify must fail with a checksum message
    {
        std::fstream f(dir / "out" / "state1_v.cib2",
                       std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(64);
        const double junk = 1e9;
        f.write(reinterpret_cast<const char*>(&junk), 8);
    }
    CHECK(run("verify --out " + (dir / "out").string()) == 1);
    {
        std::ifstream log(dir / "log.txt");
        std::string all((std::istreambuf_iterator<char>(log)),
                        std::istreambuf_iterator<char>());
        CHECK(all.find("checksum") != std::string::npos);
    }
    // bad config: exit code 2
    {
        std::ofstream f(dir / "bad.cfg");
        f << "bogus = 1\n";
    }
    CHECK(run("init --config " + (dir / "bad.cfg").string()) == 2);
    fs::remove_all(dir);
}
