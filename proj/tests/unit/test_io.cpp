#include "mqsbt/errors.hpp"
#include "mqsbt/io/config.hpp"
#include "mqsbt/io/manifest.hpp"
#include "mqsbt/io/pipeline.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace mqsbt;
namespace fs = std::filesystem;

namespace {

const std::string kSource = MQSBT_SOURCE_DIR;
const std::string kCli = MQSBT_CLI;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mqsbt_io_" + name);
    fs::remove_all(p);
    return p;
}

std::string error_of(const std::string& text) {
    try {
        io::parse_config_text(text, "t.cfg");
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

io::RunConfig default_config() { return io::parse_config(kSource + "/configs/default.cfg"); }

// Stages whose "start" line appears in a pipeline log.
std::set<std::string> started(const std::string& log) {
    std::set<std::string> out;
    std::istringstream in(log);
    std::string line;
    while (std::getline(in, line)) {
        const auto close = line.find("] start");
        if (line.size() > 1 && line[0] == '[' && close != std::string::npos) out.insert(line.substr(1, close - 1));
    }
    return out;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("empty config gives the defaults") {
    const io::RunConfig c = io::parse_config_text("");
    const io::RunConfig d;
    CHECK(c.echo() == d.echo());
    CHECK(c.material.R(0, 0) == 100.0);
    CHECK(c.geometry.resolution == 9);
    CHECK(c.mor.tol_adi == 1e-10);
    CHECK(c.analysis.omega_points == 200);
    CHECK(c.oracle_cap == 5000);
    // the shipped default config spells out the same values
    CHECK(default_config().echo() == d.echo());
}

TEST_CASE("config errors carry the line number") {
    const std::string neg = error_of("# comment\n\nmaterial.R = -1\n");
    CHECK(neg.find("t.cfg:3:") != std::string::npos);
    CHECK(neg.find("material.R") != std::string::npos);
    CHECK(error_of("foo.bar = 1\n").find("t.cfg:1: unknown key 'foo.bar'") != std::string::npos);
    CHECK(error_of("mor.maxit = 5\nmor.maxit = 6\n").find("t.cfg:2: repeated key") != std::string::npos);
    CHECK(error_of("mor.maxit = five\n").find("invalid value") != std::string::npos);
    CHECK(error_of("mor.maxit = 2.5\n").find("invalid value") != std::string::npos);
    CHECK(error_of("material.nu_air = 1e5x\n").find("invalid value") != std::string::npos);
    CHECK(error_of("just text\n").find("expected") != std::string::npos);
    CHECK(error_of("mor.maxit =\n").find("missing value") != std::string::npos);
    CHECK(error_of("= 3\n").find("missing key") != std::string::npos);
    CHECK(error_of("mor.tol_adi = 0\n").find("mor.tol_adi") != std::string::npos);
    CHECK(error_of("geometry.resolution = 0\n").find("geometry.resolution") != std::string::npos);
    CHECK(error_of("analysis.omega_min = 10\nanalysis.omega_max = 1\n").find("omega_min") != std::string::npos);
    CHECK(error_of("mor.shift_method = logspace\n").find("shift_count") != std::string::npos);
    CHECK(error_of("mor.shift_method = newton\n").find("invalid value") != std::string::npos);
    CHECK(error_of("mor.n0 = -2\n").find("mor.n0") != std::string::npos);
    CHECK(error_of("geometry.r1 = 0.04\n") != "");
    CHECK(error_of("material.R = 7 # trailing comment\n") == "");
    CHECK_THROWS_AS(io::parse_config("/nonexistent/x.cfg"), ValidationError);
}

TEST_CASE("config echo round trip") {
    io::RunConfig c;
    c.material.R(0, 0) = 0.1 + 0.2;
    c.mor.tol_hsv = 1.0 / 3.0;
    c.analysis.omega_points = 17;
    c.output_dir = "somewhere/else";
    const io::RunConfig back = io::parse_config_text(c.echo());
    CHECK(back.echo() == c.echo());
    CHECK(back.material.R(0, 0) == c.material.R(0, 0));
    CHECK(back.mor.tol_hsv == c.mor.tol_hsv);
    CHECK(back.output_dir == "somewhere/else");
    const auto keys = io::config_keys();
    CHECK(std::set<std::string>(keys.begin(), keys.end()).size() == keys.size());
    std::istringstream in(c.echo());
    std::string line;
    size_t i = 0;
    while (std::getline(in, line)) {
        REQUIRE(i < keys.size());
        CHECK(line.rfind(keys[i] + " = ", 0) == 0);
        ++i;
    }
    CHECK(i == keys.size());
}

TEST_CASE("manifest round trip") {
    io::Manifest m;
    m.set("a.x", 0.1 + 0.2);
    m.set("a.n", 42L);
    m.set("b.text", std::string("two words"));
    m.set("a.x", 1.0 / 3.0);
    CHECK(m.entries().size() == 3);
    CHECK(m.entries()[0].first == "a.x");
    const fs::path p = scratch("manifest.txt");
    m.save(p.string());
    const io::Manifest back = io::Manifest::load(p.string());
    CHECK(back.get_double("a.x") == 1.0 / 3.0);
    CHECK(back.get_long("a.n") == 42);
    CHECK(back.get("b.text") == "two words");
    CHECK(back.entries() == m.entries());
    CHECK_THROWS_AS(back.get("missing"), ValidationError);
    CHECK_THROWS_AS(back.get_long("b.text"), ValidationError);
    CHECK_THROWS_AS(back.get_long("a.x"), ValidationError);
    io::Manifest e = back;
    e.erase_prefix("a.");
    CHECK(e.entries().size() == 1);
    CHECK_FALSE(e.has("a.n"));
    fs::remove(p);
    CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("stage names") {
    CHECK(io::stage_names().size() == 8);
    for (const auto& s : io::stage_names()) CHECK(io::stage_name(io::parse_stage(s)) == s);
    CHECK_THROWS_AS(io::parse_stage("reduced"), ValidationError);
}

TEST_CASE("golden dimensions for the default configuration") {
    const fs::path out = scratch("golden");
    io::PipelineOptions opt;
    opt.out_dir = out.string();
    const io::Manifest m = io::run_pipeline(default_config(), io::Stage::Regularize, opt);
    const io::Manifest golden = io::Manifest::load(kSource + "/configs/golden_manifest.txt");
    REQUIRE(golden.entries().size() >= 10);
    for (const auto& [k, v] : golden.entries()) {
        INFO(k);
        REQUIRE(m.has(k));
        CHECK(m.get(k) == v);
    }
    CHECK(m.get("checks.CG0") == "pass");
    CHECK(m.get("checks.theorem1_factored") == "pass");
    // the manifest on disk is the one returned
    CHECK(io::Manifest::load((out / "manifest.txt").string()).entries() == m.entries());
    fs::remove_all(out);
}

TEST_CASE("mesh stage writes its artifacts") {
    const fs::path out = scratch("mesh");
    const io::RunConfig cfg = default_config();
    io::PipelineOptions opt;
    opt.out_dir = out.string();
    const io::Manifest m = io::run_pipeline(cfg, io::Stage::Mesh, opt);
    CHECK(m.get("checks.CG0") == "pass");
    CHECK(m.get_long("dims.n_n") == 1000);
    std::istringstream files(m.get("artifacts.mesh"));
    std::string f;
    int count = 0;
    while (files >> f) {
        CHECK(fs::exists(out / f));
        ++count;
    }
    CHECK(count >= 1);
    CHECK_FALSE(m.has("dims.n1"));
    fs::remove_all(out);
}

TEST_CASE("fresh stages are reused") {
    const fs::path out = scratch("resume");
    io::RunConfig cfg = default_config();
    std::ostringstream log1, log2, log3, log4;
    io::PipelineOptions opt;
    opt.out_dir = out.string();

    opt.log = &log1;
    io::run_pipeline(cfg, io::Stage::Regularize, opt);
    CHECK(started(log1.str()) == std::set<std::string>{"mesh", "assemble", "regularize"});

    opt.log = &log2;
    io::run_pipeline(cfg, io::Stage::Regularize, opt);
    CHECK(started(log2.str()) == std::set<std::string>{"regularize"});

    // a material change leaves the mesh valid
    cfg.material.R(0, 0) = 50.0;
    opt.log = &log3;
    const io::Manifest m = io::run_pipeline(cfg, io::Stage::Regularize, opt);
    CHECK(started(log3.str()) == std::set<std::string>{"assemble", "regularize"});
    CHECK(m.get("config.material.R") == "50");

    // a missing artifact forces the producing stage and everything after it
    std::istringstream files(m.get("artifacts.mesh"));
    std::string first;
    files >> first;
    fs::remove(out / first);
    opt.log = &log4;
    io::run_pipeline(cfg, io::Stage::Regularize, opt);
    CHECK(started(log4.str()) == std::set<std::string>{"mesh", "assemble", "regularize"});
    fs::remove_all(out);
}

TEST_CASE("unwritable output directory") {
    io::PipelineOptions opt;
    opt.out_dir = "/proc/mqsbt_cannot_write";
    CHECK_THROWS_AS(io::run_pipeline(io::RunConfig{}, io::Stage::Mesh, opt), ValidationError);
}

TEST_CASE("two runs produce identical artifacts") {
    const fs::path base = scratch("determinism");
    fs::create_directories(base);
    {
        std::string text = slurp(kSource + "/configs/default.cfg");
        for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{
                 {"analysis.omega_points = 200", "analysis.omega_points = 5"},
                 {"analysis.passivity_samples = 50", "analysis.passivity_samples = 4"},
                 {"analysis.steps = 300", "analysis.steps = 20"},
                 {"oracle.cap = 5000", "oracle.cap = 0"}}) {
            const auto at = text.find(from);
            REQUIRE(at != std::string::npos);
            text.replace(at, from.size(), to);
        }
        std::ofstream(base / "light.cfg") << text;
    }
    auto run = [&](const std::string& dir) {
        const std::string cmd = "\"" + kCli + "\" all --config \"" + (base / "light.cfg").string() + "\" --out \"" +
                                (base / dir).string() + "\" > \"" + (base / (dir + ".log")).string() + "\" 2>&1";
        return std::system(cmd.c_str());
    };
    REQUIRE(run("one") == 0);
    REQUIRE(run("two") == 0);

    const io::Manifest a = io::Manifest::load((base / "one" / "manifest.txt").string());
    const io::Manifest b = io::Manifest::load((base / "two" / "manifest.txt").string());
    REQUIRE(a.entries().size() == b.entries().size());
    for (size_t i = 0; i < a.entries().size(); ++i) {
        const auto& [ka, va] = a.entries()[i];
        const auto& [kb, vb] = b.entries()[i];
        CHECK(ka == kb);
        if (ka.rfind("timing.", 0) == 0) continue;
        INFO(ka);
        CHECK(va == vb);
    }
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(base / "one")) {
        const std::string name = entry.path().filename().string();
        if (name == "manifest.txt") continue;
        INFO(name);
        REQUIRE(fs::exists(base / "two" / name));
        CHECK(slurp(entry.path()) == slurp(base / "two" / name));
        ++compared;
    }
    CHECK(compared >= 8);
    CHECK(a.get("checks.certified_bound") == "pass");
    CHECK(a.get("checks.theorem2") == "skipped");
    fs::remove_all(base);
}

}
