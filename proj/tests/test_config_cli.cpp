#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "tsfrac/config.hpp"

using namespace tsfrac;

namespace {

const char* kMinimal = R"({
  "problem": {"a": -1.0, "b": 1.0, "kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
  "engine": "fd"
})";

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const char* cli = std::getenv("TSFRAC_CLI");
    REQUIRE(cli != nullptr);
    const std::string cmd = std::string(cli) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    while (size_t n = fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string write_temp(const std::string& name, const std::string& text) {
    const std::string path = std::string("cfg_") + name + ".json";
    std::ofstream(path) << text;
    return path;
}

} // namespace

TEST_CASE("minimal config parses") {
    RunConfig cfg = parse_config(kMinimal);
    CHECK(cfg.engine == Engine::Fd);
    CHECK(cfg.problem.kernel.type == "symmetric-stable");
    CHECK(cfg.problem.kernel.beta == 0.5);
    CHECK(cfg.problem.g == "1");
}

TEST_CASE("schema violations name the field path") {
    CHECK(error_of(R"({"problem": {"kernel": {"type": "classical-stable"}}, "engine": "fd"})")
              .find("problem.kernel.beta") != std::string::npos);
    CHECK(error_of(R"({"problem": {"lambda": -1.0}, "engine": "fd"})").find("problem.lambda") !=
          std::string::npos);
    CHECK(error_of(R"({"problem": {}, "engine": "fd", "bogus": 1})").find("config.bogus") !=
          std::string::npos);
    CHECK(error_of(R"({"problem": {"extra": 2}, "engine": "fd"})").find("problem.extra") !=
          std::string::npos);
    CHECK(error_of(R"({"problem": {}, "engine": "warp"})").find("config.engine") !=
          std::string::npos);
    CHECK(error_of(R"({"problem": {"g": "2*"}, "engine": "fd"})").find("problem.g") !=
          std::string::npos);
    CHECK(error_of("not json at all").find("invalid JSON") != std::string::npos);
}

TEST_CASE("analytic-engine invariants") {
    CHECK(error_of(R"({"problem": {"alpha": "1"}, "engine": "analytic"})").find("gamma") !=
          std::string::npos);
    CHECK(error_of(R"({"problem": {"kernel": {"type": "classical-stable", "beta": 0.5}},
                       "engine": "analytic"})")
              .find("kernel.type") != std::string::npos);
    // conforming analytic config passes
    CHECK_NOTHROW(parse_config(
        R"({"problem": {"kernel": {"type": "symmetric-stable", "beta": 0.3}}, "engine": "analytic"})"));
}

TEST_CASE("round-trip: parse(emit(config)) == config") {
    RunConfig cfg = parse_config(kMinimal);
    CHECK(parse_config(emit_config(cfg)) == cfg);

    // a fuller document with per-side kernels and every block populated
    RunConfig full = parse_config(R"json({
      "problem": {
        "a": 0.0, "b": 1.0, "lambda": 1.0, "u_a": 0.5, "u_b": 1.5,
        "g": "x^2 + 1", "gamma": "0.2*x*(1 - x)",
        "flavor": "riemann-liouville",
        "kernel_plus": {"type": "classical-stable", "beta": 0.5, "weight": 1.0},
        "kernel_minus": {"type": "tempered-stable", "beta": 0.7, "tempering": 2.0, "weight": 0.5}
      },
      "engine": "mc",
      "fd": {"n_cells": 128},
      "mc": {"paths": 500, "eps": 1e-3, "dt": 1e-4, "tmax": 20.0, "seed": 99, "threads": 2},
      "points": [0.25, 0.5],
      "grids": [16, 32, 64],
      "output": {"path": "out.csv", "format": "json"}
    })json");
    CHECK(parse_config(emit_config(full)) == full);
    CHECK(full.problem.kernel_minus->tempering == 2.0);
    CHECK(full.mc.seed == 99);
}

TEST_CASE("variable-order kernel and the none kernel build") {
    RunConfig cfg = parse_config(R"({
      "problem": {"kernel": {"type": "variable-order", "order": "0.4 + 0.1*x"}},
      "engine": "fd"
    })");
    ProblemSpec spec = build_problem(cfg.problem);
    CHECK(spec.kernel.plus.order_at(0.0) == 0.4);
    CHECK(parse_config(emit_config(cfg)) == cfg);

    RunConfig none = parse_config(R"({
      "problem": {"kernel": {"type": "none"}, "alpha": "1"},
      "engine": "fd"
    })");
    ProblemSpec nspec = build_problem(none.problem);
    CHECK(nspec.kernel.plus.tail_mass(0.0, 0.5) == 0.0);
}

TEST_CASE("build_problem materializes expressions and the normalized kernel") {
    RunConfig cfg = parse_config(kMinimal);
    ProblemSpec spec = build_problem(cfg.problem);
    CHECK(spec.g(0.3) == 1.0);
    const double w = 1.0 / (2.0 * std::cos(M_PI * 0.25));
    CHECK(std::fabs(spec.kernel.plus.weight() - w) <= 1e-15);
}

TEST_CASE("manifest records every tunable decision") {
    RunConfig cfg = parse_config(kMinimal);
    const std::string manifest = make_manifest(cfg, 4);
    auto m = nlohmann::json::parse(manifest);
    CHECK(m["mc"].contains("seed"));
    CHECK(m["mc"].contains("eps"));
    CHECK(m["mc"].contains("dt"));
    CHECK(m["fd"].contains("n_cells"));
    CHECK(m["fd"].contains("first_panel_split"));
    CHECK(m["mc"]["threads"] == 4);
    // the embedded config round-trips
    RunConfig back = parse_config(m["config"].dump());
    CHECK(back == cfg);
}

TEST_CASE("cli: analytic tabulation and exit codes") {
    const std::string cfg = write_temp("an", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
      "engine": "analytic"
    })");
    RunResult r = run_cli("analytic -c " + cfg + " --x 0.0");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("x,u,harmonic_upper,mean_exit_time") != std::string::npos);
    CHECK(r.out.find("1.12838") != std::string::npos);

    // config error -> exit 2
    const std::string bad = write_temp("bad", R"({"problem": {}, "engine": "warp"})");
    CHECK(run_cli("solve-fd -c " + bad).exit_code == 2);
    CHECK(run_cli("solve-fd -c does_not_exist.json").exit_code == 2);

    // analytic engine with a diffusion part -> exit 2
    const std::string mixed = write_temp("mixed", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "alpha": "1"},
      "engine": "analytic"
    })");
    CHECK(run_cli("analytic -c " + mixed).exit_code == 2);
}

TEST_CASE("cli: fd solve and mc determinism") {
    const std::string cfg = write_temp("fd", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
      "engine": "fd",
      "fd": {"n_cells": 64}
    })");
    RunResult r = run_cli("solve-fd -c " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("x,u") != std::string::npos);

    const std::string mcfg = write_temp("mc", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
      "engine": "mc",
      "mc": {"paths": 500, "seed": 5, "threads": 2},
      "points": [0.0]
    })");
    RunResult m1 = run_cli("solve-mc -c " + mcfg);
    RunResult m2 = run_cli("solve-mc -c " + mcfg);
    CHECK(m1.exit_code == 0);
    CHECK(m1.out == m2.out); // same seed, bit-identical output
    RunResult m3 = run_cli("solve-mc -c " + mcfg + " --seed 6");
    CHECK(m3.out != m1.out);
}

TEST_CASE("cli: compare emits the contract columns") {
    const std::string cfg = write_temp("cmp", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
      "engine": "compare",
      "fd": {"n_cells": 64},
      "mc": {"paths": 300, "seed": 3},
      "points": [0.0, 0.5]
    })");
    RunResult r = run_cli("compare -c " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("x,fd,mc,mc_stderr,analytic") != std::string::npos);

    // empty point list: header only, still exit 0
    const std::string empty = write_temp("cmp_empty", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
      "engine": "compare",
      "fd": {"n_cells": 64},
      "mc": {"paths": 100, "seed": 3},
      "points": []
    })");
    RunResult e = run_cli("compare -c " + empty);
    CHECK(e.exit_code == 0);
}

TEST_CASE("cli: operator-eval and convergence") {
    const std::string op = write_temp("op", R"({
      "problem": {"kernel": {"type": "classical-stable", "beta": 0.5}, "a": 0.0, "b": 2.0},
      "engine": "operator-eval",
      "f": "x^2",
      "points": [1.0]
    })");
    RunResult r = run_cli("operator-eval -c " + op);
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("x,value") != std::string::npos);

    const std::string cv = write_temp("cv", R"({
      "problem": {"kernel": {"type": "symmetric-stable", "beta": 0.5}, "g": "1"},
      "engine": "convergence",
      "grids": [25, 50, 100]
    })");
    RunResult c = run_cli("convergence -c " + cv);
    CHECK(c.exit_code == 0);
    CHECK(c.out.find("n_cells,sup_error,observed_order") != std::string::npos);
}
