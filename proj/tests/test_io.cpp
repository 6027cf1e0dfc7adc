#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vstates/errors.hpp"
#include "vstates/io.hpp"

using namespace vstates;
using nlohmann::json;

namespace {
std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
const std::string tmpdir = "/tmp/vstates_io_test_";
} // namespace

TEST_CASE("RunConfig validation") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.m = 2;
    CHECK_THROWS_AS(cfg.validate(), std::domain_error);
    cfg.m = 4;
    cfg.b = 1.3;
    CHECK_THROWS_AS(cfg.validate(), std::domain_error);
    cfg.b = 0.63;
    cfg.nodes = 100; // below 4*N*m
    CHECK_THROWS_AS(cfg.validate(), std::domain_error);
}

TEST_CASE("config file application") {
    const std::string path = tmpdir + "cfg.json";
    {
        std::ofstream out(path);
        out << R"({"m": 5, "b": 0.4, "sign": "minus", "ds0": 0.002})";
    }
    RunConfig cfg;
    apply_config_file(cfg, path);
    CHECK(cfg.m == 5);
    CHECK(cfg.b == doctest::Approx(0.4));
    CHECK(cfg.sign == BranchSign::minus);
    CHECK(cfg.ds0 == doctest::Approx(0.002));
    CHECK(cfg.modes == 64); // untouched default

    {
        std::ofstream out(path);
        out << R"({"mm": 5})";
    }
    RunConfig cfg2;
    CHECK_THROWS_AS(apply_config_file(cfg2, path), io_error);

    {
        std::ofstream out(path);
        out << "{not json";
    }
    CHECK_THROWS_AS(apply_config_file(cfg2, path), io_error);
    CHECK_THROWS_AS(apply_config_file(cfg2, tmpdir + "missing.json"), io_error);
}

TEST_CASE("state round trip is bit-exact") {
    PatchState s = trivial_state(4, 0.63, 0.71234567890123456, 6);
    s.outer.coeffs = {0.01 / 3.0, 1e-17, 0.0, 7e-4, 2.5e-3, -1e-3 / 7.0};
    s.inner.coeffs = {1e-2, 2e-3, -3e-4, 4e-5, -5e-6, 6e-7};
    const std::string path = tmpdir + "state.json";
    save_state(s, path);
    const PatchState r = load_state(path);
    CHECK(r.lambda == s.lambda);
    CHECK(r.b == s.b);
    CHECK(r.outer.fold == 4);
    CHECK(r.inner.lead == s.b);
    for (int n = 0; n < 6; ++n) {
        CHECK(r.outer.coeffs[n] == s.outer.coeffs[n]);
        CHECK(r.inner.coeffs[n] == s.inner.coeffs[n]);
    }
}

TEST_CASE("load_state rejects malformed and invalid input") {
    const std::string path = tmpdir + "bad.json";
    {
        std::ofstream out(path);
        out << "{broken";
    }
    CHECK_THROWS_AS(load_state(path), io_error);
    {
        std::ofstream out(path);
        out << R"({"m": 4, "b": 0.63})"; // missing fields
    }
    CHECK_THROWS_AS(load_state(path), io_error);
    {
        std::ofstream out(path); // b out of range: invariant violation
        out << R"({"m": 4, "b": 1.4, "lambda": 0.7,
                   "outer_coeffs": [0.0], "inner_coeffs": [0.0]})";
    }
    CHECK_THROWS_AS(load_state(path), invalid_state_error);
    {
        std::ofstream out(path); // intersecting boundaries
        out << R"({"m": 4, "b": 0.63, "lambda": 0.7,
                   "outer_coeffs": [0.0], "inner_coeffs": [0.5]})";
    }
    CHECK_THROWS(load_state(path));
}

TEST_CASE("branch CSV format and determinism") {
    Branch br;
    br.m = 4;
    br.b = 0.63;
    br.closed = true;
    br.stop_reason = "closed";
    br.trivial_hits = {0.731713, 0.665187};
    for (int i = 0; i < 3; ++i) {
        BranchPoint p;
        p.lambda = 0.7 + 1e-3 * i;
        p.omega = 0.5 * (1.0 - p.lambda);
        p.t = 1e-3 * (i + 1);
        p.residual_sup = 1e-13;
        p.arclength = 1e-3 * i;
        p.coeffs = {1.0 / 3.0 * (i + 1), -1e-4, 0.0, 0.0};
        br.points.push_back(p);
    }
    const std::string csv = tmpdir + "branch.csv";
    write_branch_csv(br, csv);
    const std::string text = slurp(csv);
    CHECK(text.rfind("index,lambda,omega,t,a_1_1,a_2_1,residual_sup\n", 0) == 0);
    CHECK(text.find('\r') == std::string::npos); // LF only
    CHECK(text.find("0.33333333333333331") != std::string::npos); // 17 digits

    write_branch_csv(br, tmpdir + "branch2.csv");
    CHECK(slurp(tmpdir + "branch2.csv") == text); // byte-identical re-run

    // sidecar carries the metadata and full coefficient vectors
    const std::string sidecar = tmpdir + "branch.json";
    write_branch_json(br, 2, 32, sidecar);
    const json j = json::parse(slurp(sidecar));
    CHECK(j.at("m") == 4);
    CHECK(j.at("N") == 2);
    CHECK(j.at("closed") == true);
    CHECK(j.at("trivial_hits").size() == 2);
    CHECK(j.at("points").size() == 3);
    CHECK(j.at("points")[0].at("coeffs").size() == 4);
}

TEST_CASE("format_real round-trips doubles") {
    for (double x : {1.0 / 3.0, 0.1, -2.7182818284590452, 1e-300, 0.0}) {
        CHECK(std::stod(format_real(x)) == x);
    }
}
