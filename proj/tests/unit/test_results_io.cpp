#include <doctest.h>

#include <cmath>

#include "cassure/fingerprint.hpp"
#include "cassure/results_io.hpp"
#include "support.hpp"

using namespace cassure;

namespace {

std::vector<VerificationResult> sample() {
    VerificationResult p;
    p.property = "P_a";
    p.property_text = "P=? [ F x = 1 ]";
    p.kind = ResultKind::Probability;
    p.value = 0.1 + 0.2;
    p.stats = {12, 3e-12};
    p.engine = "explicit/gauss-seidel";
    VerificationResult r;
    r.property = "R_b";
    r.property_text = "R{\"t\"}=? [ F x = 1 ]";
    r.kind = ResultKind::Reward;
    r.value = Unbounded{};
    r.engine = "explicit/gauss-seidel";
    VerificationResult b;
    b.property = "P_c";
    b.property_text = "P>=1 [ F x = 1 ]";
    b.kind = ResultKind::Boolean;
    b.verdict = false;
    b.engine = "explicit/graph";
    std::vector<VerificationResult> all{p, r, b};
    stamp_results(all, "dtmc ...", {}, "2026-01-02T03:04:05Z");
    return all;
}

}  // namespace

TEST_SUITE("results_io") {

TEST_CASE("sha-256 test vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(fingerprint("abc") == "ba7816bf8f01cfea");
}

TEST_CASE("model fingerprint depends on text, constants and property") {
    auto base = model_fingerprint("m", {}, "p");
    CHECK(base == model_fingerprint("m", {}, "p"));
    CHECK(base != model_fingerprint("m2", {}, "p"));
    CHECK(base != model_fingerprint("m", {{"c", 1.0}}, "p"));
    CHECK(base != model_fingerprint("m", {}, "q"));
}

TEST_CASE("stamping fills fingerprints") {
    auto all = sample();
    for (const auto& r : all) {
        CHECK(r.model_fingerprint.size() == 16);
        CHECK(r.result_fingerprint.size() == 16);
        CHECK(r.checked_at == "2026-01-02T03:04:05Z");
    }
    CHECK(all[0].model_fingerprint != all[1].model_fingerprint);
}

TEST_CASE("result fingerprint ignores timing but not values") {
    auto a = sample()[0];
    auto b = a;
    b.wall_ms = 99.0;
    b.stats.iterations = 1;
    b.checked_at = "later";
    CHECK(result_fingerprint(a) == result_fingerprint(b));
    b.value = 0.3;
    CHECK(result_fingerprint(a) != result_fingerprint(b));
}

TEST_CASE("JSON line field order and encoding") {
    auto all = sample();
    auto line = to_json_line(all[0]);
    auto pos = [&](const char* key) { return line.find(std::string("\"") + key + "\""); };
    const char* order[] = {"property", "kind", "value", "verdict", "marginal", "iterations", "residual",
                           "wall_ms", "engine", "formula", "model_fingerprint", "result_fingerprint", "checked_at"};
    for (std::size_t i = 1; i < std::size(order); ++i) CHECK(pos(order[i - 1]) < pos(order[i]));
    CHECK(line.find("0.30000000000000004") != std::string::npos);
    CHECK(to_json_line(all[1]).find("\"value\":\"+inf\"") != std::string::npos);
    CHECK(to_json_line(all[2]).find("\"value\":null") != std::string::npos);
    CHECK(to_json_line(all[2]).find("\"verdict\":false") != std::string::npos);
}

TEST_CASE("write then parse round-trips") {
    auto all = sample();
    auto text = write_results(all);
    auto back = parse_results(text);
    REQUIRE(back.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(back[i].property == all[i].property);
        CHECK(back[i].property_text == all[i].property_text);
        CHECK(back[i].kind == all[i].kind);
        CHECK(back[i].value == all[i].value);
        CHECK(back[i].verdict == all[i].verdict);
        CHECK(back[i].result_fingerprint == all[i].result_fingerprint);
        CHECK(back[i].stats.iterations == all[i].stats.iterations);
    }
    CHECK(write_results(back) == text);
}

TEST_CASE("malformed records report their line") {
    auto text = write_results(sample()) + "{\"property\": 3}\n";
    try {
        (void)parse_results(text, "r.jsonl");
        FAIL("expected an error");
    } catch (const DiagnosticError& e) {
        REQUIRE_FALSE(e.diagnostics().empty());
        CHECK(e.diagnostics()[0].span.line == 4);
    }
    CHECK_THROWS_AS((void)parse_results("not json\n"), DiagnosticError);
    CHECK(parse_results("").empty());
}

TEST_CASE("timestamp shape") {
    auto t = utc_timestamp();
    CHECK(t.size() == 20);
    CHECK(t[10] == 'T');
    CHECK(t.back() == 'Z');
}

}  // TEST_SUITE
