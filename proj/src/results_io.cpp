#include "cassure/results_io.hpp"

#include <charconv>
#include <chrono>
#include <ctime>
#include <sstream>

#include "cassure/fingerprint.hpp"
#include "json.hpp"

namespace cassure {

namespace {

using Json = nlohmann::ordered_json;

std::string shortest(double d) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    return std::string(buf, end);
}

std::string value_text(const ResultValue& v) {
    if (auto d = std::get_if<double>(&v)) return shortest(*d);
    if (std::holds_alternative<Unbounded>(v)) return "+inf";
    return "none";
}

ResultKind kind_from(const std::string& s, const SourceSpan& where) {
    if (s == "probability") return ResultKind::Probability;
    if (s == "boolean") return ResultKind::Boolean;
    if (s == "reward") return ResultKind::Reward;
    throw DiagnosticError("unknown result kind '" + s + "'", where);
}

}  // namespace

std::string result_fingerprint(const VerificationResult& r) {
    std::string verdict = r.verdict ? (*r.verdict ? "true" : "false") : "none";
    return fingerprint(r.property + "\n" + kind_name(r.kind) + "\n" + value_text(r.value) + "\n" + verdict);
}

void stamp_results(std::vector<VerificationResult>& results, std::string_view model_text,
                   const std::map<std::string, double>& constants, const std::string& checked_at) {
    for (auto& r : results) {
        r.model_fingerprint = model_fingerprint(model_text, constants, r.property_text);
        r.result_fingerprint = result_fingerprint(r);
        r.checked_at = checked_at;
    }
}

std::string utc_timestamp() {
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

std::string to_json_line(const VerificationResult& r) {
    Json j;
    j["property"] = r.property;
    j["kind"] = kind_name(r.kind);
    if (auto d = std::get_if<double>(&r.value)) j["value"] = *d;
    else if (std::holds_alternative<Unbounded>(r.value)) j["value"] = "+inf";
    else j["value"] = nullptr;
    if (r.verdict) j["verdict"] = *r.verdict;
    else j["verdict"] = nullptr;
    j["marginal"] = r.marginal;
    j["iterations"] = r.stats.iterations;
    j["residual"] = r.stats.residual;
    j["wall_ms"] = r.wall_ms;
    j["engine"] = r.engine;
    j["formula"] = r.property_text;
    j["model_fingerprint"] = r.model_fingerprint;
    j["result_fingerprint"] = r.result_fingerprint;
    j["checked_at"] = r.checked_at;
    return j.dump();
}

std::string write_results(const std::vector<VerificationResult>& results) {
    std::string out;
    for (const auto& r : results) out += to_json_line(r) + "\n";
    return out;
}

std::vector<VerificationResult> parse_results(std::string_view text, const std::string& file) {
    std::vector<VerificationResult> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        SourceSpan where{file, number, 1, 0};
        try {
            auto j = Json::parse(line);
            VerificationResult r;
            r.property = j.at("property").get<std::string>();
            r.kind = kind_from(j.at("kind").get<std::string>(), where);
            const auto& v = j.at("value");
            if (v.is_number()) r.value = v.get<double>();
            else if (v.is_string() && v.get<std::string>() == "+inf") r.value = Unbounded{};
            else if (!v.is_null()) throw DiagnosticError("malformed value", where);
            const auto& verdict = j.at("verdict");
            if (verdict.is_boolean()) r.verdict = verdict.get<bool>();
            else if (!verdict.is_null()) throw DiagnosticError("malformed verdict", where);
            r.marginal = j.value("marginal", false);
            r.stats.iterations = j.value("iterations", std::int64_t{0});
            r.stats.residual = j.value("residual", 0.0);
            r.wall_ms = j.value("wall_ms", 0.0);
            r.engine = j.value("engine", std::string{});
            r.property_text = j.value("formula", std::string{});
            r.model_fingerprint = j.value("model_fingerprint", std::string{});
            r.result_fingerprint = j.value("result_fingerprint", std::string{});
            r.checked_at = j.value("checked_at", std::string{});
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw DiagnosticError(std::string("malformed result record: ") + e.what(), where);
        }
    }
    return out;
}

}  // namespace cassure
