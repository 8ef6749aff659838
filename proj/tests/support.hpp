#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <unistd.h>

#include "cassure/engine.hpp"
#include "cassure/parser.hpp"
#include "cassure/state_space.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(CASSURE_TEST_DATA); }

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

inline std::string case_model_text() { return slurp(data_dir() / "nuclear.prism"); }
inline std::string case_props_text() { return slurp(data_dir() / "nuclear.props"); }

inline cassure::ModelAst case_model() { return cassure::parse_model(case_model_text(), "nuclear.prism"); }
inline std::vector<cassure::PropertySpec> case_props() {
    return cassure::parse_properties(case_props_text(), "nuclear.props");
}

inline cassure::StateSpace space_of(const cassure::ModelAst& ast, const std::map<std::string, double>& overrides = {}) {
    return cassure::fix_deadlocks(cassure::build_state_space(cassure::bind_shared(ast, overrides)));
}

inline cassure::StateSpace space_of(const std::string& model_text) { return space_of(cassure::parse_model(model_text)); }

inline cassure::StateSet states_where(const cassure::StateSpace& s, const std::string& predicate) {
    return cassure::label_states(s, cassure::parse_expression(predicate));
}

inline cassure::PropertySpec property(const std::string& text) { return cassure::parse_properties(text).at(0); }

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("cassure-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

}  // namespace testing
