#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testing_support {

inline std::string source_path(const std::string& rel) { return std::string(CPG_SOURCE_DIR) + "/" + rel; }

inline std::string fixture_path(const std::string& name) { return source_path("fixtures/" + name); }

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testing_support
