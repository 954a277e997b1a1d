#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing_support {

/// |a - b| / max(1, |b|): relative away from zero, absolute near it.
inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline std::string source_path(const std::string& rel) { return std::string(PINN_SOURCE_DIR) + "/" + rel; }

/// Fresh directory under the build tree, emptied on creation.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    const auto dir = std::filesystem::path(PINN_BINARY_DIR) / "test_scratch" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace testing_support
