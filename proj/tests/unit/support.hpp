#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "json.hpp"

#include "fewsim/core/dataset.hpp"

namespace testing {

inline const nlohmann::json& oracles() {
    static const nlohmann::json j = [] {
        std::ifstream in(FEWSIM_ORACLES);
        return nlohmann::json::parse(in);
    }();
    return j;
}

inline const fewsim::StudyAreaDataset& bundled() {
    static const fewsim::StudyAreaDataset ds = fewsim::load_dataset(FEWSIM_DEFAULT_DATASET);
    return ds;
}

// Removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("fewsim-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline double rel_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace testing
