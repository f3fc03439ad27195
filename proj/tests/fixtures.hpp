#pragma once

#include <filesystem>

#include "afcsim/pipeline.hpp"

namespace testing {

inline std::filesystem::path fixture(const char* name) { return afcsim::pipeline::default_fixture_dir() / name; }

}  // namespace testing
