#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "dip3d/pointing_resolver.hpp"

namespace dip3d::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitRejected = 2;

struct PipelineConfig {
  ResolverConfig resolver;
  std::uint64_t seed = 42;
  int jobs = 1;

  void validate() const;
};

// Every field is optional; missing ones keep the value already in `base`.
PipelineConfig parse_config(std::string_view document,
                            const PipelineConfig& base = {});
std::string serialize_config(const PipelineConfig& config);

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace dip3d::cli
