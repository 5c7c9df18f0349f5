#pragma once

namespace riskkit {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace riskkit
