#pragma once

namespace trigsim {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace trigsim
