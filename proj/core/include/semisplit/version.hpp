#pragma once

namespace semisplit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace semisplit
