#pragma once

namespace crashrules {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace crashrules
