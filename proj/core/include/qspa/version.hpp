#pragma once

namespace qspa {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qspa
