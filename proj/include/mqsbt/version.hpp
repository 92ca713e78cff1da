#pragma once

namespace mqsbt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mqsbt
