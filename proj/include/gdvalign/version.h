#pragma once

namespace gdvalign {

inline constexpr const char *kVersion = "0.1.0";

}  // namespace gdvalign
