#pragma once

namespace lognls {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lognls
