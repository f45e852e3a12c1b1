#pragma once

namespace affsob {
inline constexpr const char* kVersion = "1.0.0";
}
