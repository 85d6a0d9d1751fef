#pragma once

namespace fvol {
inline constexpr const char* kVersion = "0.1.0";
}
