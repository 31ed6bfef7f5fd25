#pragma once

namespace acf {

inline constexpr const char* kVersion = "0.1.0";

}
