#pragma once

namespace nlfkpp {
inline constexpr const char* version = "0.1.0";
}
