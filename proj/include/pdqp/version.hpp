#pragma once

namespace pdqp {

inline constexpr const char* version = "0.1.0";

}  // namespace pdqp
