#pragma once

namespace seqcast {

inline constexpr const char* kVersion = "0.1.0";

}
