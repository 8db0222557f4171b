#pragma once

namespace qcorr {

inline constexpr const char* version = "0.1.0";

}  // namespace qcorr
