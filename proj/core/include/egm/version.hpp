#pragma once

namespace egm {

// Library version, echoed into run output directories for reproducibility.
inline constexpr const char* kVersion = "1.0.0";

} // namespace egm
