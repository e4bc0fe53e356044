#pragma once

namespace advsec {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kManifestFormatVersion = 1;

}  // namespace advsec
