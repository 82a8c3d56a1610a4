#ifndef DHWPAIR_VERSION_HPP
#define DHWPAIR_VERSION_HPP

namespace dhwpair {

inline constexpr const char* kEngineVersion = "0.1.0";

// Version of the sidecar metadata schema written next to grid/curve files.
inline constexpr int kSidecarSchemaVersion = 1;

}  // namespace dhwpair

#endif
