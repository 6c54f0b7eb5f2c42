#ifndef ROIDIFF_VERSION_HPP
#define ROIDIFF_VERSION_HPP

namespace roidiff {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
