#ifndef ROIDIFF_ERRORS_HPP
#define ROIDIFF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace roidiff {

/// Operation received an empty pixel window.
struct EmptyRoiError : std::runtime_error {
    explicit EmptyRoiError(const std::string& what) : std::runtime_error(what) {}
};

/// Centroid requested for an all-black window (M00 == 0).
struct ZeroMassError : std::runtime_error {
    explicit ZeroMassError(const std::string& what) : std::runtime_error(what) {}
};

/// Template placement falls outside the search image.
struct PlacementOutOfBoundsError : std::runtime_error {
    explicit PlacementOutOfBoundsError(const std::string& what) : std::runtime_error(what) {}
};

/// Input pages have different pixel widths.
struct ResolutionMismatchError : std::runtime_error {
    explicit ResolutionMismatchError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed CSV / JSON / config input.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// I/O failure (unreadable file, PNG decode error, ...).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace roidiff

#endif
