#pragma once

#include <stdexcept>
#include <string>

namespace xsparse {

// A quality/sparsity target that cannot be met by the requested method.
struct TargetUnreachableError : std::runtime_error {
    explicit TargetUnreachableError(const std::string& what) : std::runtime_error(what) {}
};

// File parse or OS-level I/O failure.
struct FileError : std::runtime_error {
    explicit FileError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace xsparse
