#pragma once

#include <stdexcept>
#include <string>

namespace ligo {

// Error taxonomy mirrored by the CLI exit-code table (see tools/ligo_cli.cpp).

// Dimension mismatch between operands; message names both shapes.
struct shape_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dense materialization would exceed its configured cap.
struct size_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite value where a finite one is required.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A GrowthSpec / config constraint is violated.
struct spec_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data problem (missing corpus, bad token, empty stream).
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File I/O or container-format problem (corrupt header, truncation, version).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss; message carries the diagnostic record.
struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ligo
