#pragma once

#include <stdexcept>
#include <string>

namespace sccaf {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or dimension mismatch between operands.
struct shape_error : error {
    using error::error;
};

// Input outside an operation's documented domain (e.g. log of a negative).
struct domain_error : error {
    using error::error;
};

// Caller violated an API precondition.
struct contract_error : error {
    using error::error;
};

// Malformed or inconsistent input data files.
struct ingest_error : error {
    using error::error;
};

// A stratum cannot populate train/val/test.
struct split_error : error {
    using error::error;
};

// Negative-edge request exceeds the available pool.
struct sampling_error : error {
    using error::error;
};

// Metric undefined on the given index set (missing class or group).
struct metric_error : error {
    using error::error;
};

constexpr double kEps = 1e-12;

}  // namespace sccaf
