#pragma once

#include <stdexcept>
#include <string>

namespace creature {

// Error taxonomy shared by all modules. The CLI maps validation errors to
// exit code 2 and resource/certificate failures to exit code 3.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mathematically ill-posed input (k > n, empty creature, ...).
struct domain_error : error {
  using error::error;
};

// Caller violated a documented precondition.
struct precondition_error : error {
  using error::error;
};

// An input object fails its invariants; message cites the violated clause.
struct validation_error : error {
  using error::error;
};

// Exact search or materialization would exceed a configured cap.
struct resource_error : error {
  using error::error;
};

// A postcondition that is asserted at runtime (a proof hypothesis turned
// into a checked certificate) failed on the produced object.
struct certificate_error : error {
  using error::error;
};

// Truncation artifact: the requested object lies beyond the finite horizon.
struct horizon_error : error {
  using error::error;
};

// Two quantities could not be separated at the allowed precision.
struct undecidable_error : error {
  using error::error;
};

}  // namespace creature
