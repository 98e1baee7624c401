// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace stereohdr {

/// Base class for all stereohdr error conditions.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A shot whose noise floor exceeds its saturation ceiling covers nothing.
struct InfeasibleShot : Error {
    using Error::Error;
};

/// No capture sequence within hardware limits satisfies the constraints.
/// The message names the binding constraint.
struct Infeasible : Error {
    using Error::Error;
};

/// Initialization would need more shots than the configured cap.
struct ShotBudgetExceeded : Error {
    using Error::Error;
};

/// Exhaustive search grid exceeds the combination cap.
struct GridTooLarge : Error {
    using Error::Error;
};

/// A radiance-distribution estimate found no usable pixel.
struct EmptyEstimate : Error {
    using Error::Error;
};

/// Scene layout cannot be realized at the requested resolution.
struct SpecInfeasible : Error {
    using Error::Error;
};

/// The response-estimation system is singular after gauge fixing.
struct RankDeficient : Error {
    using Error::Error;
};

/// Too few usable correspondences for response estimation.
struct InsufficientData : Error {
    using Error::Error;
};

/// The two cameras' radiance ranges do not intersect.
struct NoCommonRange : Error {
    using Error::Error;
};

/// A metric was requested over an empty pixel mask.
struct EmptyMask : Error {
    using Error::Error;
};

/// Malformed or unreadable input file.
struct BadInput : Error {
    using Error::Error;
};

}  // namespace stereohdr
