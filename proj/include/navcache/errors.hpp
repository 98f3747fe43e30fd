// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace navcache {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct InvalidDepth : Error {
    using Error::Error;
};

struct ScoreRangeError : Error {
    using Error::Error;
};

struct AttentionNormalizationError : Error {
    using Error::Error;
};

struct MaskRemapInconsistency : Error {
    using Error::Error;
};

struct StaleWriteError : Error {
    using Error::Error;
};

struct EmptyEpisode : Error {
    using Error::Error;
};

struct ComparisonError : Error {
    using Error::Error;
};

struct RenderHole : Error {
    using Error::Error;
};

struct TrajectoryOutOfBounds : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace navcache
