#pragma once

#include <iosfwd>

#include "cfn/samples.hpp"

namespace cfn {

/// Text format: a `k n` header line, then k lines of n entries in {-1, 1}.
void write_samples_text(std::ostream& out, const SampleMatrix& m);
SampleMatrix read_samples_text(std::istream& in);

/// Binary format (little-endian): "CFNB", u32 version = 1, u64 k, u64 n,
/// then k rows of ceil(n/8) bytes, bit j%8 of byte j/8 set when entry j
/// is +1. See docs/sample_format.md.
void write_samples_binary(std::ostream& out, const SampleMatrix& m);
SampleMatrix read_samples_binary(std::istream& in);

}  // namespace cfn
