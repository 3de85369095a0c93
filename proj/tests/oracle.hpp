#pragma once

// Test-side Kauffman bracket oracle, independent of the chain-complex code
// path: skein recursion over crossings with its own loop counting.

#include "kh/diagram.hpp"

namespace kh_oracle {

/// Unnormalized Jones polynomial of the diagram (value q + q^-1 on the
/// 0-crossing unknot), computed as
///   (-1)^{n-} q^{n+ - 2 n-} * sum_sigma (-q)^{|sigma|} (q + q^-1)^{loops}.
kh::Laurent jones(const kh::Diagram& d);

}  // namespace kh_oracle
