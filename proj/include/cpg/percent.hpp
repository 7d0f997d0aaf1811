#pragma once

#include <cstddef>
#include <string>

namespace cpg {

// 100 * part / whole, truncated (not rounded) to two decimals: 1/23 -> "4.34".
// A zero denominator yields "0.00".
std::string truncate2_percent(std::size_t part, std::size_t whole);

}  // namespace cpg
