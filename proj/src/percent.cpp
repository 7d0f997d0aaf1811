#include "cpg/percent.hpp"

#include <cstdio>

namespace cpg {

std::string truncate2_percent(std::size_t part, std::size_t whole) {
    if (whole == 0) return "0.00";
    // Integer basis points avoid binary floating point drift (e.g. 8.33 vs 8.32).
    unsigned long long bp = static_cast<unsigned long long>(part) * 10000ULL / whole;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", bp / 100, bp % 100);
    return buf;
}

}  // namespace cpg
