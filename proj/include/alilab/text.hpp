#pragma once

#include <string>
#include <vector>

namespace alilab {

// Shortest decimal form that round-trips a double exactly ("%.17g" fallback):
// used everywhere a float lands in a text artifact so reruns are byte-stable.
std::string format_double(double v);

// "%.*g" with a fixed precision (plot coordinates etc.).
std::string format_double(double v, int precision);

std::string trim(const std::string& s);

// Split on a delimiter, trimming each piece; empty input -> empty list.
std::vector<std::string> split(const std::string& s, char delim);

} // namespace alilab
