#pragma once

#include <string>

namespace strand {

// Round-trip-exact decimal form ("%.17g"); identical inputs always print
// identical bytes.
std::string format_double(double x);

// Writes to <path>.tmp in the same directory, then renames into place, so a
// reader never observes a partially written file.
void atomic_write_file(const std::string& path, const std::string& body);

}  // namespace strand
