#pragma once

#include <string>

namespace plkit {

// Shortest round-trip decimal representation of a double. Used everywhere a
// number reaches an output file so identical values serialize to identical
// bytes.
std::string format_double(double v);

}  // namespace plkit
