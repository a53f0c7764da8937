#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace dynflow {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

inline constexpr VertexId kNoVertex = -1;
inline constexpr EdgeId kNoEdge = -1;

using Rational = boost::multiprecision::cpp_rational;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An edge traversed forward (+1, tail to head) or backward (-1).
struct OrientedEdge {
  EdgeId id = kNoEdge;
  int sign = 1;

  friend bool operator==(const OrientedEdge&, const OrientedEdge&) = default;
};

}  // namespace dynflow
