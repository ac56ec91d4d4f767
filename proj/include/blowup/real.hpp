#pragma once

#include <concepts>

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/float128.hpp>

namespace blowup {

/// Quad precision, for states whose inverse through phi is badly conditioned.
using quad = boost::multiprecision::float128;

template <typename T>
concept Real = std::floating_point<T> || std::same_as<T, quad>;

inline double value_of(const quad& x) { return static_cast<double>(x); }

}  // namespace blowup
