#pragma once

#include <string>
#include <vector>

#include "hmfmd/matrix.hpp"

namespace hmfmd {

// Parameter structs expose `visit(f, prefix)` calling f(name, Matrix&) for
// every learnable tensor in a fixed order. The helpers below build on that.

template <class P>
std::vector<Matrix*> tensor_ptrs(P& params) {
  std::vector<Matrix*> out;
  params.visit([&](const std::string&, Matrix& m) { out.push_back(&m); });
  return out;
}

template <class P>
std::vector<const Matrix*> tensor_ptrs(const P& params) {
  std::vector<const Matrix*> out;
  params.visit([&](const std::string&, const Matrix& m) { out.push_back(&m); });
  return out;
}

template <class P>
std::vector<std::string> tensor_names(const P& params) {
  std::vector<std::string> out;
  params.visit([&](const std::string& name, const Matrix&) { out.push_back(name); });
  return out;
}

/// Same structure as `params` with every tensor zeroed (gradient buffers).
template <class P>
P zeros_like(const P& params) {
  P out = params;
  out.visit([](const std::string&, Matrix& m) { m.set_zero(); });
  return out;
}

template <class P>
void set_zero(P& params) {
  params.visit([](const std::string&, Matrix& m) { m.set_zero(); });
}

/// dst += src tensor by tensor. Structures must match.
template <class P>
void accumulate(P& dst, const P& src) {
  auto d = tensor_ptrs(dst);
  auto s = tensor_ptrs(src);
  for (std::size_t i = 0; i < d.size(); ++i) add_inplace(*d[i], *s[i]);
}

template <class P>
std::size_t parameter_count(const P& params) {
  std::size_t n = 0;
  params.visit([&](const std::string&, const Matrix& m) { n += m.size(); });
  return n;
}

}  // namespace hmfmd
