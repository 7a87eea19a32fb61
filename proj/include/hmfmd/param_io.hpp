#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hmfmd/errors.hpp"
#include "hmfmd/matrix.hpp"

namespace hmfmd {

inline constexpr int kParamFormatVersion = 1;

struct NamedTensor {
  std::string name;
  Matrix value;
};

/// Text document:
///
///   hmfmd-params
///   format_version 1
///   tensors <count>
///   tensor <name> <rows> <cols>
///   <row values, 17 significant digits, space separated>   (one line per row)
///   ...
///   end
std::string format_param_document(std::span<const NamedTensor> tensors);
std::vector<NamedTensor> parse_param_document(std::string_view text);

/// Shortest text that parses back to the same double (17 significant digits).
std::string format_double17(double v);

template <class P>
std::vector<NamedTensor> export_tensors(const P& params) {
  std::vector<NamedTensor> out;
  params.visit([&](const std::string& name, const Matrix& m) { out.push_back({name, m}); });
  return out;
}

/// Copies tensors into an already-shaped parameter structure, checking that
/// names, order and shapes agree exactly.
template <class P>
void import_tensors(P& params, std::span<const NamedTensor> tensors) {
  std::size_t i = 0;
  params.visit([&](const std::string& name, Matrix& m) {
    if (i >= tensors.size()) throw ParseError("param document: missing tensor " + name);
    const NamedTensor& t = tensors[i++];
    if (t.name != name) {
      throw ParseError("param document: expected tensor " + name + ", found " + t.name);
    }
    if (!t.value.same_shape(m)) {
      throw ParseError("param document: tensor " + name + " has shape " +
                       t.value.shape_string() + ", expected " + m.shape_string());
    }
    m = t.value;
  });
  if (i != tensors.size()) throw ParseError("param document: unexpected extra tensors");
}

template <class P>
std::string serialize_params(const P& params) {
  const auto tensors = export_tensors(params);
  return format_param_document(tensors);
}

}  // namespace hmfmd
