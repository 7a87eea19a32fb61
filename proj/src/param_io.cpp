#include "hmfmd/param_io.hpp"

#include <charconv>
#include <sstream>

namespace hmfmd {

namespace {

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    const auto end = text_.find('\n', pos_);
    const auto stop = end == std::string_view::npos ? text_.size() : end;
    line = text_.substr(pos_, stop - pos_);
    pos_ = stop + 1;
    ++line_no_;
    return true;
  }
  std::string_view expect(const char* what) {
    std::string_view line;
    if (!next(line)) throw ParseError(std::string("param document: unexpected end, wanted ") + what);
    return line;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::size_t parse_count(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("param document line " + std::to_string(line) + ": bad count '" +
                     std::string(tok) + "'");
  }
  return v;
}

double parse_value(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("param document line " + std::to_string(line) + ": bad value '" +
                     std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::string format_double17(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

std::string format_param_document(std::span<const NamedTensor> tensors) {
  std::string out = "hmfmd-params\nformat_version " + std::to_string(kParamFormatVersion) +
                    "\ntensors " + std::to_string(tensors.size()) + "\n";
  for (const auto& t : tensors) {
    out += "tensor " + t.name + " " + std::to_string(t.value.rows()) + " " +
           std::to_string(t.value.cols()) + "\n";
    for (std::size_t r = 0; r < t.value.rows(); ++r) {
      auto row = t.value.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out += ' ';
        out += format_double17(row[c]);
      }
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

std::vector<NamedTensor> parse_param_document(std::string_view text) {
  LineReader in(text);
  if (in.expect("magic") != "hmfmd-params") throw ParseError("param document: bad magic line");
  auto version = split_ws(in.expect("format_version"));
  if (version.size() != 2 || version[0] != "format_version") {
    throw ParseError("param document: missing format_version");
  }
  if (parse_count(version[1], in.line_no()) != static_cast<std::size_t>(kParamFormatVersion)) {
    throw ParseError("param document: unsupported format_version " + std::string(version[1]));
  }
  auto count_line = split_ws(in.expect("tensors"));
  if (count_line.size() != 2 || count_line[0] != "tensors") {
    throw ParseError("param document: missing tensor count");
  }
  const std::size_t count = parse_count(count_line[1], in.line_no());

  std::vector<NamedTensor> tensors;
  tensors.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    auto header = split_ws(in.expect("tensor header"));
    if (header.size() != 4 || header[0] != "tensor") {
      throw ParseError("param document line " + std::to_string(in.line_no()) +
                       ": expected 'tensor <name> <rows> <cols>'");
    }
    const std::size_t rows = parse_count(header[2], in.line_no());
    const std::size_t cols = parse_count(header[3], in.line_no());
    std::vector<double> data;
    data.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      auto toks = split_ws(in.expect("tensor row"));
      if (toks.size() != cols) {
        throw ParseError("param document line " + std::to_string(in.line_no()) + ": expected " +
                         std::to_string(cols) + " values, found " + std::to_string(toks.size()));
      }
      for (auto tok : toks) data.push_back(parse_value(tok, in.line_no()));
    }
    tensors.push_back({std::string(header[1]), Matrix(rows, cols, std::move(data))});
  }
  if (in.expect("end") != "end") throw ParseError("param document: missing 'end'");
  return tensors;
}

}  // namespace hmfmd
