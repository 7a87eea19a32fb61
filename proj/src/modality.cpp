#include "hmfmd/modality.hpp"

#include <algorithm>
#include <cctype>

#include "hmfmd/errors.hpp"

namespace hmfmd {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::A: return "A";
    case Modality::V: return "V";
    case Modality::T: return "T";
  }
  return "?";
}

Modality parse_modality(std::string_view token) {
  const std::string u = upper(trim(token));
  if (u == "A") return Modality::A;
  if (u == "V") return Modality::V;
  if (u == "T") return Modality::T;
  throw InvalidInput("unknown modality '" + std::string(token) + "' (expected A, V or T)");
}

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::A: return "A";
    case Channel::V: return "V";
    case Channel::T: return "T";
    case Channel::Y: return "Y";
  }
  return "?";
}

Channel channel_of(Modality m) { return static_cast<Channel>(index_of(m)); }

Channel parse_channel(std::string_view token) {
  const std::string u = upper(trim(token));
  if (u == "A") return Channel::A;
  if (u == "V") return Channel::V;
  if (u == "T") return Channel::T;
  if (u == "Y") return Channel::Y;
  throw InvalidInput("unknown channel '" + std::string(trim(token)) +
                     "' (expected A, V, T or Y)");
}

std::vector<Channel> parse_channel_list(std::string_view text) {
  std::vector<Channel> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto stop = comma == std::string_view::npos ? text.size() : comma;
    const Channel c = parse_channel(text.substr(start, stop - start));
    if (std::find(out.begin(), out.end(), c) != out.end()) {
      throw InvalidInput("duplicate channel '" + std::string(channel_name(c)) + "'");
    }
    out.push_back(c);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_channel_list(const std::vector<Channel>& channels) {
  std::string out;
  for (Channel c : channels) {
    if (!out.empty()) out += ',';
    out += channel_name(c);
  }
  return out;
}

std::string_view variant_name(Variant v) {
  return v == Variant::ours ? "ours" : "baseline_bilstm";
}

Variant parse_variant(std::string_view token) {
  const auto t = trim(token);
  if (t == "ours") return Variant::ours;
  if (t == "baseline_bilstm" || t == "baseline") return Variant::baseline_bilstm;
  throw InvalidInput("unknown variant '" + std::string(t) + "' (expected ours or baseline)");
}

std::string Stage1Variant::tag() const {
  std::string out;
  for (Modality m : kModalities) {
    if (!out.empty()) out += ',';
    const char letter = modality_name(m)[0];
    out += (*this)[m] == Variant::ours
               ? letter
               : static_cast<char>(std::tolower(static_cast<unsigned char>(letter)));
  }
  return out;
}

Stage1Variant Stage1Variant::parse_tag(std::string_view tag) {
  std::string letters;
  for (char c : tag) {
    if (c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
    letters += c;
  }
  const std::string expected = "AVT";
  if (letters.size() != 3) throw InvalidInput("variant tag '" + std::string(tag) + "' malformed");
  Stage1Variant v;
  for (std::size_t i = 0; i < 3; ++i) {
    const char c = letters[i];
    if (c == expected[i]) {
      v.choice[i] = Variant::ours;
    } else if (c == std::tolower(static_cast<unsigned char>(expected[i]))) {
      v.choice[i] = Variant::baseline_bilstm;
    } else {
      throw InvalidInput("variant tag '" + std::string(tag) + "' malformed");
    }
  }
  return v;
}

}  // namespace hmfmd
