#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace hmfmd {

/// Canonical order A, V, T is used for every concatenation.
enum class Modality { A = 0, V = 1, T = 2 };

inline constexpr std::array<Modality, 3> kModalities = {Modality::A, Modality::V, Modality::T};

inline std::size_t index_of(Modality m) { return static_cast<std::size_t>(m); }
std::string_view modality_name(Modality m);
/// Accepts "A", "V", "T" (case-insensitive).
Modality parse_modality(std::string_view token);

/// Fusion input channels. Y carries the stacked Stage-1 predictions.
enum class Channel { A = 0, V = 1, T = 2, Y = 3 };

inline constexpr std::array<Channel, 4> kChannels = {Channel::A, Channel::V, Channel::T,
                                                      Channel::Y};

std::string_view channel_name(Channel c);
Channel channel_of(Modality m);
/// "A", "V", "T" or "Y"; throws InvalidInput naming the offending token.
Channel parse_channel(std::string_view token);
/// Comma-separated list such as "A,V,T,Y"; result is sorted canonically and
/// rejects duplicates.
std::vector<Channel> parse_channel_list(std::string_view text);
std::string format_channel_list(const std::vector<Channel>& channels);

enum class Variant { ours, baseline_bilstm };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view token);

/// Per-modality Stage-1 architecture choice. Tag notation: upper-case letter
/// for the discriminant module, lower-case for the baseline BiLSTM, e.g. "a,V,t".
struct Stage1Variant {
  std::array<Variant, 3> choice = {Variant::ours, Variant::ours, Variant::ours};

  Variant operator[](Modality m) const { return choice[index_of(m)]; }
  Variant& operator[](Modality m) { return choice[index_of(m)]; }
  std::string tag() const;
  static Stage1Variant parse_tag(std::string_view tag);
  friend bool operator==(const Stage1Variant&, const Stage1Variant&) = default;
};

}  // namespace hmfmd
