#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

namespace blockprop {

/// Per-post character-class counts, all over Unicode code points.
struct TextMetrics {
  double chars = 0;
  double lower = 0;
  double upper = 0;
  double digits = 0;
  double spaces = 0;
  double emoji = 0;  // Extended_Pictographic code points
  friend bool operator==(const TextMetrics&, const TextMetrics&) = default;
};

/// Invalid UTF-8 sequences count as one replacement character each.
TextMetrics measure_text(std::string_view utf8);

/// Shannon entropy of the empirical distribution over observed categories,
/// divided by log(k) for k distinct categories; 0 when k < 2.
template <typename Range>
double normalized_entropy(const Range& counts) {
  double total = 0;
  std::size_t k = 0;
  for (const auto& c : counts) {
    const double v = static_cast<double>(c);
    if (v > 0) {
      total += v;
      ++k;
    }
  }
  if (k < 2) return 0.0;
  double h = 0;
  for (const auto& c : counts) {
    const double v = static_cast<double>(c);
    if (v > 0) {
      const double p = v / total;
      h -= p * std::log(p);
    }
  }
  const double e = h / std::log(static_cast<double>(k));
  return e > 1.0 ? 1.0 : (e < 0.0 ? 0.0 : e);
}

/// Entropy over the values of a category → count map.
template <typename Key, typename Count>
double normalized_entropy(const std::map<Key, Count>& counts) {
  double total = 0;
  std::size_t k = 0;
  for (const auto& [key, c] : counts)
    if (c > 0) total += static_cast<double>(c), ++k;
  if (k < 2) return 0.0;
  double h = 0;
  for (const auto& [key, c] : counts) {
    if (c <= 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  const double e = h / std::log(static_cast<double>(k));
  return e > 1.0 ? 1.0 : (e < 0.0 ? 0.0 : e);
}

/// Host of a URL, lowercased, without port, credentials or a leading "www.".
/// When a public-suffix set is supplied the host is reduced to eTLD+1.
/// Returns nullopt when no host can be extracted.
std::optional<std::string> registrable_domain(std::string_view url, const std::set<std::string>* public_suffixes = nullptr);

/// Primary language subtag, lowercased ("en-US" → "en").
std::string primary_language(std::string_view tag);

}  // namespace blockprop
