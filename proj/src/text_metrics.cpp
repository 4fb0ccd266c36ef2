#include "blockprop/text_metrics.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cctype>

namespace blockprop {

TextMetrics measure_text(std::string_view utf8) {
  TextMetrics m;
  const auto* s = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) c = 0xFFFD;
    m.chars += 1;
    if (u_islower(c)) m.lower += 1;
    if (u_isupper(c)) m.upper += 1;
    if (u_isdigit(c)) m.digits += 1;
    if (u_isUWhiteSpace(c)) m.spaces += 1;
    if (u_hasBinaryProperty(c, UCHAR_EXTENDED_PICTOGRAPHIC)) m.emoji += 1;
  }
  return m;
}

std::optional<std::string> registrable_domain(std::string_view url, const std::set<std::string>* public_suffixes) {
  std::string_view rest = url;
  while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
  if (auto scheme = rest.find("://"); scheme != std::string_view::npos) rest.remove_prefix(scheme + 3);
  else if (rest.starts_with("//")) rest.remove_prefix(2);
  else if (auto colon = rest.find(':'); colon != std::string_view::npos && colon + 1 < rest.size() &&
           !std::isdigit(static_cast<unsigned char>(rest[colon + 1])) &&
           rest.substr(0, colon).find_first_of("./") == std::string_view::npos)
    return std::nullopt;  // scheme without an authority (mailto:, javascript:)
  rest = rest.substr(0, rest.find_first_of("/?#"));
  if (auto at = rest.rfind('@'); at != std::string_view::npos) rest.remove_prefix(at + 1);
  if (!rest.empty() && rest.front() == '[') return std::nullopt;  // IPv6 literals carry no domain
  rest = rest.substr(0, rest.find(':'));
  while (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  if (rest.empty()) return std::nullopt;

  std::string host(rest);
  std::transform(host.begin(), host.end(), host.begin(), [](unsigned char c) { return std::tolower(c); });
  if (host.starts_with("www.")) host.erase(0, 4);
  if (host.empty() || host.find('.') == std::string::npos) return host.empty() ? std::nullopt : std::optional(host);

  if (public_suffixes && !public_suffixes->empty()) {
    // Walk from the longest candidate suffix down; the registrable domain is
    // one label left of the longest listed suffix.
    std::size_t pos = 0;
    std::size_t prev_label = std::string::npos;
    while (true) {
      const std::string_view candidate = std::string_view(host).substr(pos);
      if (public_suffixes->contains(std::string(candidate))) {
        if (prev_label == std::string::npos) return host;
        return host.substr(prev_label);
      }
      const auto dot = host.find('.', pos);
      if (dot == std::string::npos) break;
      prev_label = pos;
      pos = dot + 1;
    }
  }
  return host;
}

std::string primary_language(std::string_view tag) {
  std::string out(tag.substr(0, tag.find_first_of("-_")));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace blockprop
