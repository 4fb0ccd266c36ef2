#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blockprop {

enum class FeatureGroup : std::uint8_t { Action, Derived, Posts, Domain, Graph };

inline constexpr std::array<FeatureGroup, 5> kFeatureGroups = {FeatureGroup::Action, FeatureGroup::Derived,
                                                               FeatureGroup::Posts, FeatureGroup::Domain,
                                                               FeatureGroup::Graph};

std::string_view to_string(FeatureGroup g);
std::optional<FeatureGroup> parse_feature_group(std::string_view s);

struct FeatureEntry {
  std::string name;
  FeatureGroup group;
  std::string description;
  friend bool operator==(const FeatureEntry&, const FeatureEntry&) = default;
};

/// Ordered feature registry; entry order is the column order of every matrix
/// built from it. Names are unique and every group has at least one member.
class FeatureManifest {
 public:
  FeatureManifest() = default;
  FeatureManifest(std::vector<FeatureEntry> entries, std::string version);

  [[nodiscard]] const std::vector<FeatureEntry>& entries() const { return entries_; }
  [[nodiscard]] const std::string& version() const { return version_; }
  [[nodiscard]] std::size_t size() const { return entries_.size(); }
  [[nodiscard]] const FeatureEntry& operator[](std::size_t i) const { return entries_[i]; }
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view name) const;
  [[nodiscard]] std::vector<std::size_t> columns_in(FeatureGroup g) const;
  [[nodiscard]] std::vector<std::string> names() const;

  friend bool operator==(const FeatureManifest&, const FeatureManifest&) = default;

 private:
  std::vector<FeatureEntry> entries_;
  std::string version_;
};

/// The shipped 81-feature registry: Action 12, Derived 4, Posts 29, Domain 24, Graph 12.
const FeatureManifest& default_manifest();

/// `name<TAB>group<TAB>description` per line. Lines starting with '#' are
/// comments, except `# version: <v>` which sets the version.
FeatureManifest read_manifest(std::istream& in);
FeatureManifest read_manifest_file(const std::string& path);
void write_manifest(const FeatureManifest& m, std::ostream& out);

}  // namespace blockprop
