#include "blockprop/manifest.hpp"

#include "blockprop/error.hpp"
#include "blockprop/events.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace blockprop {

namespace {

constexpr std::array<std::string_view, 5> kGroupNames = {"Action", "Derived", "Posts", "Domain", "Graph"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

FeatureManifest build_default() {
  std::vector<FeatureEntry> e;
  auto add = [&](std::string name, FeatureGroup g, std::string desc) {
    e.push_back({std::move(name), g, std::move(desc)});
  };
  using G = FeatureGroup;

  for (std::string_view kind : {"likes", "posts", "reposts", "follows", "blocks"}) {
    add(std::string(kind) + "_created", G::Action, std::string(kind) + " created by the user");
    add(std::string(kind) + "_deleted", G::Action, std::string(kind) + " deleted by the user");
  }
  add("replies_authored", G::Action, "replies written by the user");
  add("replies_received", G::Action, "replies addressed to the user's posts");

  add("times_liked", G::Derived, "like events targeting the user");
  add("times_reposted", G::Derived, "repost events targeting the user");
  add("times_followed", G::Derived, "follow events targeting the user");
  add("times_blocked", G::Derived, "block events targeting the user");

  for (std::string_view m : {"chars", "lower", "upper", "digits", "spaces", "emoji"}) {
    add(std::string(m) + "_mean", G::Posts, "mean per-post count of " + std::string(m));
    add(std::string(m) + "_std", G::Posts, "population std of per-post count of " + std::string(m));
  }
  add("language_entropy", G::Posts, "normalized Shannon entropy of declared post languages");
  for (auto dim : kToxicityDimensions) {
    add(std::string(dim) + "_mean", G::Posts, "mean " + std::string(dim) + " score over posts");
    add(std::string(dim) + "_std", G::Posts, "population std of " + std::string(dim) + " score over posts");
  }
  add("urls_per_post", G::Posts, "mean number of URLs per original post");
  add("domain_entropy", G::Posts, "normalized Shannon entropy of shared domains");

  for (std::string_view b : {"extreme_left", "left", "center_left", "center_right", "right", "extreme_right", "satire",
                             "conspiracy", "pro_science"})
    add("bias_" + std::string(b), G::Domain, "shared URLs rated bias " + std::string(b) + ", per post");
  for (std::string_view c : {"low", "medium", "high"})
    add("credibility_" + std::string(c), G::Domain, "shared URLs rated credibility " + std::string(c) + ", per post");
  for (std::string_view f : {"very_low", "low", "medium", "mostly", "high", "very_high", "mixed"})
    add("factuality_" + std::string(f), G::Domain, "shared URLs rated factuality " + std::string(f) + ", per post");
  add("quality_mean", G::Domain, "mean domain quality score, imputed with the corpus mean when unmatched");
  add("mbfc_matched", G::Domain, "shared URLs whose domain has a bias/credibility rating, per post");
  add("quality_matched", G::Domain, "shared URLs whose domain has a quality score, per post");
  add("distinct_domains", G::Domain, "number of distinct domains shared");
  add("total_urls", G::Domain, "number of URLs shared");

  for (std::string_view g : {"follows", "likes", "replies", "reposts"}) {
    add(std::string(g) + "_coreness", G::Graph, "k-core number in the undirected " + std::string(g) + " graph");
    add(std::string(g) + "_degree", G::Graph, "in+out degree in the " + std::string(g) + " graph");
    add(std::string(g) + "_pagerank", G::Graph, "PageRank in the " + std::string(g) + " graph");
  }
  return FeatureManifest(std::move(e), "default-81-v1");
}

}  // namespace

std::string_view to_string(FeatureGroup g) { return kGroupNames[static_cast<std::size_t>(g)]; }

std::optional<FeatureGroup> parse_feature_group(std::string_view s) {
  const auto l = lower(s);
  for (std::size_t i = 0; i < kGroupNames.size(); ++i)
    if (lower(kGroupNames[i]) == l) return static_cast<FeatureGroup>(i);
  return std::nullopt;
}

FeatureManifest::FeatureManifest(std::vector<FeatureEntry> entries, std::string version)
    : entries_(std::move(entries)), version_(std::move(version)) {
  std::set<std::string_view> names;
  std::array<bool, 5> seen{};
  for (const auto& e : entries_) {
    if (e.name.empty()) throw DataError("manifest contains an empty feature name");
    if (!names.insert(e.name).second) throw DataError("duplicate feature name in manifest: " + e.name);
    seen[static_cast<std::size_t>(e.group)] = true;
  }
  for (auto g : kFeatureGroups)
    if (!seen[static_cast<std::size_t>(g)])
      throw DataError("manifest group " + std::string(to_string(g)) + " has no features");
}

std::optional<std::size_t> FeatureManifest::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::size_t> FeatureManifest::columns_in(FeatureGroup g) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].group == g) out.push_back(i);
  return out;
}

std::vector<std::string> FeatureManifest::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

const FeatureManifest& default_manifest() {
  static const FeatureManifest m = build_default();
  return m;
}

FeatureManifest read_manifest(std::istream& in) {
  std::vector<FeatureEntry> entries;
  std::string version = "unversioned";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view tag = "# version:";
      if (line.starts_with(tag)) {
        version = line.substr(tag.size());
        version.erase(0, version.find_first_not_of(' '));
      }
      continue;
    }
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw DataError("manifest line " + std::to_string(lineno) + ": expected 3 tab-separated fields");
    auto group = parse_feature_group(line.substr(t1 + 1, t2 - t1 - 1));
    if (!group) throw DataError("manifest line " + std::to_string(lineno) + ": unknown group");
    entries.push_back({line.substr(0, t1), *group, line.substr(t2 + 1)});
  }
  return FeatureManifest(std::move(entries), std::move(version));
}

FeatureManifest read_manifest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest '" + path + "'");
  return read_manifest(in);
}

void write_manifest(const FeatureManifest& m, std::ostream& out) {
  out << "# version: " << m.version() << '\n';
  for (const auto& e : m.entries()) out << e.name << '\t' << to_string(e.group) << '\t' << e.description << '\n';
}

}  // namespace blockprop
