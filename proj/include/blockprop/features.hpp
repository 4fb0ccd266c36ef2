#pragma once

#include "blockprop/events.hpp"
#include "blockprop/graph.hpp"
#include "blockprop/manifest.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace blockprop {

struct UserFilter {
  std::size_t min_posts = 10;
  std::string majority_lang = "en";
};

inline constexpr std::array<std::string_view, 9> kBiasCategories = {
    "extreme_left", "left", "center_left", "center_right", "right", "extreme_right", "satire", "conspiracy", "pro_science"};
inline constexpr std::array<std::string_view, 3> kCredibilityCategories = {"low", "medium", "high"};
inline constexpr std::array<std::string_view, 7> kFactualityCategories = {"very_low", "low",       "medium", "mostly",
                                                                          "high",     "very_high", "mixed"};

/// Category indices into the k*Categories arrays; an axis may be unrated.
struct MbfcRating {
  std::optional<std::uint8_t> bias;
  std::optional<std::uint8_t> credibility;
  std::optional<std::uint8_t> factuality;
};

struct DomainLookup {
  std::unordered_map<std::string, MbfcRating> mbfc;
  std::unordered_map<std::string, double> quality;  // scores in [0,1]
  std::set<std::string> public_suffixes;            // optional eTLD list

  /// `domain<TAB>bias<TAB>credibility<TAB>factuality`; `-` or empty marks an
  /// unrated axis. Category names accept '-', '_' or ' ' separators.
  static DomainLookup load(const std::string& mbfc_tsv, const std::string& quality_tsv,
                           const std::string& public_suffix_list = {});
};

std::optional<std::uint8_t> parse_bias(std::string_view s);
std::optional<std::uint8_t> parse_credibility(std::string_view s);
std::optional<std::uint8_t> parse_factuality(std::string_view s);

class ToxicityScorer {
 public:
  virtual ~ToxicityScorer() = default;
  /// Seven scores in (0,1), ordered like kToxicityDimensions.
  [[nodiscard]] virtual ToxicityVector score(std::string_view text) const = 0;
};

/// Matched-term density per dimension squashed through a logistic, so every
/// score lies strictly inside (0,1).
class LexiconToxicityScorer final : public ToxicityScorer {
 public:
  LexiconToxicityScorer();
  explicit LexiconToxicityScorer(std::array<std::vector<std::string>, 7> lexicon);
  [[nodiscard]] ToxicityVector score(std::string_view text) const override;

 private:
  std::array<std::set<std::string, std::less<>>, 7> terms_;
};

enum class ToxicityMode : std::uint8_t { Sidecar, Lexicon };

struct ToxicityOptions {
  ToxicityMode mode = ToxicityMode::Sidecar;
  std::shared_ptr<const ToxicityScorer> scorer;  // Lexicon mode; defaults to LexiconToxicityScorer
};

/// Per-user lookup of event positions in an EventLog. The log must outlive it.
class EventIndex {
 public:
  explicit EventIndex(const EventLog& log);

  [[nodiscard]] const EventLog& log() const { return *log_; }
  [[nodiscard]] std::span<const std::uint32_t> as_actor(std::string_view user) const;
  [[nodiscard]] std::span<const std::uint32_t> as_subject(std::string_view user) const;
  [[nodiscard]] const Event& event(std::uint32_t i) const { return log_->events()[i]; }
  /// Every actor, sorted.
  [[nodiscard]] std::vector<std::string> actors() const;

 private:
  const EventLog* log_;
  std::unordered_map<std::string_view, std::vector<std::uint32_t>> actor_;
  std::unordered_map<std::string_view, std::vector<std::uint32_t>> subject_;
};

using NamedValues = std::vector<std::pair<std::string, double>>;

/// Users with at least `min_posts` created posts/replies whose modal declared
/// language is `majority_lang` (ties that include it pass). Sorted by id.
std::vector<std::string> select_users(const EventIndex& index, const UserFilter& filter);

/// Number of created posts and replies.
std::size_t posts_created(const EventIndex& index, std::string_view user);

/// Action (12) and Derived (4) counts.
NamedValues action_features(const EventIndex& index, std::string_view user);

/// Six character metrics × {mean, std} plus language entropy, over original posts.
NamedValues text_features(const EventIndex& index, std::string_view user);

/// Scores of the user's original posts. Sidecar mode throws DataError naming
/// the first post that lacks a `tox` record.
std::vector<ToxicityVector> post_toxicity(const EventIndex& index, std::string_view user, const ToxicityOptions& options);

/// Seven dimensions × {mean, population std}. Empty input gives zeros.
NamedValues toxicity_features(std::span<const ToxicityVector> scores);

/// Mean quality score over the user's URLs whose domain has a score, or
/// nullopt when none match.
std::optional<double> quality_mean(const EventIndex& index, std::string_view user, const DomainLookup& lookup);

/// Posts-URL (2) and Domain (24) columns. `imputed_quality` replaces the
/// quality mean when the user matches no scored domain.
NamedValues url_features(const EventIndex& index, std::string_view user, const DomainLookup& lookup,
                         double imputed_quality);

/// Dense per-user feature table in manifest column order.
struct FeatureMatrix {
  std::vector<std::string> users;
  FeatureManifest manifest;
  Eigen::MatrixXd values;  // users × manifest

  [[nodiscard]] std::size_t rows() const { return users.size(); }
  [[nodiscard]] std::size_t cols() const { return manifest.size(); }
  /// Column by name; throws DataError when absent.
  [[nodiscard]] Eigen::Index column(std::string_view name) const;
};

struct BuildInfo {
  double imputed_quality = 0;
  std::size_t quality_imputed_users = 0;
};

/// Assembles one row per selected user. Every manifest name must be produced
/// by one of the feature operations, otherwise DataError.
FeatureMatrix build_matrix(const EventIndex& index, const UserFilter& filter, const DomainLookup& lookup,
                           const GraphFeatures& graph, const FeatureManifest& manifest,
                           const ToxicityOptions& toxicity = {}, BuildInfo* info = nullptr);

}  // namespace blockprop
