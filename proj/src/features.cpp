#include "blockprop/features.hpp"

#include "blockprop/error.hpp"
#include "blockprop/text_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace blockprop {

namespace {

std::string normalize_category(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == ' ') c = '_';
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

template <std::size_t N>
std::optional<std::uint8_t> find_category(const std::array<std::string_view, N>& names, std::string_view s) {
  const auto key = normalize_category(s);
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == key) return static_cast<std::uint8_t>(i);
  return std::nullopt;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto t = line.find('\t', start);
    out.push_back(line.substr(start, t == std::string::npos ? std::string::npos : t - start));
    if (t == std::string::npos) break;
    start = t + 1;
  }
  return out;
}

struct MeanStd {
  double mean = 0, std = 0;
};

template <typename Get>
MeanStd mean_std(std::size_t n, Get get) {
  if (n == 0) return {};
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += get(i);
  const double mean = sum / static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = get(i) - mean;
    ss += d * d;
  }
  return {mean, std::sqrt(ss / static_cast<double>(n))};
}

std::vector<std::string> tokenize_lower(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

}  // namespace

std::optional<std::uint8_t> parse_bias(std::string_view s) { return find_category(kBiasCategories, s); }
std::optional<std::uint8_t> parse_credibility(std::string_view s) { return find_category(kCredibilityCategories, s); }
std::optional<std::uint8_t> parse_factuality(std::string_view s) { return find_category(kFactualityCategories, s); }

DomainLookup DomainLookup::load(const std::string& mbfc_tsv, const std::string& quality_tsv,
                                const std::string& public_suffix_list) {
  DomainLookup lookup;
  auto axis = [](const std::string& field, auto parser, const std::string& where) -> std::optional<std::uint8_t> {
    if (field.empty() || field == "-") return std::nullopt;
    auto v = parser(field);
    if (!v) throw DataError(where + ": unknown category '" + field + "'");
    return v;
  };
  if (!mbfc_tsv.empty()) {
    std::ifstream in(mbfc_tsv);
    if (!in) throw ConfigError("cannot open MBFC lookup '" + mbfc_tsv + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto f = split_tabs(line);
      const auto where = mbfc_tsv + ":" + std::to_string(lineno);
      if (f.size() != 4) throw DataError(where + ": expected 4 tab-separated fields");
      auto domain = registrable_domain(f[0]);
      if (!domain) throw DataError(where + ": invalid domain");
      lookup.mbfc[*domain] = {axis(f[1], parse_bias, where), axis(f[2], parse_credibility, where),
                              axis(f[3], parse_factuality, where)};
    }
  }
  if (!quality_tsv.empty()) {
    std::ifstream in(quality_tsv);
    if (!in) throw ConfigError("cannot open quality lookup '" + quality_tsv + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto f = split_tabs(line);
      const auto where = quality_tsv + ":" + std::to_string(lineno);
      if (f.size() != 2) throw DataError(where + ": expected 2 tab-separated fields");
      auto domain = registrable_domain(f[0]);
      double score = 0;
      try {
        score = std::stod(f[1]);
      } catch (const std::exception&) {
        throw DataError(where + ": invalid quality score");
      }
      if (!domain || !(score >= 0.0 && score <= 1.0)) throw DataError(where + ": invalid domain or score outside [0,1]");
      lookup.quality[*domain] = score;
    }
  }
  if (!public_suffix_list.empty()) {
    std::ifstream in(public_suffix_list);
    if (!in) throw ConfigError("cannot open public suffix list '" + public_suffix_list + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.starts_with("//")) continue;
      lookup.public_suffixes.insert(line);
    }
  }
  return lookup;
}

LexiconToxicityScorer::LexiconToxicityScorer()
    : LexiconToxicityScorer({{
          {"vermin", "subhuman", "degenerates", "invaders", "parasites"},
          {"idiot", "stupid", "moron", "loser", "pathetic", "clown", "dumb"},
          {"damn", "hell", "crap", "bloody", "shit", "fuck", "fucking"},
          {"hate", "idiot", "stupid", "shut", "trash", "garbage", "disgusting", "moron"},
          {"fucking", "kill", "die", "scum"},
          {"kill", "destroy", "hurt", "shoot", "attack", "die"},
          {"nude", "sexy", "porn", "explicit", "nsfw"},
      }}) {}

LexiconToxicityScorer::LexiconToxicityScorer(std::array<std::vector<std::string>, 7> lexicon) {
  for (std::size_t d = 0; d < 7; ++d)
    for (auto& t : lexicon[d]) terms_[d].insert(std::move(t));
}

ToxicityVector LexiconToxicityScorer::score(std::string_view text) const {
  const auto tokens = tokenize_lower(text);
  ToxicityVector out{};
  for (std::size_t d = 0; d < 7; ++d) {
    std::size_t hits = 0;
    for (const auto& t : tokens) hits += terms_[d].contains(t) ? 1 : 0;
    const double density = tokens.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(tokens.size());
    out[d] = 1.0 / (1.0 + std::exp(-(-4.0 + 12.0 * density)));
  }
  return out;
}

EventIndex::EventIndex(const EventLog& log) : log_(&log) {
  const auto events = log.events();
  for (std::uint32_t i = 0; i < events.size(); ++i) {
    actor_[events[i].actor].push_back(i);
    if (events[i].subject) subject_[*events[i].subject].push_back(i);
  }
}

std::span<const std::uint32_t> EventIndex::as_actor(std::string_view user) const {
  auto it = actor_.find(user);
  return it == actor_.end() ? std::span<const std::uint32_t>{} : std::span<const std::uint32_t>(it->second);
}

std::span<const std::uint32_t> EventIndex::as_subject(std::string_view user) const {
  auto it = subject_.find(user);
  return it == subject_.end() ? std::span<const std::uint32_t>{} : std::span<const std::uint32_t>(it->second);
}

std::vector<std::string> EventIndex::actors() const {
  std::vector<std::string> out;
  out.reserve(actor_.size());
  for (const auto& [u, _] : actor_) out.emplace_back(u);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t posts_created(const EventIndex& index, std::string_view user) {
  std::size_t n = 0;
  for (auto i : index.as_actor(user)) n += index.event(i).is_original_post() ? 1 : 0;
  return n;
}

std::vector<std::string> select_users(const EventIndex& index, const UserFilter& filter) {
  const auto majority = primary_language(filter.majority_lang);
  std::vector<std::string> out;
  for (const auto& user : index.actors()) {
    std::size_t posts = 0;
    std::map<std::string, std::size_t> votes;
    for (auto i : index.as_actor(user)) {
      const auto& e = index.event(i);
      if (!e.is_original_post()) continue;
      ++posts;
      if (!e.langs.empty()) ++votes[primary_language(e.langs.front())];
    }
    if (posts < filter.min_posts || votes.empty()) continue;
    std::size_t best = 0;
    for (const auto& [lang, n] : votes) best = std::max(best, n);
    auto it = votes.find(majority);
    if (it != votes.end() && it->second == best) out.push_back(user);
  }
  return out;
}

NamedValues action_features(const EventIndex& index, std::string_view user) {
  // [kind][action]
  double likes[2]{}, posts[2]{}, reposts[2]{}, follows[2]{}, blocks[2]{};
  double replies_authored = 0, replies_received = 0;
  double liked = 0, reposted = 0, followed = 0, blocked = 0;
  for (auto i : index.as_actor(user)) {
    const auto& e = index.event(i);
    const int a = e.action == EventAction::Create ? 0 : 1;
    switch (e.kind) {
      case EventKind::Like: likes[a] += 1; break;
      case EventKind::Reply:
        if (a == 0) replies_authored += 1;
        [[fallthrough]];
      case EventKind::Post: posts[a] += 1; break;
      case EventKind::Repost: reposts[a] += 1; break;
      case EventKind::Follow: follows[a] += 1; break;
      case EventKind::Block: blocks[a] += 1; break;
    }
  }
  for (auto i : index.as_subject(user)) {
    const auto& e = index.event(i);
    if (e.action != EventAction::Create || e.actor == user) continue;
    switch (e.kind) {
      case EventKind::Like: liked += 1; break;
      case EventKind::Repost: reposted += 1; break;
      case EventKind::Follow: followed += 1; break;
      case EventKind::Block: blocked += 1; break;
      case EventKind::Reply: replies_received += 1; break;
      case EventKind::Post: break;
    }
  }
  return {{"likes_created", likes[0]},     {"likes_deleted", likes[1]},
          {"posts_created", posts[0]},     {"posts_deleted", posts[1]},
          {"reposts_created", reposts[0]}, {"reposts_deleted", reposts[1]},
          {"follows_created", follows[0]}, {"follows_deleted", follows[1]},
          {"blocks_created", blocks[0]},   {"blocks_deleted", blocks[1]},
          {"replies_authored", replies_authored},
          {"replies_received", replies_received},
          {"times_liked", liked},          {"times_reposted", reposted},
          {"times_followed", followed},    {"times_blocked", blocked}};
}

NamedValues text_features(const EventIndex& index, std::string_view user) {
  std::vector<TextMetrics> metrics;
  std::map<std::string, std::size_t> langs;
  for (auto i : index.as_actor(user)) {
    const auto& e = index.event(i);
    if (!e.is_original_post()) continue;
    metrics.push_back(measure_text(e.text.value_or("")));
    if (!e.langs.empty()) ++langs[primary_language(e.langs.front())];
  }
  NamedValues out;
  auto add = [&](const char* name, double TextMetrics::*field) {
    const auto ms = mean_std(metrics.size(), [&](std::size_t k) { return metrics[k].*field; });
    out.emplace_back(std::string(name) + "_mean", ms.mean);
    out.emplace_back(std::string(name) + "_std", ms.std);
  };
  add("chars", &TextMetrics::chars);
  add("lower", &TextMetrics::lower);
  add("upper", &TextMetrics::upper);
  add("digits", &TextMetrics::digits);
  add("spaces", &TextMetrics::spaces);
  add("emoji", &TextMetrics::emoji);
  out.emplace_back("language_entropy", normalized_entropy(langs));
  return out;
}

std::vector<ToxicityVector> post_toxicity(const EventIndex& index, std::string_view user,
                                          const ToxicityOptions& options) {
  static const LexiconToxicityScorer default_scorer;
  const ToxicityScorer& scorer = options.scorer ? *options.scorer : default_scorer;
  std::vector<ToxicityVector> out;
  for (auto i : index.as_actor(user)) {
    const auto& e = index.event(i);
    if (!e.is_original_post()) continue;
    if (options.mode == ToxicityMode::Sidecar) {
      if (!e.tox) throw DataError("post '" + e.id + "' by '" + std::string(user) + "' has no toxicity scores");
      out.push_back(*e.tox);
    } else {
      out.push_back(scorer.score(e.text.value_or("")));
    }
  }
  return out;
}

NamedValues toxicity_features(std::span<const ToxicityVector> scores) {
  NamedValues out;
  for (std::size_t d = 0; d < kToxicityDimensions.size(); ++d) {
    const auto ms = mean_std(scores.size(), [&](std::size_t k) { return scores[k][d]; });
    out.emplace_back(std::string(kToxicityDimensions[d]) + "_mean", ms.mean);
    out.emplace_back(std::string(kToxicityDimensions[d]) + "_std", ms.std);
  }
  return out;
}

std::optional<double> quality_mean(const EventIndex& index, std::string_view user, const DomainLookup& lookup) {
  double sum = 0;
  std::size_t n = 0;
  for (auto i : index.as_actor(user)) {
    const auto& e = index.event(i);
    if (!e.is_original_post()) continue;
    for (const auto& url : e.urls) {
      const auto domain = registrable_domain(url, &lookup.public_suffixes);
      if (!domain) continue;
      if (auto it = lookup.quality.find(*domain); it != lookup.quality.end()) sum += it->second, ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

NamedValues url_features(const EventIndex& index, std::string_view user, const DomainLookup& lookup,
                         double imputed_quality) {
  std::size_t posts = 0, total_urls = 0, mbfc_matched = 0, quality_matched = 0;
  std::array<double, 9> bias{};
  std::array<double, 3> credibility{};
  std::array<double, 7> factuality{};
  std::map<std::string, std::size_t> domains;
  double quality_sum = 0;
  for (auto i : index.as_actor(user)) {
    const auto& e = index.event(i);
    if (!e.is_original_post()) continue;
    ++posts;
    for (const auto& url : e.urls) {
      ++total_urls;
      const auto domain = registrable_domain(url, &lookup.public_suffixes);
      if (!domain) continue;
      ++domains[*domain];
      if (auto it = lookup.mbfc.find(*domain); it != lookup.mbfc.end()) {
        ++mbfc_matched;
        const auto& r = it->second;
        if (r.bias) bias[*r.bias] += 1;
        if (r.credibility) credibility[*r.credibility] += 1;
        if (r.factuality) factuality[*r.factuality] += 1;
      }
      if (auto it = lookup.quality.find(*domain); it != lookup.quality.end()) {
        ++quality_matched;
        quality_sum += it->second;
      }
    }
  }
  const double denom = posts == 0 ? 1.0 : static_cast<double>(posts);
  NamedValues out;
  out.emplace_back("urls_per_post", static_cast<double>(total_urls) / denom);
  out.emplace_back("domain_entropy", normalized_entropy(domains));
  for (std::size_t k = 0; k < bias.size(); ++k) out.emplace_back("bias_" + std::string(kBiasCategories[k]), bias[k] / denom);
  for (std::size_t k = 0; k < credibility.size(); ++k)
    out.emplace_back("credibility_" + std::string(kCredibilityCategories[k]), credibility[k] / denom);
  for (std::size_t k = 0; k < factuality.size(); ++k)
    out.emplace_back("factuality_" + std::string(kFactualityCategories[k]), factuality[k] / denom);
  out.emplace_back("quality_mean",
                   quality_matched == 0 ? imputed_quality : quality_sum / static_cast<double>(quality_matched));
  out.emplace_back("mbfc_matched", static_cast<double>(mbfc_matched) / denom);
  out.emplace_back("quality_matched", static_cast<double>(quality_matched) / denom);
  out.emplace_back("distinct_domains", static_cast<double>(domains.size()));
  out.emplace_back("total_urls", static_cast<double>(total_urls));
  return out;
}

Eigen::Index FeatureMatrix::column(std::string_view name) const {
  auto idx = manifest.index_of(name);
  if (!idx) throw DataError("feature '" + std::string(name) + "' is not in the manifest");
  return static_cast<Eigen::Index>(*idx);
}

FeatureMatrix build_matrix(const EventIndex& index, const UserFilter& filter, const DomainLookup& lookup,
                           const GraphFeatures& graph, const FeatureManifest& manifest,
                           const ToxicityOptions& toxicity, BuildInfo* info) {
  if (filter.min_posts < 1) throw ConfigError("min_posts must be at least 1");
  FeatureMatrix m;
  m.manifest = manifest;
  m.users = select_users(index, filter);
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.users.size()), static_cast<Eigen::Index>(manifest.size()));

  // Corpus-level constant, computed before any row.
  double quality_sum = 0;
  std::size_t valid = 0, imputed = 0;
  for (const auto& u : m.users) {
    if (auto q = quality_mean(index, u, lookup)) quality_sum += *q, ++valid;
    else ++imputed;
  }
  const double imputed_quality = valid ? quality_sum / static_cast<double>(valid) : 0.0;
  if (info) *info = {imputed_quality, imputed};

  std::unordered_map<std::string, Eigen::Index> column;
  for (std::size_t j = 0; j < manifest.size(); ++j) column.emplace(manifest[j].name, static_cast<Eigen::Index>(j));
  std::vector<bool> produced(manifest.size(), false);
  const auto& graph_names = GraphFeatures::column_names();

  for (std::size_t r = 0; r < m.users.size(); ++r) {
    const auto& u = m.users[r];
    const auto row = static_cast<Eigen::Index>(r);
    auto place = [&](const std::string& name, double v) {
      auto it = column.find(name);
      if (it == column.end()) return;
      m.values(row, it->second) = v;
      produced[static_cast<std::size_t>(it->second)] = true;
    };
    for (const auto& [n, v] : action_features(index, u)) place(n, v);
    for (const auto& [n, v] : text_features(index, u)) place(n, v);
    const auto scores = post_toxicity(index, u, toxicity);
    for (const auto& [n, v] : toxicity_features(scores)) place(n, v);
    for (const auto& [n, v] : url_features(index, u, lookup, imputed_quality)) place(n, v);
    const auto g = graph.row(u);
    for (std::size_t k = 0; k < g.size(); ++k) place(graph_names[k], g[k]);
  }

  if (!m.users.empty()) {
    for (std::size_t j = 0; j < manifest.size(); ++j)
      if (!produced[j]) throw DataError("manifest feature '" + manifest[j].name + "' has no producing operation");
  } else {
    // Validate names even with zero rows.
    std::set<std::string> known;
    for (const auto& [n, v] : action_features(index, "")) known.insert(n);
    for (const auto& [n, v] : text_features(index, "")) known.insert(n);
    for (const auto& [n, v] : toxicity_features({})) known.insert(n);
    for (const auto& [n, v] : url_features(index, "", lookup, 0)) known.insert(n);
    for (const auto& n : graph_names) known.insert(n);
    for (const auto& e : manifest.entries())
      if (!known.contains(e.name)) throw DataError("manifest feature '" + e.name + "' has no producing operation");
  }
  if (!m.values.allFinite()) throw DataError("feature matrix contains non-finite values");
  return m;
}

}  // namespace blockprop
