#include "blockprop/synth.hpp"

#include "blockprop/error.hpp"
#include "blockprop/io.hpp"
#include "blockprop/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace blockprop {

namespace {

constexpr double kScoreClip = 4.0;

struct DomainSpec {
  const char* name;
  const char* bias;
  const char* credibility;
  const char* factuality;
  double quality;  // < 0: not scored
};

constexpr std::array<DomainSpec, 24> kDomains = {{
    {"dailyledger.com", "center_left", "high", "high", 0.82},
    {"morningpost.net", "center_left", "high", "mostly", 0.74},
    {"civicwire.org", "left", "medium", "mostly", 0.61},
    {"redstatetimes.com", "right", "medium", "mixed", 0.44},
    {"frontierpatriot.com", "extreme_right", "low", "very_low", 0.12},
    {"peoplesvoice.net", "extreme_left", "low", "low", 0.21},
    {"laughtrack.news", "satire", "-", "-", -1},
    {"truthseekers.info", "conspiracy", "low", "very_low", 0.08},
    {"labnotes.org", "pro_science", "high", "very_high", 0.91},
    {"citybeacon.com", "center_right", "high", "high", 0.69},
    {"marketcall.com", "center_right", "medium", "mostly", 0.58},
    {"globeherald.com", "center_left", "high", "high", 0.79},
    {"hotplanet.net", "left", "medium", "mixed", -1},
    {"eaglewatch.us", "right", "low", "low", 0.27},
    {"sciencedigest.org", "pro_science", "high", "high", 0.88},
    {"newsbrief.io", "center_right", "medium", "-", 0.55},
    {"photoshare.app", "-", "-", "-", -1},
    {"videotube.com", "-", "-", "-", 0.35},
    {"codehub.dev", "-", "-", "-", -1},
    {"shortlink.to", "-", "-", "-", -1},
    {"blogspace.net", "-", "-", "-", 0.40},
    {"weatherdesk.com", "center_left", "high", "very_high", 0.86},
    {"sportsline.net", "center_right", "medium", "high", 0.63},
    {"tabloidnow.com", "right", "low", "mixed", 0.19},
}};

constexpr std::array<const char*, 40> kWords = {
    "the",    "a",      "today",  "news",    "people",   "think",   "great", "work",  "city",    "game",
    "music",  "again",  "why",    "new",     "day",      "world",   "read",  "this",  "thread",  "love",
    "just",   "really", "policy", "vote",    "science",  "coffee",  "time",  "story", "weekend", "photo",
    "update", "check",  "maybe",  "friends", "question", "answer",  "big",   "small", "post",    "here"};

constexpr std::array<const char*, 12> kToxicWords = {"idiot", "stupid", "trash", "hate",  "moron",  "garbage",
                                                     "damn",  "crap",   "kill",  "clown", "pathetic", "scum"};

constexpr std::array<const char*, 4> kEmoji = {"🎉", "🔥", "😂", "👍"};
constexpr std::array<const char*, 4> kOtherLangs = {"es", "pt", "ja", "de"};

// Dimension weights applied to a user's latent toxicity level.
constexpr std::array<double, 7> kToxWeights = {0.5, 0.9, 0.7, 1.0, 0.3, 0.3, 0.4};

enum Role : std::uint64_t { kQualifying = 1, kBackground = 2, kForeign = 3 };

struct UserPlan {
  std::string id;
  Role role = kQualifying;
  double activity = 1;
  bool extreme = false;
  std::size_t posts = 0;
  std::size_t replies = 0;
  std::array<std::size_t, 4> planted{};  // reposts, blocks, likes deleted, follows deleted
  std::size_t likes = 0, follows = 0;
  std::size_t posts_deleted = 0, reposts_deleted = 0, blocks_deleted = 0;
  double tox_level = 0;
  double tox_mean = 0;  // realized mean of the "toxicity" dimension
  double mean = 0;      // expected blocks
  std::uint64_t received = 0;
};

double lognormal(Rng& rng, double sigma) { return std::exp(std::normal_distribution<double>(0, sigma)(rng)); }

std::size_t poisson(Rng& rng, double mean) {
  if (!(mean > 0)) return 0;
  return static_cast<std::size_t>(std::poisson_distribution<long long>(mean)(rng));
}

double beta(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1)(rng);
  const double y = std::gamma_distribution<double>(b, 1)(rng);
  return x / (x + y);
}

std::vector<double> zscores(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / n);
  std::vector<double> z(v.size(), 0.0);
  if (sd > 0)
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mean) / sd;
  return z;
}

std::string user_id(std::uint64_t seed, std::size_t idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "did:plc:%016llx",
                static_cast<unsigned long long>(derive_seed(seed, {0x757365ULL, idx})));
  return buf;
}

class Emitter {
 public:
  Emitter(Timestamp start, int days) : start_(start), span_(static_cast<std::int64_t>(days) * 86400) {}

  Event& add(Rng& rng, EventKind kind, EventAction action, const std::string& actor) {
    Event e;
    char buf[24];
    std::snprintf(buf, sizeof buf, "ev%010zu", events_.size());
    e.id = buf;
    e.kind = kind;
    e.action = action;
    e.actor = actor;
    e.ts = start_ + std::chrono::seconds(std::uniform_int_distribution<std::int64_t>(0, span_ - 1)(rng));
    events_.push_back(std::move(e));
    return events_.back();
  }

  std::vector<Event>& events() { return events_; }

 private:
  Timestamp start_;
  std::int64_t span_;
  std::vector<Event> events_;
};

struct Style {
  double words = 8;
  double upper = 0.05;
  double digits = 0.05;
  double emoji = 0.1;
  double url_rate = 0.3;
  std::vector<std::size_t> domains;
  std::string other_lang;
  double other_fraction = 0;
};

Style draw_style(Rng& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  Style s;
  s.words = 3 + 15 * u(rng);
  s.upper = 0.15 * u(rng);
  s.digits = 0.1 * u(rng);
  s.emoji = 0.3 * u(rng);
  s.url_rate = u(rng) < 0.3 ? 0.0 : 1.2 * u(rng);
  const auto n_dom = 1 + static_cast<std::size_t>(4 * u(rng));
  for (std::size_t k = 0; k < n_dom; ++k) s.domains.push_back(static_cast<std::size_t>(u(rng) * kDomains.size()));
  s.other_lang = kOtherLangs[static_cast<std::size_t>(u(rng) * kOtherLangs.size())];
  s.other_fraction = u(rng) < 0.6 ? 0.0 : 0.05 + 0.3 * u(rng);
  return s;
}

std::string post_text(Rng& rng, const Style& s, double tox_level) {
  std::uniform_real_distribution<double> u(0, 1);
  const auto n = 1 + poisson(rng, s.words);
  std::string text;
  for (std::size_t w = 0; w < n; ++w) {
    if (w) text += ' ';
    std::string word = u(rng) < 0.5 * tox_level ? kToxicWords[static_cast<std::size_t>(u(rng) * kToxicWords.size())]
                                                : kWords[static_cast<std::size_t>(u(rng) * kWords.size())];
    if (u(rng) < s.upper)
      for (auto& c : word) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    else if (w == 0)
      word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    text += word;
    if (u(rng) < s.digits) text += std::to_string(static_cast<int>(u(rng) * 100));
  }
  if (u(rng) < s.emoji) text += std::string(" ") + kEmoji[static_cast<std::size_t>(u(rng) * kEmoji.size())];
  return text;
}

/// Posts and replies of one user; returns the realized mean "toxicity" score.
double emit_posts(Emitter& em, Rng& rng, const UserPlan& u, const Style& style, bool majority_other,
                  const std::discrete_distribution<std::size_t>& popular, const std::vector<UserPlan>& users) {
  std::uniform_real_distribution<double> unif(0, 1);
  std::normal_distribution<double> jitter(0, 0.03);
  auto pick = popular;
  const auto n_other = majority_other ? u.posts : static_cast<std::size_t>(std::lround(style.other_fraction * static_cast<double>(u.posts)));
  double tox_sum = 0;
  for (std::size_t k = 0; k < u.posts; ++k) {
    const bool reply = k < u.replies;
    auto& e = em.add(rng, reply ? EventKind::Reply : EventKind::Post, EventAction::Create, u.id);
    if (reply) {
      std::size_t parent;
      do parent = pick(rng);
      while (users[parent].id == u.id);
      e.subject = users[parent].id;
      e.ref = "at://" + users[parent].id + "/post/" + std::to_string(k);
    }
    e.text = post_text(rng, style, u.tox_level);
    // Non-English posts are the last n_other of the sequence.
    if (k + n_other >= u.posts) e.langs = {majority_other ? std::string("de") : style.other_lang};
    else e.langs = {unif(rng) < 0.2 ? std::string("en-US") : std::string("en")};
    const auto n_urls = style.url_rate > 0 ? poisson(rng, style.url_rate) : 0;
    for (std::size_t j = 0; j < n_urls; ++j) {
      const auto& d = kDomains[style.domains[static_cast<std::size_t>(unif(rng) * style.domains.size())]];
      e.urls.push_back(std::string(unif(rng) < 0.5 ? "https://www." : "https://") + d.name + "/a/" +
                       std::to_string(static_cast<int>(unif(rng) * 100000)));
    }
    ToxicityVector tox{};
    for (std::size_t d = 0; d < tox.size(); ++d)
      tox[d] = std::clamp(u.tox_level * kToxWeights[d] + jitter(rng), 0.0, 1.0);
    e.tox = tox;
    tox_sum += tox[3];
  }
  return u.posts ? tox_sum / static_cast<double>(u.posts) : 0.0;
}

}  // namespace

void validate(const ScenarioConfig& c) {
  if (c.n_users < 100) throw ConfigError("scenario needs at least 100 users");
  if (c.background_ratio < 0 || c.foreign_ratio < 0) throw ConfigError("population ratios must be non-negative");
  if (c.background_ratio * static_cast<double>(c.n_users) < 1) throw ConfigError("scenario needs background users");
  if (c.days < 1) throw ConfigError("observation window must span at least one day");
  if (!parse_rfc3339(c.start)) throw ConfigError("invalid window start '" + c.start + "'");
  if (!(c.activity_exponent > 1)) throw ConfigError("activity exponent must exceed 1");
  if (!(c.activity_cap >= 1)) throw ConfigError("activity cap must be at least 1");
  if (c.activity_coupling < 0 || c.toxicity_coupling < 0) throw ConfigError("coupling coefficients must be non-negative");
  if (!(c.extreme_fraction >= 0 && c.extreme_fraction <= 1)) throw ConfigError("extreme fraction must lie in [0,1]");
  if (c.extreme_boost < 0) throw ConfigError("extreme boost must be non-negative");
  if (!(c.block_base > 0)) throw ConfigError("block base rate must be positive");
  if (!(c.dispersion > 0)) throw ConfigError("dispersion must be positive");
  if (c.target_r2 && !(*c.target_r2 > 0 && *c.target_r2 < 1)) throw ConfigError("target R² must lie in (0,1)");
}

double bayes_r2(const std::vector<double>& mean, const std::vector<double>& scale, double dispersion) {
  const auto n = static_cast<double>(mean.size());
  double m1 = 0, m2 = 0, noise = 0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double r = mean[i] / scale[i];
    m1 += r;
    m2 += r * r;
    noise += (mean[i] + mean[i] * mean[i] / dispersion) / (scale[i] * scale[i]);
  }
  m1 /= n;
  const double var = m2 / n - m1 * m1;
  noise /= n;
  return var / (var + noise);
}

SynthCorpus generate(const ScenarioConfig& c) {
  validate(c);
  const auto n_q = c.n_users;
  const auto n_b = static_cast<std::size_t>(std::lround(c.background_ratio * static_cast<double>(n_q)));
  const auto n_f = static_cast<std::size_t>(std::lround(c.foreign_ratio * static_cast<double>(n_q)));
  const auto n_all = n_q + n_b + n_f;

  std::vector<UserPlan> users(n_all);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n_all; ++i) {
    users[i].id = user_id(c.seed, i);
    users[i].role = i < n_q ? kQualifying : i < n_q + n_b ? kBackground : kForeign;
    if (!seen.insert(users[i].id).second) throw ConfigError("user id collision; choose another seed");
  }

  // Extreme users: a seeded sample of the qualifying population.
  {
    std::vector<std::size_t> idx(n_q);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(c.seed, {0x657874ULL}));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_ext = static_cast<std::size_t>(std::lround(c.extreme_fraction * static_cast<double>(n_q)));
    for (std::size_t k = 0; k < n_ext; ++k) users[idx[k]].extreme = true;
  }

  std::vector<Style> styles(n_all);
  std::vector<double> popularity(n_all);
  for (std::size_t i = 0; i < n_all; ++i) {
    auto& u = users[i];
    Rng rng(derive_seed(c.seed, {0x706c616eULL, i}));
    std::uniform_real_distribution<double> unif(0, 1);
    popularity[i] = lognormal(rng, 1.0);
    styles[i] = draw_style(rng);
    u.tox_level = beta(rng, 1.2, 6.0);
    if (u.role == kQualifying) {
      u.activity = std::min(c.activity_cap, std::pow(1 - unif(rng), -1 / c.activity_exponent));
      const double boost = u.extreme ? std::exp(c.extreme_boost) : 1.0;
      const double a = u.activity;
      u.posts = 10 + poisson(rng, 5);
      u.replies = std::binomial_distribution<std::size_t>(u.posts, 0.2)(rng);
      u.likes = poisson(rng, 10 * a * lognormal(rng, 0.5));
      u.follows = poisson(rng, 2 * a * lognormal(rng, 0.5));
      u.planted[0] = poisson(rng, 3 * a * boost * lognormal(rng, 0.5));
      u.planted[1] = poisson(rng, 1 * a * boost * lognormal(rng, 0.5));
      u.planted[2] = poisson(rng, 1 * a * boost * lognormal(rng, 0.5));
      u.planted[3] = poisson(rng, 1 * a * boost * lognormal(rng, 0.5));
      u.posts_deleted = poisson(rng, 0.5);
      u.reposts_deleted = poisson(rng, 0.3);
      u.blocks_deleted = poisson(rng, 0.2);
    } else if (u.role == kBackground) {
      u.posts = std::uniform_int_distribution<std::size_t>(0, 9)(rng);
      u.replies = std::binomial_distribution<std::size_t>(u.posts, 0.2)(rng);
      u.likes = poisson(rng, 3);
      u.follows = poisson(rng, 1);
      u.planted[0] = poisson(rng, 0.5);
    } else {
      u.posts = 10 + poisson(rng, 5);
      u.replies = 0;
      u.likes = poisson(rng, 5);
      u.follows = poisson(rng, 1);
      u.planted[0] = poisson(rng, 1);
    }
  }

  const auto start = *parse_rfc3339(c.start);
  Emitter em(start, c.days);
  const std::discrete_distribution<std::size_t> popular(popularity.begin(), popularity.end());

  for (std::size_t i = 0; i < n_all; ++i) {
    Rng rng(derive_seed(c.seed, {0x706f7374ULL, i}));
    users[i].tox_mean = emit_posts(em, rng, users[i], styles[i], users[i].role == kForeign, popular, users);
  }

  // Planted activity score and block means for qualifying users.
  std::vector<double> score(n_q, 0.0), tox(n_q);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> v(n_q);
    for (std::size_t i = 0; i < n_q; ++i) v[i] = std::log1p(static_cast<double>(users[i].planted[k]));
    const auto z = zscores(v);
    for (std::size_t i = 0; i < n_q; ++i) score[i] += z[i] / 4;
  }
  score = zscores(score);
  for (auto& s : score) s = std::clamp(s, -kScoreClip, kScoreClip);
  for (std::size_t i = 0; i < n_q; ++i) tox[i] = users[i].tox_mean;
  const auto ztox = zscores(tox);
  std::vector<double> means(n_q), posts(n_q), ones(n_q, 1.0);
  for (std::size_t i = 0; i < n_q; ++i) {
    users[i].mean = c.block_base * std::exp(c.activity_coupling * score[i] + c.toxicity_coupling * ztox[i]);
    means[i] = users[i].mean;
    posts[i] = static_cast<double>(users[i].posts);
  }

  double k = c.dispersion;
  if (c.target_r2) {
    // Solve Var(r)(1/R² − 1) = E[m/P²] + E[r²]/k for the NB shape k.
    const auto n = static_cast<double>(n_q);
    double m1 = 0, m2 = 0, poisson_noise = 0;
    for (std::size_t i = 0; i < n_q; ++i) {
      const double r = means[i] / posts[i];
      m1 += r;
      m2 += r * r;
      poisson_noise += means[i] / (posts[i] * posts[i]);
    }
    m1 /= n;
    m2 /= n;
    poisson_noise /= n;
    const double var = m2 - m1 * m1;
    const double inv_k = (var * (1 / *c.target_r2 - 1) - poisson_noise) / m2;
    if (!(inv_k > 0))
      throw ConfigError("target R² is infeasible: count noise alone keeps the Bayes R² below " +
                        format_double(var / (var + poisson_noise)));
    k = 1 / inv_k;
  }

  for (std::size_t i = 0; i < n_q; ++i) {
    Rng rng(derive_seed(c.seed, {0x626c6bULL, i}));
    const double lambda = std::gamma_distribution<double>(k, users[i].mean / k)(rng);
    users[i].received = poisson(rng, lambda);
  }

  // Remaining actions. Follow targets use preferential attachment over earlier follows.
  std::vector<std::size_t> follow_targets;
  const std::size_t blocker_lo = n_q, blocker_hi = n_all - 1;
  for (std::size_t i = 0; i < n_all; ++i) {
    const auto& u = users[i];
    Rng rng(derive_seed(c.seed, {0x616374ULL, i}));
    auto pick = popular;
    std::uniform_real_distribution<double> unif(0, 1);
    auto other = [&] {
      std::size_t j;
      do j = pick(rng);
      while (j == i);
      return j;
    };
    auto post_ref = [&](std::size_t j) { return "at://" + users[j].id + "/post/" + std::to_string(static_cast<int>(unif(rng) * 1000)); };
    for (std::size_t t = 0; t < u.likes; ++t) {
      const auto j = other();
      auto& e = em.add(rng, EventKind::Like, EventAction::Create, u.id);
      e.subject = users[j].id;
      e.ref = post_ref(j);
    }
    for (std::size_t t = 0; t < u.planted[0]; ++t) {
      const auto j = other();
      auto& e = em.add(rng, EventKind::Repost, EventAction::Create, u.id);
      e.subject = users[j].id;
      e.ref = post_ref(j);
    }
    for (std::size_t t = 0; t < u.follows; ++t) {
      std::size_t j;
      do {
        j = follow_targets.empty() || unif(rng) < 0.3
                ? std::uniform_int_distribution<std::size_t>(0, n_all - 1)(rng)
                : follow_targets[std::uniform_int_distribution<std::size_t>(0, follow_targets.size() - 1)(rng)];
      } while (j == i);
      follow_targets.push_back(j);
      em.add(rng, EventKind::Follow, EventAction::Create, u.id).subject = users[j].id;
    }
    if (u.role == kQualifying) {
      // Own blocks go to non-qualifying users so they never touch a target count.
      for (std::size_t t = 0; t < u.planted[1]; ++t) {
        const auto j = std::uniform_int_distribution<std::size_t>(blocker_lo, blocker_hi)(rng);
        em.add(rng, EventKind::Block, EventAction::Create, u.id).subject = users[j].id;
      }
      for (std::size_t t = 0; t < u.planted[2]; ++t) {
        const auto j = other();
        auto& e = em.add(rng, EventKind::Like, EventAction::Delete, u.id);
        e.subject = users[j].id;
        e.ref = post_ref(j);
      }
      for (std::size_t t = 0; t < u.planted[3]; ++t)
        em.add(rng, EventKind::Follow, EventAction::Delete, u.id).subject = users[other()].id;
      for (std::size_t t = 0; t < u.posts_deleted; ++t) em.add(rng, EventKind::Post, EventAction::Delete, u.id).ref = post_ref(i);
      for (std::size_t t = 0; t < u.reposts_deleted; ++t)
        em.add(rng, EventKind::Repost, EventAction::Delete, u.id).ref = post_ref(other());
      for (std::size_t t = 0; t < u.blocks_deleted; ++t) {
        const auto j = std::uniform_int_distribution<std::size_t>(blocker_lo, blocker_hi)(rng);
        em.add(rng, EventKind::Block, EventAction::Delete, u.id).subject = users[j].id;
      }
      // Blocks received, issued by non-qualifying users.
      for (std::uint64_t t = 0; t < u.received; ++t) {
        const auto j = std::uniform_int_distribution<std::size_t>(blocker_lo, blocker_hi)(rng);
        em.add(rng, EventKind::Block, EventAction::Create, users[j].id).subject = u.id;
      }
    }
  }

  auto& events = em.events();
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.ts != b.ts ? a.ts < b.ts : a.id < b.id;
  });

  SynthCorpus out;
  std::string& nd = out.ndjson;
  for (const auto& e : events) {
    nd += to_ndjson_line(e);
    nd += '\n';
  }
  events.clear();
  events.shrink_to_fit();

  auto& gt = out.truth;
  for (std::size_t i = 0; i < n_q; ++i) {
    gt.roster.push_back(users[i].id);
    gt.blocks[users[i].id] = users[i].received;
    gt.expected_blocks[users[i].id] = users[i].mean;
    gt.posts[users[i].id] = users[i].posts;
    if (users[i].extreme) gt.extreme_users.push_back(users[i].id);
  }
  std::sort(gt.roster.begin(), gt.roster.end());
  std::sort(gt.extreme_users.begin(), gt.extreme_users.end());
  gt.planted_features = {"reposts_created", "blocks_created", "likes_deleted", "follows_deleted"};
  const bool coupled = c.activity_coupling > 0;
  gt.signal = {{"action", coupled ? "planted" : "noise"},
               {"derived", "noise"},
               {"posts", c.toxicity_coupling > 0 ? "planted" : "noise"},
               {"domain", "noise"},
               {"graph", coupled ? "redundant" : "noise"}};
  gt.dispersion = k;
  gt.bayes_r2_norm = bayes_r2(means, posts, k);
  gt.bayes_r2_raw = bayes_r2(means, ones, k);

  std::ostringstream mbfc, quality;
  mbfc << "# domain\tbias\tcredibility\tfactuality\n";
  quality << "# domain\tquality\n";
  for (const auto& d : kDomains) {
    if (std::string_view(d.bias) != "-" || std::string_view(d.credibility) != "-" || std::string_view(d.factuality) != "-")
      mbfc << d.name << '\t' << d.bias << '\t' << d.credibility << '\t' << d.factuality << '\n';
    if (d.quality >= 0) quality << d.name << '\t' << format_double(d.quality) << '\n';
  }
  out.mbfc_tsv = mbfc.str();
  out.quality_tsv = quality.str();
  return out;
}

std::string ground_truth_json(const GroundTruth& t, const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.seed;
  j["n_users"] = c.n_users;
  j["activity_coupling"] = c.activity_coupling;
  j["toxicity_coupling"] = c.toxicity_coupling;
  j["extreme_fraction"] = c.extreme_fraction;
  j["dispersion"] = t.dispersion;
  j["bayes_r2_norm"] = t.bayes_r2_norm;
  j["bayes_r2_raw"] = t.bayes_r2_raw;
  j["planted_features"] = t.planted_features;
  j["signal"] = t.signal;
  j["roster"] = t.roster;
  j["extreme_users"] = t.extreme_users;
  j["blocks"] = t.blocks;
  j["expected_blocks"] = t.expected_blocks;
  j["posts"] = t.posts;
  return j.dump(1) + "\n";
}

void write_corpus(const SynthCorpus& corpus, const ScenarioConfig& config, const std::string& dir) {
  write_file_atomic(dir + "/replay.ndjson", corpus.ndjson);
  write_file_atomic(dir + "/ground_truth.json", ground_truth_json(corpus.truth, config));
  write_file_atomic(dir + "/mbfc.tsv", corpus.mbfc_tsv);
  write_file_atomic(dir + "/quality.tsv", corpus.quality_tsv);
}

}  // namespace blockprop
