#pragma once

#include "blockprop/events.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace fixture {

inline blockprop::Timestamp at(int day, int second = 0) {
  using namespace std::chrono;
  return blockprop::Timestamp(sys_days{year{2024} / March / 1} + days{day} + seconds{second});
}

inline std::string user(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "did:plc:u%04d", i);
  return buf;
}

inline blockprop::Event make(std::string id, blockprop::EventKind kind, blockprop::EventAction action, std::string actor,
                             blockprop::Timestamp ts, std::optional<std::string> subject = std::nullopt) {
  blockprop::Event e;
  e.id = std::move(id);
  e.kind = kind;
  e.action = action;
  e.actor = std::move(actor);
  e.ts = ts;
  e.subject = std::move(subject);
  return e;
}

inline blockprop::Event post(std::string id, std::string actor, blockprop::Timestamp ts, std::string text,
                             std::string lang = "en") {
  auto e = make(std::move(id), blockprop::EventKind::Post, blockprop::EventAction::Create, std::move(actor), ts);
  e.text = std::move(text);
  e.langs = {std::move(lang)};
  e.tox = blockprop::ToxicityVector{0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};
  return e;
}

/// Well-formed random events over `users` actors; ids are unique.
inline std::vector<blockprop::Event> random_events(std::size_t n, int users, std::uint64_t seed) {
  using blockprop::EventAction;
  using blockprop::EventKind;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, users - 1), kind(0, 5), sec(0, 30 * 86400 - 1);
  std::bernoulli_distribution del(0.15);
  std::vector<blockprop::Event> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<EventKind>(kind(rng));
    const auto a = del(rng) ? EventAction::Delete : EventAction::Create;
    char id[24];
    std::snprintf(id, sizeof id, "e%07zu", i);
    auto e = make(id, k, a, user(u(rng)), at(0, sec(rng)));
    if (k != EventKind::Post || a == EventAction::Delete) e.subject = user(u(rng));
    if (k == EventKind::Reply) e.ref = "at://post/" + std::to_string(i);
    if (k == EventKind::Post && a == EventAction::Create) e.subject.reset();
    if (e.is_original_post()) {
      e.text = "hello world " + std::to_string(i % 7);
      e.langs = {i % 5 == 0 ? "pt" : "en"};
      e.tox = blockprop::ToxicityVector{0.2, 0.1, 0.3, 0.4, 0.05, 0.01, 0.02};
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace fixture
