// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "mock_endpoint.hpp"
#include "oracles.hpp"
#include "spygame/annotation.hpp"
#include "spygame/matching.hpp"
#include "spygame/metrics.hpp"
#include "support.hpp"

using namespace spygame;
using namespace spygame::testing;
namespace fs = std::filesystem;

namespace {

/// Collects failures; the first few are reported.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (ok) return;
    ++failed_;
    if (failures_.size() < 3) failures_.push_back(what);
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    if (ok()) {
      s << total_ << " checks";
    } else {
      s << failed_ << "/" << total_ << " checks failed";
      for (const auto& f : failures_) s << "; " << f;
    }
    return s.str();
  }

 private:
  long total_ = 0;
  long failed_ = 0;
  std::vector<std::string> failures_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same(std::optional<double> a, std::optional<double> b) {
  return a.has_value() == b.has_value() && (!a || *a == *b);
}

std::vector<GameFacts> facts_of(const std::vector<GameRecord>& records,
                                const FactsOptions& options = {}) {
  std::vector<GameFacts> out;
  for (const auto& r : records) out.push_back(derive_facts(r, default_deck(), options));
  return out;
}

// Shared by criteria 2 and 3.
const std::vector<GameRecord>& thousand_games() {
  static const std::vector<GameRecord> games = random_corpus(1000, 20240601);
  return games;
}

// ---- 1

void rule_oracle(Checks& c) {
  const GameConfig config = default_game_config();
  const PlayerId spy = 2;
  const Assignment a = fixed_assignment(config, spy, 0);

  for (PlayerId accused : {spy, PlayerId{5}}) {
    for (int pattern = 0; pattern < 32; ++pattern) {
      GameState s = init_game(config, a);
      s = advance(s, pending_actor(s), {act::Accuse{accused}, {}}).state;
      std::vector<bool> agrees;
      for (int i = 0; i < 5; ++i) {
        const bool agree = (pattern >> i) & 1;
        agrees.push_back(agree);
        s = advance(s, pending_actor(s), {act::DayBallot{agree}, {}}).state;
      }
      const auto verdict = oracle::day_vote(agrees, accused == spy);
      bool ok = s.ended() == verdict.ended;
      if (ok && verdict.ended) ok = (s.outcome->winner == Winner::Spy) == verdict.spy_wins;
      c.expect(ok, "day pattern " + std::to_string(pattern));
    }
  }

  const int n = config.num_players;
  const GameState at_final = walk_to_final_vote(config, a);
  auto check_final = [&](const std::vector<int>& choice, const std::string& label) {
    // choice[v] indexes the six seats other than v.
    std::vector<int> targets(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) targets[v] = choice[v] >= v ? choice[v] + 1 : choice[v];
    GameState s = at_final;
    while (!s.ended()) {
      const PlayerId actor = pending_actor(s);
      s = advance(s, actor, {act::FinalBallot{targets[actor]}, {}}).state;
    }
    std::vector<ev::FinalVoteBallot> ballots;
    for (int v = 0; v < n; ++v) ballots.push_back({v, targets[v]});
    const bool expected = oracle::final_vote_spy_wins(targets, spy, n);
    c.expect((s.outcome->winner == Winner::Spy) == expected, "engine, final " + label);
    c.expect((decide_winner(ballots, spy, n).winner == Winner::Spy) == expected,
             "decide_winner, final " + label);
  };

  std::mt19937_64 rng(7);
  for (int i = 0; i < 5000; ++i) {
    std::vector<int> choice(static_cast<std::size_t>(n));
    for (auto& x : choice) x = static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
    check_final(choice, "sample " + std::to_string(i));
  }

  // Boundary patterns: a shared maximum, or the spy within one vote of it.
  std::vector<int> choice(static_cast<std::size_t>(n), 0);
  long boundary = 0;
  for (;;) {
    std::vector<int> votes(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) votes[choice[v] >= v ? choice[v] + 1 : choice[v]]++;
    const int top = *std::max_element(votes.begin(), votes.end());
    const bool shared = std::count(votes.begin(), votes.end(), top) > 1;
    if (shared || votes[spy] >= top - 1) {
      check_final(choice, "boundary " + std::to_string(boundary));
      ++boundary;
    }
    int i = 0;
    while (i < n && ++choice[i] == n - 1) choice[i++] = 0;
    if (i == n) break;
  }
  c.expect(boundary > 0, "no boundary patterns");
}

// ---- 2

void replay_determinism(Checks& c) {
  for (const auto& r : thousand_games()) {
    const ReplayReport rep = validate_replay(r);
    c.expect(rep.identical, r.header.game_id + " diverged");
  }
}

// ---- 3

void metric_oracle(Checks& c) {
  const auto& records = thousand_games();
  std::vector<oracle::Facts> of;
  for (const auto& r : records) of.push_back(oracle::recount(serialize_record(r), default_deck()));
  const auto facts = facts_of(records);
  const oracle::Metrics m = oracle::single_pass(of);
  c.expect(same(win_rate(facts).percent(), m.wr), "WR");
  c.expect(same(living_round(facts), m.lr), "LR");
  c.expect(same(guess_success(facts).percent(), m.gs), "GS");
  c.expect(same(notice_rate(facts).percent(), m.nr), "NR");
  c.expect(same(information_catching(facts).percent(), m.ic), "IC");
  c.expect(same(information_deduction(facts).percent(), m.id), "ID");
  c.expect(same(caught_rate(facts).percent(), m.cr), "CR");
  c.expect(same(vote_rate(facts).percent(), m.vr), "VR");
  c.expect(guess_success(facts).denominator == static_cast<std::size_t>(m.gs_n), "GS n");
  c.expect(information_catching(facts).denominator == static_cast<std::size_t>(m.ic_n), "IC n");
  c.expect(information_deduction(facts).denominator == static_cast<std::size_t>(m.id_n), "ID n");
  c.expect(caught_rate(facts).denominator == static_cast<std::size_t>(m.cr_n), "CR n");
  c.expect(vote_rate(facts).denominator == static_cast<std::size_t>(m.vr_n), "VR n");
  const auto ve = vote_entropy(facts);
  c.expect(ve && m.ve && std::abs(*ve - *m.ve) <= 1e-9, "VE");
}

// ---- 4

void paper_arithmetic(Checks& c) {
  auto near = [&](const Ratio& r, std::size_t k, std::size_t n, double pct, const char* what) {
    const auto p = r.percent();
    c.expect(r.numerator == k && r.denominator == n && p && std::abs(*p - pct) <= 0.01, what);
  };
  const auto strong = facts_of(scenario_corpus(strong_row_scenarios(), "s"));
  near(win_rate(strong), 17, 21, 80.95, "WR 17/21");
  near(guess_success(strong), 13, 16, 81.25, "GS 13/16");
  near(information_deduction(strong), 13, 21, 61.90, "ID 13/21");
  near(caught_rate(strong), 1, 4, 25.00, "CR 1/4");
  near(vote_rate(strong), 3, 12, 25.0, "VR 3/12");
  near(information_catching(facts_of(scenario_corpus(exposed_scenarios(), "e"))), 13, 14, 92.86,
       "IC 13/14");
  near(caught_rate(facts_of(scenario_corpus(all_caught_scenarios(), "c"))), 10, 10, 100.00,
       "CR 10/10");
}

// ---- 5

void closed_loop(Checks& c) {
  std::vector<CitizenProfile> profiles = {strong_citizen_profile(), weak_citizen_profile(0.3),
                                          weak_citizen_profile(1.0), never_unanimous_profile(0.0),
                                          never_unanimous_profile(0.5)};
  Rng rng(11);
  for (int i = 0; i < 5; ++i) {
    CitizenProfile p = rng.bernoulli(0.5) ? strong_citizen_profile()
                                          : weak_citizen_profile(rng.uniform01());
    p.day_agree_probability = rng.uniform01();
    p.accuse.accuse_probability = rng.uniform01();
    profiles.push_back(p);
  }
  const auto names = deck_names();
  std::vector<GameRecord> oracle_games, mute_games;
  std::uint64_t seed = 0;
  for (const auto& p : profiles) {
    for (const auto& loc : names) {
      for (int t = 0; t < 3; ++t) {
        oracle_games.push_back(scripted_game(default_game_config(), loc, ++seed, "oracle", p));
      }
    }
  }
  for (const auto& loc : names) {
    for (int t = 0; t < 10; ++t) {
      mute_games.push_back(
          scripted_game(default_game_config(), loc, ++seed, "mute", never_unanimous_profile(0.0)));
    }
  }

  const auto of = facts_of(oracle_games);
  c.expect(win_rate(of).percent() == 100.0, "oracle WR");
  c.expect(guess_success(of).percent() == 100.0, "oracle GS");
  c.expect(notice_rate(of).percent() == 100.0, "oracle NR");
  c.expect(living_round(of) == 2.0, "oracle LR");

  const auto mf = facts_of(mute_games);
  c.expect(living_round(mf) == 9.0, "mute LR");
  for (const auto& r : mute_games) {
    const EndCause cause = r.outcome->cause;
    c.expect(cause == EndCause::FinalVoteCitizenTopped || cause == EndCause::FinalVoteSpyToppedOrTie,
             r.header.game_id + " did not end in a final vote");
  }
}

// ---- 6

void exposure_detector(Checks& c) {
  const auto deck = default_deck();
  // Filler avoids every location name and alias; the decoys are near misses.
  const std::vector<std::string> filler = {"we", "often", "talk", "about", "the", "weather",
                                           "lunch", "people", "seem", "quiet", "today", "my",
                                           "job", "is", "long", "hours", "uniform", "tired"};
  const std::vector<std::string> decoys = {"planet", "subway", "banking", "schooling",
                                           "beachy", "hospitality", "airport", "restaurateur"};
  auto vary_case = [](std::string s, int mode) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mode == 1 || (mode == 2 && i == 0) || (mode == 3 && i % 2 == 0)) {
        s[i] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[i])));
      }
    }
    return s;
  };
  Rng rng(404);
  long tp = 0, fp = 0, fn = 0;
  for (int i = 0; i < 1000; ++i) {
    const LocationCard& card = deck[static_cast<std::size_t>(i) % deck.size()];
    std::vector<std::string> words;
    const int len = rng.uniform_int(3, 10);
    for (int k = 0; k < len; ++k) {
      words.push_back(rng.bernoulli(0.15)
                          ? decoys[static_cast<std::size_t>(
                                rng.uniform_int(0, static_cast<int>(decoys.size()) - 1))]
                          : filler[static_cast<std::size_t>(
                                rng.uniform_int(0, static_cast<int>(filler.size()) - 1))]);
    }
    const bool planted = i % 2 == 0;
    if (planted) {
      const int pick = rng.uniform_int(0, static_cast<int>(card.aliases.size()));
      const std::string phrase = pick == 0 ? card.name : card.aliases[static_cast<std::size_t>(pick - 1)];
      std::string leak = vary_case(phrase, rng.uniform_int(0, 3));
      static const char* trail[] = {"", ",", "!", "?", "'s", "."};
      leak += trail[rng.uniform_int(0, 5)];
      words.insert(words.begin() + rng.uniform_int(0, static_cast<int>(words.size())), leak);
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    const bool hit = detect_exposure(text, card);
    tp += hit && planted;
    fp += hit && !planted;
    fn += !hit && planted;
    c.expect(hit == planted, "utterance \"" + text + "\" for " + card.name);
  }
  const double precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0;
  const double recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0;
  c.expect(precision == 1.0, "precision " + std::to_string(precision));
  c.expect(recall == 1.0, "recall " + std::to_string(recall));
}

// ---- 7

void vote_entropy_checks(Checks& c) {
  const std::vector<int> single = {6};
  c.expect(tally_entropy(single) == 0.0, "single tally");
  c.expect(ballot_entropy({{0, 4}, {1, 4}, {2, 4}, {3, 4}}) == 0.0, "degenerate ballots");
  std::vector<std::pair<PlayerId, PlayerId>> uniform;
  for (PlayerId v = 0; v < 6; ++v) uniform.push_back({v, (v + 1) % 6});
  c.expect(std::abs(ballot_entropy(uniform) - std::log(6.0)) <= 1e-12, "uniform over 6");
  const std::vector<int> t321 = {3, 2, 1};
  c.expect(std::abs(tally_entropy(t321) - oracle::entropy(t321)) <= 1e-12, "{3,2,1}");
  c.expect(ballot_entropy({{0, 1}, {2, 1}, {3, 1}, {1, 0}, {4, 0}, {5, 2}}) ==
               tally_entropy(t321),
           "{3,2,1} ballots");

  // Seven seats and final ballots only: at most six suspicion ballots per game.
  const FactsOptions final_only{.vote_sources = VoteSources::FinalOnly};
  const double bound = std::log(6.0);
  std::vector<GameRecord> seven;
  for (const auto& r : thousand_games()) {
    if (r.header.config.num_players == 7) seven.push_back(r);
  }
  static const char* presets[] = {"mute", "oracle", "echo", "gambler"};
  const auto names = deck_names();
  for (std::uint64_t s = 0; s < 200; ++s) {
    seven.push_back(scripted_game(default_game_config(), names[s % names.size()], 5000 + s,
                                  presets[s % 4], s % 2 ? strong_citizen_profile()
                                                        : weak_citizen_profile(0.2)));
  }
  for (int k = 0; k < 10; ++k) {
    std::vector<GameRecord> corpus;
    for (std::size_t i = static_cast<std::size_t>(k); i < seven.size(); i += 10) {
      corpus.push_back(seven[i]);
    }
    const auto facts = facts_of(corpus, final_only);
    for (const auto& f : facts) {
      c.expect(ballot_entropy(f.suspicion_ballots) <= bound + 1e-12, f.game_id + " above ln 6");
    }
    const auto ve = vote_entropy(facts);
    c.expect(!ve || *ve <= bound + 1e-12, "corpus VE above ln 6");
  }
}

// ---- 8

void kappa_checks(Checks& c) {
  c.expect(fleiss_kappa({{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {3, 0, 0}}) == 1.0, "perfect");
  c.expect(std::abs(fleiss_kappa({{3, 0}, {2, 1}}) - (-0.2)) <= 1e-12, "(3,0)/(2,1)");

  std::mt19937 g(2024);
  for (int t = 0; t < 100; ++t) {
    const int items = 2 + static_cast<int>(g() % 40);
    const int cats = 2 + static_cast<int>(g() % 6);
    const int raters = 2 + static_cast<int>(g() % 5);
    std::vector<std::vector<int>> m(static_cast<std::size_t>(items),
                                    std::vector<int>(static_cast<std::size_t>(cats), 0));
    for (auto& row : m) {
      for (int r = 0; r < raters; ++r) row[g() % static_cast<unsigned>(cats)]++;
    }
    // Make sure more than one category is in use.
    m[0].assign(static_cast<std::size_t>(cats), 0);
    m[0][0] = raters;
    m[1].assign(static_cast<std::size_t>(cats), 0);
    m[1][1] = raters;
    const double k = fleiss_kappa(m);
    c.expect(std::abs(k - oracle::kappa(m)) <= 1e-12, "oracle, matrix " + std::to_string(t));

    auto rows = m;
    std::shuffle(rows.begin(), rows.end(), g);
    c.expect(std::abs(fleiss_kappa(rows) - k) <= 1e-12, "row order, matrix " + std::to_string(t));
    std::vector<std::size_t> perm(static_cast<std::size_t>(cats));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g);
    auto cols = m;
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = 0; j < perm.size(); ++j) cols[i][j] = m[i][perm[j]];
    }
    c.expect(std::abs(fleiss_kappa(cols) - k) <= 1e-12,
             "category order, matrix " + std::to_string(t));
  }
}

// ---- 9

std::size_t partial_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".partial";
  return n;
}

void experiment_shape(Checks& c) {
  TempDir a("acc-a"), b("acc-b");
  auto run = [&](const fs::path& out, int parallelism) {
    ExperimentConfig config = default_experiment();
    config.output_dir = out;
    config.parallelism = parallelism;
    config.fsync = false;
    return run_experiment(config, {.resume = false});
  };
  const RunSummary sa = run(a.path(), 4);
  const RunSummary sb = run(b.path(), 1);
  c.expect(sa.scheduled == 168 && sa.completed == 168, "first run completed " +
                                                           std::to_string(sa.completed));
  c.expect(sb.completed == 168, "second run completed " + std::to_string(sb.completed));

  std::map<std::string, std::uint64_t> fa, fb;
  for (const auto& [dir, prints] : {std::pair{a.path(), &fa}, std::pair{b.path(), &fb}}) {
    const auto logs = list_game_logs(dir);
    c.expect(logs.size() == 168, "log count " + std::to_string(logs.size()));
    c.expect(partial_files(dir) == 0, "partial files left behind");
    for (const auto& p : logs) {
      try {
        const GameRecord r = load_game(p);
        c.expect(r.complete() && r.warnings.empty(), p.filename().string() + " incomplete");
        (*prints)[p.filename().string()] = record_fingerprint(r);
      } catch (const std::exception& e) {
        c.expect(false, p.filename().string() + ": " + e.what());
      }
    }
  }
  c.expect(fa == fb, "records differ between runs");
}

// ---- 10

Observation spy_guess_obs() {
  Observation o;
  o.self = 2;
  o.num_players = 7;
  o.turn = 3;
  o.final_turn = 9;
  o.guess_start_turn = 2;
  o.certainty_threshold = 9;
  o.role = Role::Spy;
  o.request = RequestKind::SpyGuess;
  o.public_transcript = {{1, ev::Question{0, 1, "How long have you worked here?"}},
                         {3, ev::Answer{1, "A few years."}}};
  return o;
}

void gateway_robustness(Checks& c) {
  for (int retries : {0, 1, 2, 3, 5}) {
    const std::string tag = " (retries " + std::to_string(retries) + ")";
    // k garbage replies then a valid one: decides iff k <= retries.
    for (int k = 0; k <= retries + 1; ++k) {
      std::vector<std::string> texts(static_cast<std::size_t>(k), "no idea, sorry");
      texts.push_back("LOCATION: bank\nCERTAINTY: 4");
      auto t = scripted_texts(texts);
      auto g = mock_gateway(t, retries);
      const AgentReply r =
          remote_decide(*g, default_templates(), spy_guess_obs(), RequestKind::SpyGuess);
      const bool should_decide = k <= retries;
      c.expect(r.decision.has_value() == should_decide,
               std::to_string(k) + " garbage replies" + tag);
      c.expect(t->calls() == static_cast<std::size_t>(should_decide ? k + 1 : retries + 1),
               "call count after " + std::to_string(k) + " garbage replies" + tag);
    }
    auto t = scripted_texts({"lol what"});
    auto g = mock_gateway(t, retries);
    const AgentReply r =
        remote_decide(*g, default_templates(), spy_guess_obs(), RequestKind::SpyGuess);
    c.expect(!r.decision && !r.refusal.empty(), "always-garbage decided" + tag);
    c.expect(t->calls() == static_cast<std::size_t>(retries + 1), "always-garbage calls" + tag);
  }

  // A whole run against an endpoint that degrades and then fails outright.
  TempDir dir("acc-faulty");
  auto t = std::make_shared<MockTransport>([](const Json& req, std::size_t call) -> HttpResponse {
    if (call > 60 && call % 7 == 0) throw TransportError("injected reset");
    if (call > 30 && call % 5 == 0) return {200, chat_body("???")};
    if (call > 90) return {500, "injected"};
    return {200, chat_body(competent_reply(user_prompt(req)))};
  });
  ExperimentConfig config = default_experiment();
  config.output_dir = dir.path();
  config.fsync = false;
  config.locations = {"bank", "beach"};
  config.trials = 4;
  config.spies = {{"remote", "", mock_config(2)}, {"mute", "mute", std::nullopt}};
  config.citizens = {{"strong", strong_citizen_profile(), std::nullopt}};
  const RunSummary s =
      run_experiment(config, {.transport_factory = [&](const EndpointConfig&) { return t; }});
  c.expect(s.aborted > 0, "no game aborted");
  c.expect(s.completed + s.aborted == s.scheduled, "games unaccounted for");
  c.expect(partial_files(dir.path()) == 0, "partial files left behind");
  const auto logs = list_game_logs(dir.path());
  c.expect(logs.size() == s.scheduled, "log count " + std::to_string(logs.size()));
  for (const auto& p : logs) {
    try {
      const GameRecord r = load_game(p);
      c.expect(r.complete() && r.warnings.empty(), p.filename().string() + " torn");
      c.expect(validate_replay(r).identical, p.filename().string() + " does not replay");
    } catch (const std::exception& e) {
      c.expect(false, p.filename().string() + ": " + e.what());
    }
  }
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no limit
  std::function<void(Checks&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "rule oracle equivalence", 10, rule_oracle},
      {2, "replay determinism", 60, replay_determinism},
      {3, "metric oracle equivalence", 30, metric_oracle},
      {4, "reported-count arithmetic", 0, paper_arithmetic},
      {5, "closed-loop metric identities", 0, closed_loop},
      {6, "exposure detector", 0, exposure_detector},
      {7, "vote entropy", 0, vote_entropy_checks},
      {8, "fleiss kappa", 0, kappa_checks},
      {9, "experiment shape", 0, experiment_shape},
      {10, "gateway robustness", 0, gateway_robustness},
  };
  // The shared corpus is built outside the timed sections.
  thousand_games();

  int failed = 0;
  for (const auto& cr : criteria) {
    Checks checks;
    const auto t0 = Clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (cr.limit_seconds > 0) {
      std::ostringstream lim;
      lim << "took " << secs << " s, limit " << cr.limit_seconds << " s";
      checks.expect(secs < cr.limit_seconds, lim.str());
    }
    std::cout << (checks.ok() ? "PASS" : "FAIL") << " " << cr.id << " " << cr.name << ": "
              << checks.summary() << " [" << std::fixed << std::setprecision(2) << secs
              << " s]" << std::defaultfloat << std::endl;
    failed += !checks.ok();
  }
  return failed == 0 ? 0 : 1;
}
