#include <doctest.h>

#include <fstream>
#include <sstream>

#include "spygame/annotation.hpp"
#include "spygame/cli.hpp"
#include "spygame/runner.hpp"
#include "support.hpp"

using namespace spygame;
using namespace spygame::testing;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// A small run on disk shared by the cases below.
const fs::path& corpus_dir() {
  static TempDir dir("cli");
  static bool done = false;
  if (!done) {
    ExperimentConfig c = default_experiment();
    c.locations = {"bank", "school"};
    c.trials = 1;
    c.output_dir = dir / "runs";
    c.fsync = false;
    std::ofstream(dir / "exp.json") << to_json(c).dump(2);
    done = true;
  }
  return dir.path();
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"fly"}).code == kExitUsage);
  CHECK(cli({"metrics"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("run, stats, metrics and replay over a small experiment") {
  const fs::path dir = corpus_dir();
  const Result run = cli({"run", (dir / "exp.json").string()});
  CHECK(run.code == kExitOk);
  CHECK(run.out.find("16") != std::string::npos);
  const std::string runs = (dir / "runs").string();
  CHECK(list_game_logs(runs).size() == 16);

  const Result stats = cli({"stats", runs});
  CHECK(stats.code == kExitOk);
  CHECK(stats.out.find("Spy vs. strong") != std::string::npos);

  const Result metrics = cli({"metrics", runs});
  CHECK(metrics.code == kExitOk);
  CHECK(metrics.out.find("oracle vs strong") != std::string::npos);
  CHECK(metrics.out.find("WR(%)") != std::string::npos);

  const Result csv = cli({"metrics", runs, "--csv", "--group-by", "none", "--vote-sources",
                          "final_only"});
  CHECK(csv.code == kExitOk);
  CHECK(csv.out.rfind("group,games", 0) == 0);
  CHECK(csv.out.find("final_only") != std::string::npos);

  CHECK(cli({"metrics", runs, "--group-by", "planet"}).code != kExitOk);

  const std::string log = list_game_logs(runs).front().string();
  const Result ok = cli({"replay", log});
  CHECK(ok.code == kExitOk);
  CHECK(ok.out.find("identical") != std::string::npos);
}

TEST_CASE("replay exits 2 on a tampered log") {
  TempDir dir("tamper");
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    GameRecord r = random_scripted_game(seed);
    bool flipped = false;
    for (auto& e : r.events) {
      if (auto* res = std::get_if<ev::DayVoteResult>(&e.body)) {
        res->unanimous = !res->unanimous;
        flipped = true;
        break;
      }
    }
    if (!flipped) continue;
    const fs::path p = dir / "t.jsonl";
    write_record(p, r);
    const Result res = cli({"replay", p.string()});
    CHECK(res.code == kExitValidation);
    CHECK(res.out.find("diverge") != std::string::npos);
    return;
  }
  FAIL("no day vote in the corpus");
}

TEST_CASE("schema and config problems exit 2") {
  TempDir dir("bad");
  std::ofstream(dir / "broken.jsonl") << "{\"type\":\"header\"}\n";
  CHECK(cli({"replay", (dir / "broken.jsonl").string()}).code == kExitValidation);
  std::ofstream(dir / "bad.json") << "{\"name\":\"x\",\"oops\":1}";
  const Result r = cli({"run", (dir / "bad.json").string()});
  CHECK(r.code == kExitValidation);
  CHECK_FALSE(r.err.empty());
  CHECK(cli({"metrics", (dir / "missing").string()}).code != kExitOk);
}

TEST_CASE("kappa and freq read annotation files") {
  TempDir dir("ann");
  const auto records = scenario_corpus(exposed_scenarios(), "e");
  for (const auto& r : records) write_record(dir / (r.header.game_id + ".jsonl"), r);
  std::vector<ItemKey> steps;
  for (const auto& r : records) {
    for (const auto& e : r.events) {
      if (e.is<ev::Reasoning>()) steps.push_back({r.header.game_id, e.seq});
    }
  }
  for (const char* name : {"a", "b", "c"}) {
    AnnotationSet s{name, {}};
    for (std::size_t i = 0; i < 30; ++i) {
      s.entries.push_back({steps[i], i % 3 == 0 ? Label::Dissociation : Label::None});
    }
    std::ofstream(dir / (std::string(name) + ".ann")) << serialize_annotations({s});
  }
  const std::string a = (dir / "a.ann").string(), b = (dir / "b.ann").string(),
                    c = (dir / "c.ann").string();
  const Result k = cli({"kappa", a, b, c});
  CHECK(k.code == kExitOk);
  CHECK(k.out.find("overall kappa 1.0000") != std::string::npos);

  const Result f = cli({"freq", dir.path().string(), a, b, c});
  CHECK(f.code == kExitOk);
  CHECK(f.out.find("Dissociation") != std::string::npos);

  std::ofstream(dir / "short.ann") << serialize_annotations({AnnotationSet{"d", {{steps[0], Label::None}}}});
  const Result gap = cli({"kappa", a, (dir / "short.ann").string()});
  CHECK(gap.code == kExitValidation);
  CHECK(gap.err.find("d") != std::string::npos);
}

TEST_CASE("default-config prints a loadable experiment") {
  const Result r = cli({"default-config"});
  CHECK(r.code == kExitOk);
  const ExperimentConfig c = experiment_from_json(Json::parse(r.out));
  CHECK(schedule(c).size() == 168);
}
