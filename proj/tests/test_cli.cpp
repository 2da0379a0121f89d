#include "catch_amalgamated.hpp"

#include "cli_support.hpp"

using namespace arterial;
using namespace arterial::testing;

namespace {

const fs::path kSource = ARTERIAL_SOURCE_DIR;

json small_world() {
  auto w = io::read_json(kSource / "configs" / "world.json");
  w["n_segments"] = 2;
  return w;
}

json quick_sampler() { return {{"seed", 11}, {"n_chains", 3}, {"n_iter", 1500}, {"burn_in", 500}, {"thin", 1}}; }

/// simulate + prepare on a small world, shared by every test case below.
const fs::path& prepared() {
  static const fs::path dir = [] {
    auto d = fresh_dir("arterial_cli_pipeline");
    io::write_json(d / "world.json", small_world());
    io::write_json(d / "sampler.json", quick_sampler());
    REQUIRE(run_cli("simulate --config " + q(d / "world.json") + " --out " + q(d / "logs"), d / "sim.log") == 0);
    REQUIRE(run_cli("prepare --config " + q(kSource / "configs" / "prepare.json") + " --logs " + q(d / "logs") +
                        " --out " + q(d / "prep"),
                    d / "prep.log") == 0);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("simulate writes the log set and truth manifest", "[cli]") {
  const auto& d = prepared();
  for (const char* f : {"segments.csv", "bluetooth.csv", "phases.csv", "volumes.csv", "weather.csv", "crashes.csv",
                        "truth.json"})
    CHECK(fs::exists(d / "logs" / f));

  auto again = fresh_dir("arterial_cli_resim");
  REQUIRE(run_cli("simulate --config " + q(d / "world.json") + " --out " + q(again), again / ".." / "resim.log") == 0);
  for (const auto& e : fs::directory_iterator(d / "logs"))
    CHECK(io::read_text(e.path()) == io::read_text(again / e.path().filename()));

  auto no_seed = small_world();
  no_seed.erase("seed");
  io::write_json(again / "noseed.json", no_seed);
  CHECK(run_cli("simulate --config " + q(again / "noseed.json") + " --out " + q(again / "x"), again / "e.log") == 2);
  CHECK(run_cli("simulate --config " + q(again / "noseed.json") + " --seed 5 --out " + q(again / "y"), again / "e.log") == 0);
  CHECK(run_cli("simulate --config " + q(again / "absent.json") + " --out " + q(again / "z"), again / "e.log") == 2);
  fs::remove_all(again);
}

TEST_CASE("prepare emits 1 + 4 events per stratum and balanced attrition", "[cli]") {
  const auto& d = prepared();
  auto ds = io::read_dataset(d / "prep" / "dataset.csv");
  REQUIRE_FALSE(ds.strata.empty());
  auto crashes = io::read_crashes(d / "logs" / "crashes.csv");
  CrashIndex idx{crashes};
  for (const auto& st : ds.strata) {
    CHECK(st.controls.size() == 4);
    for (const auto& c : st.controls) {
      CHECK(matching_key(c.segment_id, c.timestamp) == st.key);
      CHECK_FALSE(idx.crash_within(c.segment_id, c.timestamp, 3 * kHour));
    }
  }
  auto a = io::read_json(d / "prep" / "attrition.json");
  auto rej = a["rejected"];
  CHECK(a["input_crashes"].get<std::size_t>() == crashes.size());
  CHECK(a["input_crashes"].get<std::size_t>() ==
        a["kept"].get<std::size_t>() + rej["too_few_candidates"].get<std::size_t>() +
            rej["low_bluetooth_sampling"].get<std::size_t>() + rej["missing_source"].get<std::size_t>());
  CHECK(a["kept"].get<std::size_t>() == ds.strata.size());
  CHECK(a["train_strata"].get<std::size_t>() + a["validation_strata"].get<std::size_t>() == ds.strata.size());

  CHECK(run_cli("prepare --logs " + q(d / "logs") + " --out " + q(d / "noseed"), d / "e.log") == 2);
  CHECK(run_cli("prepare --seed 1 --logs " + q(d / "missing") + " --out " + q(d / "nologs"), d / "e.log") == 2);
}

TEST_CASE("prepare on an all-sparse world rejects every crash for low sampling", "[cli]") {
  const auto& d = prepared();
  auto dir = fresh_dir("arterial_cli_sparse");
  auto w = small_world();
  w["bluetooth_sampling_rate"] = 0.0;
  io::write_json(dir / "world.json", w);
  REQUIRE(run_cli("simulate --config " + q(dir / "world.json") + " --out " + q(dir / "logs"), dir / "s.log") == 0);
  // crashes from the dense world, logs from the sparse one
  REQUIRE(run_cli("prepare --config " + q(kSource / "configs" / "prepare.json") + " --logs " + q(dir / "logs") +
                      " --crashes " + q(d / "logs" / "crashes.csv") + " --out " + q(dir / "prep"),
                  dir / "p.log") == 0);
  auto a = io::read_json(dir / "prep" / "attrition.json");
  REQUIRE(a["input_crashes"].get<std::size_t>() > 0);
  CHECK(a["kept"] == 0);
  CHECK(a["rejected"]["low_bluetooth_sampling"] == a["input_crashes"]);
  fs::remove_all(dir);
}

TEST_CASE("fit writes chains and a per-coefficient summary", "[cli]") {
  const auto& d = prepared();
  auto base = "fit --dataset " + q(d / "prep" / "dataset.csv") + " --model " + q(kSource / "configs" / "model.json") +
              " --sampler " + q(d / "sampler.json");
  REQUIRE(run_cli(base + " --out " + q(d / "fit"), d / "fit.log") == 0);
  auto s = io::read_json(d / "fit" / "summary.json");
  CHECK(s["model"]["slice"] == 2);
  REQUIRE(s["parameters"].size() == 4);
  auto model = io::read_json(kSource / "configs" / "model.json");
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& p = s["parameters"][i];
    CHECK(p["name"] == model["covariates"][i]);
    CHECK(p["mean"].is_number());
    CHECK(p["bci"].size() == 2);
    CHECK(p["bci"][0].get<double>() <= p["bci"][1].get<double>());
    CHECK(p["hazard_ratio"].get<double>() == Catch::Approx(std::exp(p["mean"].get<double>())));
    CHECK(p["rhat"].is_number());
  }
  auto header = io::read_csv(d / "fit" / "chains.csv").header;
  CHECK(header.front() == "chain");
  CHECK(header.back() == "deviance");

  SECTION("reruns are byte-identical") {
    REQUIRE(run_cli(base + " --threads 3 --out " + q(d / "fit2"), d / "fit2.log") == 0);
    CHECK(io::read_text(d / "fit" / "chains.csv") == io::read_text(d / "fit2" / "chains.csv"));
    CHECK(io::read_text(d / "fit" / "summary.json") == io::read_text(d / "fit2" / "summary.json"));
  }
  SECTION("--slice selects the slice covariates") {
    REQUIRE(run_cli(base + " --slice 3 --out " + q(d / "fit3"), d / "fit3.log") == 0);
    auto s3 = io::read_json(d / "fit3" / "summary.json");
    CHECK(s3["model"]["slice"] == 3);
    CHECK(s3["parameters"][0]["mean"] != s["parameters"][0]["mean"]);
  }
  SECTION("bad sampler settings are configuration errors") {
    auto bad = quick_sampler();
    bad["n_iter"] = 100;
    bad["burn_in"] = 500;
    io::write_json(d / "bad_sampler.json", bad);
    CHECK(run_cli("fit --dataset " + q(d / "prep" / "dataset.csv") + " --model " +
                      q(kSource / "configs" / "model.json") + " --sampler " + q(d / "bad_sampler.json") + " --out " +
                      q(d / "fitbad"),
                  d / "e.log") == 2);
    CHECK(run_cli(base + " --slice 7 --out " + q(d / "fitbad"), d / "e.log") == 2);
  }
}

TEST_CASE("evaluate writes a schema-valid report", "[cli]") {
  const auto& d = prepared();
  if (!fs::exists(d / "fit" / "summary.json"))
    REQUIRE(run_cli("fit --dataset " + q(d / "prep" / "dataset.csv") + " --model " +
                        q(kSource / "configs" / "model.json") + " --sampler " + q(d / "sampler.json") + " --out " +
                        q(d / "fit"),
                    d / "fit.log") == 0);
  REQUIRE(run_cli("evaluate --dataset " + q(d / "prep" / "dataset.csv") + " --summary " + q(d / "fit" / "summary.json") +
                      " --out " + q(d / "eval"),
                  d / "eval.log") == 0);
  auto r = io::read_json(d / "eval" / "report.json");
  auto schema = io::read_json(kSource / "schemas" / "report.schema.json");
  CHECK(schema_violation(r, schema).empty());
  CHECK(std::abs(r["dic"]["dic"].get<double>() - (r["dic"]["mean_deviance"].get<double>() + r["dic"]["pd"].get<double>())) <
        1e-9);
  for (const char* split : {"training", "validation"}) {
    REQUIRE(r["auc"][split].is_number());
    CHECK(r["auc"][split].get<double>() >= 0.0);
    CHECK(r["auc"][split].get<double>() <= 1.0);
  }
  CHECK(fs::exists(d / "eval" / "report.md"));
  auto roc = io::read_csv(d / "eval" / "roc.csv");
  CHECK(roc.header == std::vector<std::string>{"split", "threshold", "fpr", "tpr"});

  SECTION("the chains route agrees with the summary route") {
    REQUIRE(run_cli("evaluate --dataset " + q(d / "prep" / "dataset.csv") + " --chains " +
                        q(d / "fit" / "chains.csv") + " --model " + q(kSource / "configs" / "model.json") + " --out " +
                        q(d / "eval2"),
                    d / "eval2.log") == 0);
    auto r2 = io::read_json(d / "eval2" / "report.json");
    CHECK(r2["auc"]["validation"].get<double>() == Catch::Approx(r["auc"]["validation"].get<double>()).epsilon(1e-9));
    CHECK(r2["dic"]["dic"].get<double>() == Catch::Approx(r["dic"]["dic"].get<double>()).epsilon(1e-9));
  }
  SECTION("schema validation catches a broken report") {
    auto broken = r;
    broken["auc"]["training"] = 1.5;
    CHECK_FALSE(schema_violation(broken, schema).empty());
    broken = r;
    broken.erase("dic");
    CHECK_FALSE(schema_violation(broken, schema).empty());
  }
  SECTION("missing inputs are configuration errors") {
    CHECK(run_cli("evaluate --dataset " + q(d / "prep" / "dataset.csv") + " --out " + q(d / "evalbad"), d / "e.log") == 2);
  }
}

TEST_CASE("sweep compares fixed and random combinations", "[cli]") {
  const auto& d = prepared();
  json cfg = {{"max_fixed", 3}};
  io::write_json(d / "sweep.json", cfg);
  auto sampler = quick_sampler();
  sampler["n_iter"] = 600;
  sampler["burn_in"] = 200;
  io::write_json(d / "sweep_sampler.json", sampler);
  auto args = "sweep --config " + q(d / "sweep.json") + " --dataset " + q(d / "prep" / "dataset.csv") + " --model " +
              q(kSource / "configs" / "model.json") + " --sampler " + q(d / "sweep_sampler.json");
  REQUIRE(run_cli(args + " --out " + q(d / "sweep"), d / "sweep.log") == 0);
  auto rows = io::read_json(d / "sweep" / "sweep.json")["rows"];
  REQUIRE(rows.size() == 15);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(rows[i - 1]["validation_auc"].get<double>() >= rows[i]["validation_auc"].get<double>());
  for (const auto& r : rows) CHECK(r["fixed"].size() + r["random"].size() == 4);

  io::write_json(d / "sweep_empty.json", json{{"combinations", json::array()}});
  CHECK(run_cli("sweep --config " + q(d / "sweep_empty.json") + " --dataset " + q(d / "prep" / "dataset.csv") +
                    " --model " + q(kSource / "configs" / "model.json") + " --out " + q(d / "sweep_e"),
                d / "e.log") == 2);
}
