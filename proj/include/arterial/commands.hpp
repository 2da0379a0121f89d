#pragma once

// The arterial-risk subcommands. Each is a pure function of its inputs and
// configuration; errors surface as exceptions and `guarded` maps them to exit
// codes (0 success, 1 data/runtime error, 2 configuration error).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "arterial/case_control.hpp"
#include "arterial/design.hpp"
#include "arterial/error.hpp"
#include "arterial/evaluation.hpp"
#include "arterial/features.hpp"
#include "arterial/io.hpp"
#include "arterial/likelihoods.hpp"
#include "arterial/mcmc.hpp"
#include "arterial/synthetic_world.hpp"

namespace arterial::cli {

namespace fs = std::filesystem;
using io::json;

struct CommandOptions {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;
  std::optional<int> slice;
  std::optional<int> threads;
  std::optional<fs::path> logs;
  std::optional<fs::path> crashes;
  std::optional<fs::path> dataset;
  std::optional<fs::path> model;
  std::optional<fs::path> sampler;
  std::optional<fs::path> summary;
  std::optional<fs::path> chains;
  bool quiet = false;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitConfig = 2;

template <typename F>
int guarded(F&& f, std::ostream& err = std::cerr) {
  try {
    f();
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

namespace detail {

/// A config file plus the directory its relative paths resolve against.
struct Config {
  json doc = json::object();
  fs::path base = ".";

  [[nodiscard]] bool has(const char* key) const { return doc.contains(key) && !doc.at(key).is_null(); }

  [[nodiscard]] std::optional<fs::path> path(const char* key) const {
    if (!has(key)) return std::nullopt;
    if (!doc.at(key).is_string()) throw ConfigError(std::string(key) + " must be a path string");
    fs::path p = doc.at(key).get<std::string>();
    return p.is_absolute() ? p : base / p;
  }

  /// An inline object or a path to a JSON file.
  [[nodiscard]] std::optional<Config> section(const char* key) const {
    if (!has(key)) return std::nullopt;
    if (doc.at(key).is_object()) return Config{doc.at(key), base};
    return load(*path(key));
  }

  static Config load(const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError("config file not found: " + p.string());
    Config c;
    c.doc = io::read_json(p);
    if (!c.doc.is_object()) throw ConfigError(p.string() + ": expected a JSON object");
    c.base = p.has_parent_path() ? p.parent_path() : fs::path(".");
    return c;
  }
};

inline Config main_config(const CommandOptions& opt) {
  return opt.config ? Config::load(*opt.config) : Config{};
}

inline fs::path require_out(const CommandOptions& opt) {
  if (!opt.out) throw ConfigError("--out is required");
  return *opt.out;
}

inline fs::path require_input(std::optional<fs::path> flag, std::optional<fs::path> from_config, const char* what) {
  auto p = flag ? flag : from_config;
  if (!p) throw ConfigError(std::string("no ") + what + " given");
  if (!fs::exists(*p)) throw ConfigError(std::string(what) + " not found: " + p->string());
  return *p;
}

inline void note(const CommandOptions& opt, const std::string& msg) {
  if (!opt.quiet) std::cerr << msg << '\n';
}

inline ModelSpec load_model(const CommandOptions& opt, const Config& cfg) {
  std::optional<Config> section;
  if (opt.model) section = Config::load(*opt.model);
  else section = cfg.section("model");
  if (!section) throw ConfigError("no model configuration given");
  auto spec = io::model_from_json(section->doc);
  if (opt.slice) {
    spec.slice = *opt.slice;
    spec.validate();
  }
  return spec;
}

inline SamplerConfig load_sampler(const CommandOptions& opt, const Config& cfg) {
  std::optional<Config> section;
  if (opt.sampler) section = Config::load(*opt.sampler);
  else section = cfg.section("sampler");
  SamplerConfig s = section ? io::sampler_from_json(section->doc) : SamplerConfig{};
  if (opt.seed) s.seed = *opt.seed;
  if (opt.threads) s.threads = *opt.threads;
  s.validate();
  return s;
}

struct SplitData {
  ModelData train;
  std::optional<ModelData> validation;
};

/// Fitting uses the training split when the dataset carries one.
inline SplitData design_for(const Dataset& ds, const ModelSpec& spec) {
  SplitData out;
  if (ds.is_split()) {
    out.train = build_model_data(ds, spec, Split::train);
    out.validation = build_model_data(ds, spec, Split::validation);
  } else {
    out.train = build_model_data(ds, spec);
  }
  if (out.train.n_events() == 0) throw DataError("no training events in the dataset");
  return out;
}

/// Plug-in state whose per-unit deviations follow `data`'s unit order.
inline ParameterState align_state(const FittedModel& fit, const ParameterState& pm, const ModelData& data) {
  ParameterState s;
  s.beta = pm.beta;
  s.sigma2 = pm.sigma2;
  s.n_units = unit_count(fit.spec, data);
  auto rc = fit.spec.random_columns();
  s.phi.assign(rc.size() * s.n_units, 0.0);
  if (s.n_units == 0) return s;
  const auto& ids = fit.spec.family == Family::rp_logistic ? data.event_ids : data.stratum_ids;
  std::map<std::string, std::size_t> where;
  for (std::size_t u = 0; u < fit.unit_ids.size(); ++u) where.emplace(fit.unit_ids[u], u);
  std::size_t nu = fit.unit_ids.size();
  for (std::size_t u = 0; u < s.n_units; ++u) {
    auto it = where.find(ids[u]);
    if (it == where.end()) throw DataError("summary has no random effect for unit " + ids[u]);
    for (std::size_t r = 0; r < rc.size(); ++r) s.phi[r * s.n_units + u] = fit.phi_mean[r * nu + it->second];
  }
  return s;
}

inline json dic_json(const DicResult& d) {
  return {{"dic", d.dic}, {"mean_deviance", d.mean_deviance}, {"pd", d.pd}, {"deviance_at_mean", d.deviance_at_mean}};
}

inline std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string report_markdown(const ModelSpec& spec, const PosteriorSummary& ps, const DicResult& d,
                                   const std::optional<AucResult>& tr, const std::optional<AucResult>& va) {
  std::ostringstream md;
  md << "# " << to_string(spec.family) << ", slice " << spec.slice << "\n\n";
  md << "| Variable | Mean | SD | 2.5% | 97.5% | Hazard ratio | R-hat |\n";
  md << "|---|---|---|---|---|---|---|\n";
  for (const auto& p : ps.parameters) {
    md << "| " << p.name << (p.significant ? " *" : "") << (p.flagged ? " (!)" : "") << " | " << fixed3(p.mean) << " | "
       << fixed3(p.sd) << " | " << fixed3(p.lower) << " | " << fixed3(p.upper) << " | "
       << (p.hazard_ratio ? fixed3(*p.hazard_ratio) : "-") << " | " << (p.rhat ? fixed3(*p.rhat) : "-") << " |\n";
  }
  md << "\n| DIC | D-bar | pD |\n|---|---|---|\n";
  md << "| " << fixed3(d.dic) << " | " << fixed3(d.mean_deviance) << " | " << fixed3(d.pd) << " |\n\n";
  md << "Training AUC: " << (tr ? fixed3(tr->auc) : "-") << "\n";
  md << "Validation AUC: " << (va ? fixed3(va->auc) : "-") << "\n";
  return md.str();
}

inline void append_roc(io::CsvWriter& w, const char* split, const std::optional<AucResult>& a) {
  if (!a) return;
  for (const auto& p : a->roc)
    w.row({split, io::format_double(p.threshold), io::format_double(p.fpr), io::format_double(p.tpr)});
}

struct FitOutcome {
  ChainSet chains;
  PosteriorSummary summary;
  DicResult dic;
};

inline FitOutcome fit_model(const ModelSpec& spec, const ModelData& train, const SamplerConfig& sampler) {
  FitOutcome out{run_chains(spec, train, sampler), {}, {}};
  out.summary = summarize(out.chains);
  out.dic = dic(out.chains, train);
  return out;
}

}  // namespace detail

// --------------------------------------------------------------------------

inline void cmd_simulate(const CommandOptions& opt) {
  if (!opt.config) throw ConfigError("simulate needs --config <world.json>");
  auto cfg = detail::Config::load(*opt.config);
  auto world = io::world_from_json(cfg.doc);
  if (opt.seed) world.seed = *opt.seed;
  world.validate();
  auto out = detail::require_out(opt);

  auto logs = generate_logs(world);
  FeatureStore store(logs);
  auto crashes = label_crashes(store, world);
  std::sort(crashes.begin(), crashes.end());

  io::write_logs(out, logs);
  io::write_crashes(out / io::kCrashesFile, crashes);
  io::write_json(out / "truth.json", io::to_json(TruthManifest{world.truth, *world.seed, crashes.size()}));
  detail::note(opt, "simulate: " + std::to_string(logs.bluetooth.size()) + " traversals, " +
                        std::to_string(crashes.size()) + " crashes -> " + out.string());
}

inline void cmd_prepare(const CommandOptions& opt) {
  auto cfg = detail::main_config(opt);
  auto logs_dir = detail::require_input(opt.logs, cfg.path("logs"), "log directory");
  std::optional<fs::path> crash_cfg = cfg.path("crashes");
  if (!opt.crashes && !crash_cfg) crash_cfg = logs_dir / io::kCrashesFile;
  auto crash_path = detail::require_input(opt.crashes, crash_cfg, "crash log");
  auto out = detail::require_out(opt);

  CaseControlConfig cc;
  SpeedFilterConfig filter;
  StudyCalendar calendar{};
  std::optional<std::uint64_t> seed;
  io::decode("prepare config", [&] {
    const auto& j = cfg.doc;
    io::get_if(j, "m", cc.m);
    if (j.contains("exclusion_window_h")) cc.selection.exclusion_window_s = std::llround(j.at("exclusion_window_h").get<double>() * 3600.0);
    io::get_if(j, "split_fraction", cc.split_fraction);
    if (j.contains("time_matching")) {
      auto tm = j.at("time_matching").get<std::string>();
      if (tm == "exact_clock") cc.selection.matching = TimeMatching::exact_clock;
      else if (tm == "hour_bucket") cc.selection.matching = TimeMatching::hour_bucket;
      else throw ConfigError("time_matching must be 'exact_clock' or 'hour_bucket'");
    }
    if (j.contains("speed_filter")) {
      io::get_if(j.at("speed_filter"), "history", filter.history);
      io::get_if(j.at("speed_filter"), "band_multiplier", filter.band_multiplier);
      if (j.at("speed_filter").contains("rule")) {
        auto rule = j.at("speed_filter").at("rule").get<std::string>();
        if (rule == "fences") filter.rule = BandRule::fences;
        else if (rule == "central") filter.rule = BandRule::central;
        else throw ConfigError("speed_filter.rule must be 'central' or 'fences'");
      }
      if (j.at("speed_filter").contains("history_source")) {
        auto src = j.at("speed_filter").at("history_source").get<std::string>();
        if (src == "raw") filter.source = HistorySource::raw;
        else if (src == "retained") filter.source = HistorySource::retained;
        else throw ConfigError("speed_filter.history_source must be 'raw' or 'retained'");
      }
    }
    if (j.contains("study_start")) calendar.start = parse_timestamp(j.at("study_start").get<std::string>());
    if (j.contains("study_end")) calendar.end = parse_timestamp(j.at("study_end").get<std::string>());
    seed = io::get_seed(j);
    return 0;
  });
  if (opt.seed) seed = *opt.seed;
  if (!seed) throw ConfigError("prepare needs a seed (config 'seed' or --seed)");
  if (cc.m < 1) throw ConfigError("m must be >= 1");
  if (cc.selection.exclusion_window_s < 0) throw ConfigError("exclusion window must be >= 0");
  if (!(cc.split_fraction > 0.0 && cc.split_fraction < 1.0)) throw ConfigError("split_fraction must lie in (0, 1)");
  cc.seed = *seed;

  auto logs = io::read_logs(logs_dir);
  auto crashes = io::read_crashes(crash_path);
  StudyCalendar inferred = io::infer_calendar(logs);
  if (calendar.start.seconds == 0 && calendar.end.seconds == 0) calendar = inferred;
  if (!(calendar.start < calendar.end)) throw ConfigError("study_start must precede study_end");
  FeatureStore store(std::move(logs), filter);
  auto built = build_dataset(store, std::move(crashes), calendar, cc);

  io::write_dataset(out / "dataset.csv", built.dataset);
  io::write_json(out / "attrition.json", io::to_json(built.attrition));
  detail::note(opt, "prepare: kept " + std::to_string(built.attrition.kept) + " of " +
                        std::to_string(built.attrition.input_crashes) + " crashes -> " + out.string());
}

inline void cmd_fit(const CommandOptions& opt) {
  auto cfg = detail::main_config(opt);
  auto dataset_path = detail::require_input(opt.dataset, cfg.path("dataset"), "dataset");
  auto spec = detail::load_model(opt, cfg);
  auto sampler = detail::load_sampler(opt, cfg);
  auto out = detail::require_out(opt);

  auto ds = io::read_dataset(dataset_path);
  auto data = detail::design_for(ds, spec);
  auto fit = detail::fit_model(spec, data.train, sampler);

  auto summary = io::summary_json(fit.chains, fit.summary, sampler, data.train.n_strata(), data.train.n_events());
  summary["dic"] = detail::dic_json(fit.dic);
  io::write_text(out / "chains.csv", io::chains_csv(fit.chains, sampler));
  io::write_json(out / "summary.json", summary);
  detail::note(opt, "fit: " + std::string(to_string(spec.family)) + " slice " + std::to_string(spec.slice) +
                        ", DIC " + detail::fixed3(fit.dic.dic) + " -> " + out.string());
}

inline void cmd_evaluate(const CommandOptions& opt) {
  auto cfg = detail::main_config(opt);
  auto dataset_path = detail::require_input(opt.dataset, cfg.path("dataset"), "dataset");
  auto out = detail::require_out(opt);
  auto summary_path = opt.summary ? opt.summary : (opt.chains ? std::nullopt : cfg.path("summary"));
  auto chains_path = opt.chains ? opt.chains : (summary_path ? std::nullopt : cfg.path("chains"));

  ModelSpec spec;
  FittedModel fit;
  PosteriorSummary ps;
  ParameterState pm;
  std::optional<double> mean_dev;
  std::optional<ChainSet> cs;
  if (summary_path) {
    auto loaded = io::summary_from_json(io::read_json(detail::require_input(summary_path, {}, "summary")));
    spec = loaded.spec;
    if (opt.slice && *opt.slice != spec.slice) throw ConfigError("--slice differs from the fitted model's slice");
    fit = loaded.fit;
    ps = loaded.summary;
    pm = loaded.posterior_mean;
    mean_dev = loaded.deviance_mean;
  } else if (chains_path) {
    spec = detail::load_model(opt, cfg);
    cs = io::read_chains(detail::require_input(chains_path, {}, "chains"), spec);
    fit = FittedModel::from_chains(*cs);
    ps = summarize(*cs);
  } else {
    throw ConfigError("evaluate needs --summary or --chains");
  }

  auto ds = io::read_dataset(dataset_path);
  auto data = detail::design_for(ds, spec);
  DicResult d = cs ? dic(*cs, data.train)
                   : dic_from_deviances(std::vector<double>{*mean_dev},
                                        deviance(spec, detail::align_state(fit, pm, data.train), data.train));
  ScoringOptions so;
  bool posterior_scoring = false;
  io::decode("evaluate config", [&] {
    if (!cfg.has("scoring")) return 0;
    const auto& j = cfg.doc.at("scoring");
    io::get_if(j, "leave_one_out", so.leave_one_out);
    io::get_if(j, "use_unit_effects", so.use_unit_effects);
    if (j.contains("mode")) {
      auto mode = j.at("mode").get<std::string>();
      if (mode == "posterior_predictive") posterior_scoring = true;
      else if (mode != "plug_in") throw ConfigError("scoring.mode must be 'plug_in' or 'posterior_predictive'");
    }
    return 0;
  });
  if (posterior_scoring && !cs) throw ConfigError("posterior_predictive scoring needs --chains");
  auto score = [&](const ModelData& md) -> std::optional<AucResult> {
    if (md.n_events() == 0) return std::nullopt;
    if (!posterior_scoring) return auc_for(fit, md, so);
    return auc(score_events_posterior(*cs, md, so), md.y);
  };
  auto tr = score(data.train);
  std::optional<AucResult> va;
  if (data.validation) va = score(*data.validation);

  json report;
  report["schema_version"] = 1;
  report["model"] = io::to_json(spec);
  report["n_train_strata"] = data.train.n_strata();
  report["n_validation_strata"] = data.validation ? data.validation->n_strata() : 0;
  report["dic"] = detail::dic_json(d);
  report["scoring"] = {{"mode", posterior_scoring ? "posterior_predictive" : "plug_in"},
                       {"leave_one_out", so.leave_one_out},
                       {"use_unit_effects", so.use_unit_effects}};
  report["auc"] = {{"training", tr ? json(tr->auc) : json(nullptr)}, {"validation", va ? json(va->auc) : json(nullptr)}};
  json params = json::array();
  for (const auto& p : ps.parameters) params.push_back(io::to_json(p));
  report["parameters"] = params;

  io::CsvWriter roc({"split", "threshold", "fpr", "tpr"});
  detail::append_roc(roc, "train", tr);
  detail::append_roc(roc, "validation", va);

  io::write_json(out / "report.json", report);
  io::write_text(out / "report.md", detail::report_markdown(spec, ps, d, tr, va));
  io::write_text(out / "roc.csv", roc.str());
  detail::note(opt, "evaluate: training AUC " + (tr ? detail::fixed3(tr->auc) : std::string("-")) +
                        ", validation AUC " + (va ? detail::fixed3(va->auc) : std::string("-")) + " -> " + out.string());
}

// --------------------------------------------------------------------------
// Sweep over fixed / random coefficient combinations

struct Combination {
  std::vector<std::string> fixed;
  std::vector<std::string> random;
};

/// Every split of `covariates` with at most `max_fixed` fixed members, the
/// rest random; ordered by fixed-set size, then lexicographically by index.
[[nodiscard]] inline std::vector<Combination> enumerate_combinations(const std::vector<std::string>& covariates,
                                                                     std::size_t max_fixed) {
  std::size_t k = covariates.size();
  if (k > 20) throw ConfigError("too many covariates to enumerate");
  std::vector<std::pair<std::size_t, std::uint32_t>> masks;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    auto n = static_cast<std::size_t>(__builtin_popcount(mask));
    if (n <= max_fixed) masks.emplace_back(n, mask);
  }
  auto rev_bits = [k](std::uint32_t m) {
    std::uint32_t r = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (m & (1u << i)) r |= 1u << (k - 1 - i);
    return r;
  };
  std::stable_sort(masks.begin(), masks.end(), [&](auto a, auto b) {
    return a.first != b.first ? a.first < b.first : rev_bits(a.second) > rev_bits(b.second);
  });
  std::vector<Combination> out;
  for (auto [n, mask] : masks) {
    Combination c;
    for (std::size_t i = 0; i < k; ++i) ((mask & (1u << i)) ? c.fixed : c.random).push_back(covariates[i]);
    out.push_back(std::move(c));
  }
  return out;
}

struct SweepRow {
  Combination combination;
  Family family = Family::conditional_logistic;
  DicResult dic;
  std::optional<double> training_auc;
  std::optional<double> validation_auc;
};

/// Fits every combination; rows come back sorted by validation AUC,
/// descending (rows without one last, ties keep enumeration order).
[[nodiscard]] inline std::vector<SweepRow> run_sweep(const Dataset& ds, const ModelSpec& base,
                                                     const std::vector<Combination>& combos,
                                                     const SamplerConfig& sampler) {
  if (combos.empty()) throw ConfigError("empty combination list");
  std::vector<SweepRow> rows;
  for (const auto& c : combos) {
    ModelSpec spec = base;
    spec.covariates.clear();
    for (const auto& v : base.covariates)
      if (std::find(c.fixed.begin(), c.fixed.end(), v) != c.fixed.end() ||
          std::find(c.random.begin(), c.random.end(), v) != c.random.end())
        spec.covariates.push_back(v);
    for (const auto& v : c.fixed)
      if (std::find(spec.covariates.begin(), spec.covariates.end(), v) == spec.covariates.end())
        spec.covariates.push_back(v);
    for (const auto& v : c.random)
      if (std::find(spec.covariates.begin(), spec.covariates.end(), v) == spec.covariates.end())
        spec.covariates.push_back(v);
    spec.random_set = c.random;
    if (spec.family != Family::rp_logistic)
      spec.family = c.random.empty() ? Family::conditional_logistic : Family::rp_conditional_logistic;
    spec.validate();
    auto data = detail::design_for(ds, spec);
    auto fit = detail::fit_model(spec, data.train, sampler);
    auto fitted = FittedModel::from_chains(fit.chains);
    SweepRow row{c, spec.family, fit.dic, std::nullopt, std::nullopt};
    if (auto a = auc_for(fitted, data.train, {})) row.training_auc = a->auc;
    if (data.validation)
      if (auto a = auc_for(fitted, *data.validation, {})) row.validation_auc = a->auc;
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.validation_auc.has_value() != b.validation_auc.has_value()) return a.validation_auc.has_value();
    return a.validation_auc.value_or(0.0) > b.validation_auc.value_or(0.0);
  });
  return rows;
}

inline void cmd_sweep(const CommandOptions& opt) {
  auto cfg = detail::main_config(opt);
  auto dataset_path = detail::require_input(opt.dataset, cfg.path("dataset"), "dataset");
  auto base = detail::load_model(opt, cfg);
  auto sampler = detail::load_sampler(opt, cfg);
  auto out = detail::require_out(opt);

  std::vector<Combination> combos;
  io::decode("sweep config", [&] {
    if (cfg.has("combinations")) {
      for (const auto& c : cfg.doc.at("combinations")) {
        Combination cb;
        io::get_if(c, "fixed", cb.fixed);
        io::get_if(c, "random", cb.random);
        combos.push_back(std::move(cb));
      }
      if (combos.empty()) throw ConfigError("empty combination list");
    } else {
      std::size_t max_fixed = base.covariates.empty() ? 0 : base.covariates.size() - 1;
      io::get_if(cfg.doc, "max_fixed", max_fixed);
      combos = enumerate_combinations(base.covariates, max_fixed);
    }
    return 0;
  });

  auto ds = io::read_dataset(dataset_path);
  auto rows = run_sweep(ds, base, combos, sampler);

  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + v[i];
    return s;
  };
  auto opt_num = [](const std::optional<double>& v) { return v ? io::format_double(*v) : std::string(); };
  io::CsvWriter csv({"rank", "family", "fixed", "random", "dic", "pd", "training_auc", "validation_auc"});
  json rows_json = json::array();
  std::ostringstream md;
  md << "| Rank | Fixed | Random | DIC | pD | Training AUC | Validation AUC |\n|---|---|---|---|---|---|---|\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv.row({std::to_string(i + 1), std::string(to_string(r.family)), join(r.combination.fixed),
             join(r.combination.random), io::format_double(r.dic.dic), io::format_double(r.dic.pd),
             opt_num(r.training_auc), opt_num(r.validation_auc)});
    rows_json.push_back({{"rank", i + 1},
                         {"family", std::string(to_string(r.family))},
                         {"fixed", r.combination.fixed},
                         {"random", r.combination.random},
                         {"dic", detail::dic_json(r.dic)},
                         {"training_auc", io::optional_number(r.training_auc)},
                         {"validation_auc", io::optional_number(r.validation_auc)}});
    md << "| " << i + 1 << " | " << join(r.combination.fixed) << " | " << join(r.combination.random) << " | "
       << detail::fixed3(r.dic.dic) << " | " << detail::fixed3(r.dic.pd) << " | "
       << (r.training_auc ? detail::fixed3(*r.training_auc) : "-") << " | "
       << (r.validation_auc ? detail::fixed3(*r.validation_auc) : "-") << " |\n";
  }
  io::write_text(out / "sweep.csv", csv.str());
  io::write_json(out / "sweep.json", {{"model", io::to_json(base)}, {"rows", rows_json}});
  io::write_text(out / "sweep.md", md.str());
  detail::note(opt, "sweep: " + std::to_string(rows.size()) + " combinations -> " + out.string());
}

}  // namespace arterial::cli
