/* Copyright (c) 2026 The catn Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

// Command-line front end. Talks to the library only through catn.h.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "catn/catn.h"

namespace {

struct ConfigHandle {
  catn_config* ptr = catn_config_new();
  ~ConfigHandle() { catn_config_free(ptr); }
};

int report(catn_status status) {
  if (status != CATN_OK) std::fprintf(stderr, "error: %s\n", catn_last_error());
  return static_cast<int>(status);
}

struct CommonFlags {
  std::string config;
  std::vector<std::string> sets;
  std::string eta, variant, aspects, latent, seed;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool model_flags) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--set", f.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", f.seed, "random seed");
  if (model_flags) {
    cmd->add_option("--eta", f.eta, "fraction of training overlap users in (0, 1]");
    cmd->add_option("--variant", f.variant, "basic, attn, separate or full");
    cmd->add_option("--aspects", f.aspects, "number of aspects M");
    cmd->add_option("--latent", f.latent, "aspect dimension k");
  }
}

// Config file first, then --set overrides, then the dedicated flags.
catn_status build_config(const CommonFlags& f, ConfigHandle& h) {
  if (h.ptr == nullptr) return CATN_INTERNAL_ERROR;
  if (!f.config.empty()) {
    if (auto s = catn_config_load(h.ptr, f.config.c_str()); s != CATN_OK) return s;
  }
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return CATN_CONFIG_ERROR;
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (auto s = catn_config_set(h.ptr, key.c_str(), value.c_str()); s != CATN_OK) return s;
  }
  const std::pair<const char*, const std::string*> flags[] = {
      {"eta", &f.eta}, {"variant", &f.variant}, {"aspects", &f.aspects},
      {"latent", &f.latent}, {"seed", &f.seed}};
  for (const auto& [key, value] : flags) {
    if (value->empty()) continue;
    if (auto s = catn_config_set(h.ptr, key, value->c_str()); s != CATN_OK) return s;
  }
  return catn_config_validate(h.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catn: cross-domain aspect transfer for cold-start rating prediction"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(catn_version()));

  CommonFlags synth_flags, prepare_flags, train_flags;
  std::string synth_out, prepare_out, train_out, data_dir, source, target;
  std::string users, items, topics, noise;

  auto* synth = app.add_subcommand("synth", "generate a two-domain synthetic scenario");
  add_common(synth, synth_flags, false);
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--users", users, "overlapping users");
  synth->add_option("--items", items, "items per domain");
  synth->add_option("--topics", topics, "planted topics per domain");
  synth->add_option("--noise", noise, "uniform rating noise half-width");

  auto* prep = app.add_subcommand("prepare", "filter interactions, build vocabulary and documents");
  add_common(prep, prepare_flags, false);
  prep->add_option("--source", source, "source-domain JSON lines file");
  prep->add_option("--target", target, "target-domain JSON lines file");
  prep->add_option("--out", prepare_out, "output directory")->required();

  auto* tr = app.add_subcommand("train", "split, train and keep the best validation checkpoint");
  add_common(tr, train_flags, true);
  tr->add_option("--data", data_dir, "directory written by prepare");
  tr->add_option("--out", train_out, "run directory")->required();

  std::string eval_run, split = "test", eval_out;
  auto* ev = app.add_subcommand("eval", "cold-start MSE of a trained run");
  ev->add_option("--run", eval_run, "run directory")->required();
  ev->add_option("--split", split, "test or validation")
      ->check(CLI::IsMember({"test", "validation"}));
  ev->add_option("--out", eval_out, "report path (default RUN/eval_SPLIT.json)");

  std::string ex_run, ex_user, ex_item, ex_out, ex_csv;
  std::size_t top_k = 5;
  auto* ex = app.add_subcommand("explain", "attention words and correlation matrix for one pair");
  ex->add_option("--run", ex_run, "run directory")->required();
  ex->add_option("--user", ex_user, "user id (source-domain documents)")->required();
  ex->add_option("--item", ex_item, "target-domain item id")->required();
  ex->add_option("--top-k", top_k, "words per aspect");
  ex->add_option("--out", ex_out, "explanation path (default RUN/explain_USER_ITEM.json)");
  ex->add_option("--csv", ex_csv, "correlation matrix path (default RUN/correlation.csv)");

  std::uint64_t gc_seed = 7;
  auto* gc = app.add_subcommand("gradcheck", "finite-difference check of every gradient");
  gc->add_option("--seed", gc_seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::fputs(app.help().c_str(), stderr);
    return CATN_CONFIG_ERROR;
  }

  namespace fs = std::filesystem;
  if (*synth) {
    ConfigHandle h;
    const std::pair<const char*, const std::string*> extra[] = {
        {"synth_overlap_users", &users}, {"synth_items", &items},
        {"synth_topics", &topics}, {"synth_noise", &noise}};
    for (const auto& [key, value] : extra) {
      if (value->empty()) continue;
      synth_flags.sets.push_back(std::string(key) + "=" + *value);
    }
    if (auto s = build_config(synth_flags, h); s != CATN_OK) return report(s);
    return report(catn_synth(h.ptr, synth_out.c_str()));
  }
  if (*prep) {
    ConfigHandle h;
    if (!source.empty()) prepare_flags.sets.push_back("source=" + source);
    if (!target.empty()) prepare_flags.sets.push_back("target=" + target);
    if (auto s = build_config(prepare_flags, h); s != CATN_OK) return report(s);
    return report(catn_prepare(h.ptr, prepare_out.c_str()));
  }
  if (*tr) {
    ConfigHandle h;
    if (!data_dir.empty()) train_flags.sets.push_back("data_dir=" + data_dir);
    if (auto s = build_config(train_flags, h); s != CATN_OK) return report(s);
    return report(catn_train(h.ptr, train_out.c_str(), 1));
  }
  if (*ev) {
    if (eval_out.empty()) eval_out = (fs::path(eval_run) / ("eval_" + split + ".json")).string();
    double mse = 0.0;
    std::size_t n = 0;
    const auto s = catn_evaluate(eval_run.c_str(), split == "test", eval_out.c_str(), &mse, &n);
    if (s == CATN_OK) std::printf("%s mse %.6f over %zu pairs -> %s\n", split.c_str(), mse, n, eval_out.c_str());
    return report(s);
  }
  if (*ex) {
    if (ex_out.empty()) {
      ex_out = (fs::path(ex_run) / ("explain_" + ex_user + "_" + ex_item + ".json")).string();
    }
    if (ex_csv.empty()) ex_csv = (fs::path(ex_run) / "correlation.csv").string();
    const auto s = catn_explain(ex_run.c_str(), ex_user.c_str(), ex_item.c_str(), top_k,
                                ex_out.c_str(), ex_csv.c_str());
    if (s == CATN_OK) std::printf("wrote %s and %s\n", ex_out.c_str(), ex_csv.c_str());
    return report(s);
  }
  if (*gc) {
    double max_rel = 0.0, seconds = 0.0;
    std::size_t checked = 0;
    const auto s = catn_gradcheck(gc_seed, &max_rel, &checked, &seconds);
    if (s != CATN_OK) return report(s);
    const bool ok = max_rel < 1e-4;
    std::printf("max relative error %.3e over %zu entries (%.2f s): %s\n", max_rel, checked,
                seconds, ok ? "ok" : "FAILED");
    return ok ? CATN_OK : CATN_DIVERGENCE;
  }
  return CATN_CONFIG_ERROR;
}
