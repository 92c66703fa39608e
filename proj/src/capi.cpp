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

#include "catn/catn.h"

#include <cstring>
#include <iostream>
#include <new>
#include <string>

#include "catn/checkpoint.hpp"
#include "catn/error.hpp"
#include "catn/evaluation.hpp"
#include "catn/gradcheck.hpp"
#include "catn/pipeline.hpp"
#include "catn/run_config.hpp"
#include "catn/synthetic.hpp"

struct catn_config {
  catn::RunConfig cfg;
};

struct catn_model {
  catn::Model model;
};

namespace {

thread_local std::string last_error;

catn_status fail(catn_status status, const char* message) {
  last_error = message;
  return status;
}

template <typename F>
catn_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return CATN_OK;
  } catch (const catn::ConfigError& e) {
    return fail(CATN_CONFIG_ERROR, e.what());
  } catch (const catn::DivergenceError& e) {
    return fail(CATN_DIVERGENCE, e.what());
  } catch (const catn::Error& e) {
    return fail(CATN_DATA_ERROR, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CATN_INTERNAL_ERROR, "out of memory");
  } catch (const std::exception& e) {
    return fail(CATN_INTERNAL_ERROR, e.what());
  }
}

catn_status null_argument(const char* name) {
  last_error = std::string("null argument: ") + name;
  return CATN_CONFIG_ERROR;
}

}  // namespace

extern "C" {

const char* catn_version(void) { return "1.0.0"; }

const char* catn_last_error(void) { return last_error.c_str(); }

catn_config* catn_config_new(void) { return new (std::nothrow) catn_config{}; }

void catn_config_free(catn_config* cfg) { delete cfg; }

catn_status catn_config_load(catn_config* cfg, const char* path) {
  if (cfg == nullptr) return null_argument("cfg");
  if (path == nullptr) return null_argument("path");
  return guarded([&] { cfg->cfg.apply_file(path); });
}

catn_status catn_config_set(catn_config* cfg, const char* key, const char* value) {
  if (cfg == nullptr) return null_argument("cfg");
  if (key == nullptr) return null_argument("key");
  if (value == nullptr) return null_argument("value");
  return guarded([&] { cfg->cfg.set(key, value); });
}

catn_status catn_config_get(const catn_config* cfg, const char* key, char* buf, size_t capacity,
                            size_t* needed) {
  if (cfg == nullptr) return null_argument("cfg");
  if (key == nullptr) return null_argument("key");
  return guarded([&] {
    const std::string value = cfg->cfg.get(key);
    if (needed != nullptr) *needed = value.size() + 1;
    if (buf != nullptr && capacity > value.size()) std::memcpy(buf, value.c_str(), value.size() + 1);
  });
}

catn_status catn_config_validate(const catn_config* cfg) {
  if (cfg == nullptr) return null_argument("cfg");
  return guarded([&] { cfg->cfg.validate(); });
}

catn_status catn_config_save(const catn_config* cfg, const char* path) {
  if (cfg == nullptr) return null_argument("cfg");
  if (path == nullptr) return null_argument("path");
  return guarded([&] { cfg->cfg.save(path); });
}

catn_status catn_synth(const catn_config* cfg, const char* out_dir) {
  if (cfg == nullptr) return null_argument("cfg");
  if (out_dir == nullptr) return null_argument("out_dir");
  return guarded([&] {
    catn::write_synthetic(catn::generate_synthetic(cfg->cfg.synth_config()), out_dir);
    cfg->cfg.save(std::filesystem::path(out_dir) / "config.txt");
  });
}

catn_status catn_prepare(const catn_config* cfg, const char* out_dir) {
  if (cfg == nullptr) return null_argument("cfg");
  if (out_dir == nullptr) return null_argument("out_dir");
  return guarded([&] { catn::prepare(cfg->cfg, out_dir); });
}

catn_status catn_train(const catn_config* cfg, const char* run_dir, int verbose) {
  if (cfg == nullptr) return null_argument("cfg");
  if (run_dir == nullptr) return null_argument("run_dir");
  return guarded([&] { catn::train_run(cfg->cfg, run_dir, verbose ? &std::cerr : nullptr); });
}

catn_status catn_evaluate(const char* run_dir, int test_split, const char* out_json, double* mse,
                          size_t* n_pairs) {
  if (run_dir == nullptr) return null_argument("run_dir");
  if (out_json == nullptr) return null_argument("out_json");
  return guarded([&] {
    const auto report = catn::eval_run(run_dir, test_split != 0, out_json);
    if (mse != nullptr) *mse = report.mse;
    if (n_pairs != nullptr) *n_pairs = report.n_pairs;
  });
}

catn_status catn_explain(const char* run_dir, const char* user, const char* item, size_t top_k,
                         const char* out_json, const char* out_csv) {
  if (run_dir == nullptr) return null_argument("run_dir");
  if (user == nullptr) return null_argument("user");
  if (item == nullptr) return null_argument("item");
  if (out_json == nullptr) return null_argument("out_json");
  if (out_csv == nullptr) return null_argument("out_csv");
  return guarded([&] { catn::explain_run(run_dir, user, item, top_k, out_json, out_csv); });
}

catn_status catn_gradcheck(uint64_t seed, double* max_rel_error, size_t* checked,
                           double* seconds) {
  return guarded([&] {
    catn::GradcheckOptions options;
    options.seed = seed;
    const auto report = catn::run_gradcheck(options);
    if (max_rel_error != nullptr) *max_rel_error = report.max_rel_error;
    if (checked != nullptr) *checked = report.checked;
    if (seconds != nullptr) *seconds = report.seconds;
  });
}

catn_status catn_model_load(const char* checkpoint_path, catn_model** out) {
  if (checkpoint_path == nullptr) return null_argument("checkpoint_path");
  if (out == nullptr) return null_argument("out");
  *out = nullptr;
  return guarded([&] {
    auto model = catn::Model::from_checkpoint(catn::ad::load_checkpoint(checkpoint_path));
    *out = new catn_model{std::move(model)};
  });
}

void catn_model_free(catn_model* model) { delete model; }

catn_status catn_model_parameter_count(const catn_model* model, size_t* count) {
  if (model == nullptr) return null_argument("model");
  if (count == nullptr) return null_argument("count");
  return guarded([&] { *count = model->model.parameter_count(); });
}

catn_status catn_model_variant(const catn_model* model, const char** name) {
  if (model == nullptr) return null_argument("model");
  if (name == nullptr) return null_argument("name");
  return guarded([&] { *name = catn::variant_name(model->model.variant()).data(); });
}

catn_status catn_model_correlation(const catn_model* model, double* out, size_t capacity,
                                   size_t* aspects) {
  if (model == nullptr) return null_argument("model");
  return guarded([&] {
    catn::Model copy = model->model;
    const auto s = catn::correlation_matrix(copy);
    if (aspects != nullptr) *aspects = s.rows();
    if (out != nullptr && capacity >= s.size()) std::memcpy(out, s.values().data(), s.size() * sizeof(double));
  });
}

}  // extern "C"
