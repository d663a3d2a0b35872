// src/cli.cc

// Copyright 2026 The zrkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "zrkit/cli.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "zrkit/error.h"
#include "zrkit/evaluation.h"
#include "zrkit/io.h"
#include "zrkit/parallel.h"
#include "zrkit/vtln.h"

namespace zrkit {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Command-line mistakes: unlike plain IoError these print the usage text.
class UsageError : public IoError {
 public:
  using IoError::IoError;
};

int g_verbosity = 0;

void Info(const std::string& message) {
  if (g_verbosity >= 1) std::fprintf(stderr, "zrkit: %s\n", message.c_str());
}

void Warn(const std::string& message) {
  std::fprintf(stderr, "zrkit: warning: %s\n", message.c_str());
}

// ---------------------------------------------------------------------------
// Config keys. Every settable key has one Binder that applies either a JSON
// value (with type checking) or a raw flag string; both the strict file
// parser and --section.key overrides go through the same table.

struct Binder {
  std::function<void(PipelineConfig*, const Json&, const std::string&)> json;
  std::function<void(PipelineConfig*, const std::string&, const std::string&)>
      flag;
};

int64_t JsonInt(const Json& v, const std::string& context) {
  if (!v.is_number_integer() && !v.is_number_unsigned())
    throw IoError("config: " + context + " must be an integer");
  return v.get<int64_t>();
}

uint64_t JsonUint(const Json& v, const std::string& context) {
  if (v.is_number_unsigned()) return v.get<uint64_t>();
  if (v.is_number_integer() && v.get<int64_t>() >= 0)
    return static_cast<uint64_t>(v.get<int64_t>());
  throw IoError("config: " + context + " must be a nonnegative integer");
}

double JsonDouble(const Json& v, const std::string& context) {
  if (!v.is_number())
    throw IoError("config: " + context + " must be a number");
  return v.get<double>();
}

std::string JsonString(const Json& v, const std::string& context) {
  if (!v.is_string()) throw IoError("config: " + context + " must be a string");
  return v.get<std::string>();
}

std::vector<std::string> SplitComma(const std::string& raw) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (start <= raw.size()) {
    const std::string::size_type comma = raw.find(',', start);
    if (comma == std::string::npos) {
      parts.push_back(raw.substr(start));
      break;
    }
    parts.push_back(raw.substr(start, comma - start));
    start = comma + 1;
  }
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

Binder IntKey(std::function<void(PipelineConfig*, int64_t)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            set(c, JsonInt(v, ctx));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string& ctx) { set(c, ParseInt(raw, ctx)); }};
}

Binder UintKey(std::function<void(PipelineConfig*, uint64_t)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            set(c, JsonUint(v, ctx));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string& ctx) {
            const int64_t value = ParseInt(raw, ctx);
            if (value < 0) throw IoError(ctx + " must be nonnegative");
            set(c, static_cast<uint64_t>(value));
          }};
}

Binder DoubleKey(std::function<void(PipelineConfig*, double)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            set(c, JsonDouble(v, ctx));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string& ctx) { set(c, ParseDouble(raw, ctx)); }};
}

Binder StringKey(std::function<void(PipelineConfig*, const std::string&)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            set(c, JsonString(v, ctx));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string&) { set(c, raw); }};
}

Binder DoubleListKey(
    std::function<void(PipelineConfig*, std::vector<double>)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            if (!v.is_array())
              throw IoError("config: " + ctx + " must be an array of numbers");
            std::vector<double> values;
            for (const Json& e : v) values.push_back(JsonDouble(e, ctx));
            set(c, std::move(values));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string& ctx) {
            std::vector<double> values;
            for (const std::string& part : SplitComma(raw))
              values.push_back(ParseDouble(part, ctx));
            set(c, std::move(values));
          }};
}

Binder IntListKey(
    std::function<void(PipelineConfig*, std::vector<int64_t>)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            if (!v.is_array())
              throw IoError("config: " + ctx + " must be an array of integers");
            std::vector<int64_t> values;
            for (const Json& e : v) values.push_back(JsonInt(e, ctx));
            set(c, std::move(values));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string& ctx) {
            std::vector<int64_t> values;
            for (const std::string& part : SplitComma(raw))
              values.push_back(ParseInt(part, ctx));
            set(c, std::move(values));
          }};
}

Binder StringListKey(
    std::function<void(PipelineConfig*, std::vector<std::string>)> set) {
  return {[set](PipelineConfig* c, const Json& v, const std::string& ctx) {
            if (!v.is_array())
              throw IoError("config: " + ctx + " must be an array of strings");
            std::vector<std::string> values;
            for (const Json& e : v) values.push_back(JsonString(e, ctx));
            set(c, std::move(values));
          },
          [set](PipelineConfig* c, const std::string& raw,
                const std::string&) { set(c, SplitComma(raw)); }};
}

const std::map<std::string, Binder>& Bindings() {
  static const std::map<std::string, Binder>* bindings = [] {
    auto* b = new std::map<std::string, Binder>;
    auto add = [b](const std::string& key, Binder binder) {
      (*b)[key] = std::move(binder);
    };
    // Top level.
    add("seed", UintKey([](PipelineConfig* c, uint64_t v) { c->seed = v; }));
    add("stages", StringListKey([](PipelineConfig* c,
                                   std::vector<std::string> v) {
          c->stages = std::move(v);
        }));
    // frontend
    add("frontend.sample_rate", IntKey([](PipelineConfig* c, int64_t v) {
          c->frontend.sample_rate = static_cast<int>(v);
        }));
    add("frontend.frame_length", DoubleKey([](PipelineConfig* c, double v) {
          c->frontend.frame_length = v;
        }));
    add("frontend.frame_shift", DoubleKey([](PipelineConfig* c, double v) {
          c->frontend.frame_shift = v;
        }));
    add("frontend.preemphasis", DoubleKey([](PipelineConfig* c, double v) {
          c->frontend.preemphasis = v;
        }));
    add("frontend.fft_size", IntKey([](PipelineConfig* c, int64_t v) {
          c->frontend.fft_size = static_cast<int>(v);
        }));
    add("frontend.num_mel_bins", IntKey([](PipelineConfig* c, int64_t v) {
          c->frontend.num_mel_bins = static_cast<int>(v);
        }));
    add("frontend.num_ceps", IntKey([](PipelineConfig* c, int64_t v) {
          c->frontend.num_ceps = static_cast<int>(v);
        }));
    add("frontend.low_freq", DoubleKey([](PipelineConfig* c, double v) {
          c->frontend.low_freq = v;
        }));
    add("frontend.high_freq", DoubleKey([](PipelineConfig* c, double v) {
          c->frontend.high_freq = v;
        }));
    add("frontend.warp_low_cutoff_fraction",
        DoubleKey([](PipelineConfig* c, double v) {
          c->frontend.warp_low_cutoff_fraction = v;
        }));
    // vtln
    add("vtln.num_components", IntKey([](PipelineConfig* c, int64_t v) {
          c->vtln.num_components = static_cast<int>(v);
        }));
    add("vtln.em_iterations", IntKey([](PipelineConfig* c, int64_t v) {
          c->vtln.em_iterations = static_cast<int>(v);
        }));
    add("vtln.kmeans_iterations", IntKey([](PipelineConfig* c, int64_t v) {
          c->vtln.kmeans_iterations = static_cast<int>(v);
        }));
    add("vtln.variance_floor_fraction",
        DoubleKey([](PipelineConfig* c, double v) {
          c->vtln.variance_floor_fraction = v;
        }));
    add("vtln.warp_grid", DoubleListKey([](PipelineConfig* c,
                                           std::vector<double> v) {
          c->vtln.warp_grid = std::move(v);
        }));
    // cae
    add("cae.hidden_dims", IntListKey([](PipelineConfig* c,
                                         std::vector<int64_t> v) {
          c->cae.hidden_dims = std::move(v);
        }));
    add("cae.pretrain_epochs", IntKey([](PipelineConfig* c, int64_t v) {
          c->cae.pretrain_epochs = v;
        }));
    add("cae.pretrain_lr", DoubleKey([](PipelineConfig* c, double v) {
          c->cae.pretrain_lr = v;
        }));
    add("cae.finetune_epochs", IntKey([](PipelineConfig* c, int64_t v) {
          c->cae.finetune_epochs = v;
        }));
    add("cae.finetune_lr", DoubleKey([](PipelineConfig* c, double v) {
          c->cae.finetune_lr = v;
        }));
    add("cae.batch_size", IntKey([](PipelineConfig* c, int64_t v) {
          c->cae.batch_size = v;
        }));
    add("cae.seed", UintKey([](PipelineConfig* c, uint64_t v) {
          c->cae.seed = v;
        }));
    // pairs
    add("pairs.min_chars", IntKey([](PipelineConfig* c, int64_t v) {
          c->pairs.min_chars = static_cast<int>(v);
        }));
    add("pairs.min_duration", DoubleKey([](PipelineConfig* c, double v) {
          c->pairs.min_duration = v;
        }));
    // dtw
    add("dtw.band_fraction", DoubleKey([](PipelineConfig* c, double v) {
          c->band_fraction = v;
        }));
    // synth
    add("synth.n_words", IntKey([](PipelineConfig* c, int64_t v) {
          c->synth.n_words = v;
        }));
    add("synth.tokens_per_word", IntKey([](PipelineConfig* c, int64_t v) {
          c->synth.tokens_per_word = v;
        }));
    add("synth.n_speakers", IntKey([](PipelineConfig* c, int64_t v) {
          c->synth.n_speakers = v;
        }));
    add("synth.feature_dim", IntKey([](PipelineConfig* c, int64_t v) {
          c->synth.feature_dim = v;
        }));
    add("synth.mean_token_frames", IntKey([](PipelineConfig* c, int64_t v) {
          c->synth.mean_token_frames = v;
        }));
    add("synth.speaker_offset_scale", DoubleKey([](PipelineConfig* c,
                                                   double v) {
          c->synth.speaker_offset_scale = v;
        }));
    add("synth.speaker_rotation_angle_scale",
        DoubleKey([](PipelineConfig* c, double v) {
          c->synth.speaker_rotation_angle_scale = v;
        }));
    add("synth.noise_scale", DoubleKey([](PipelineConfig* c, double v) {
          c->synth.noise_scale = v;
        }));
    add("synth.tempo_jitter", DoubleKey([](PipelineConfig* c, double v) {
          c->synth.tempo_jitter = v;
        }));
    add("synth.seed", UintKey([](PipelineConfig* c, uint64_t v) {
          c->synth.seed = v;
        }));
    add("synth.mode", StringKey([](PipelineConfig* c, const std::string& v) {
          c->synth.mode = ParseSynthMode(v);
        }));
    add("synth.warp_set", DoubleListKey([](PipelineConfig* c,
                                           std::vector<double> v) {
          c->synth.warp_set = std::move(v);
        }));
    add("synth.sample_rate", IntKey([](PipelineConfig* c, int64_t v) {
          c->synth.sample_rate = static_cast<int>(v);
        }));
    // paths
    add("paths.manifest", StringKey([](PipelineConfig* c,
                                       const std::string& v) {
          c->paths.manifest = v;
        }));
    add("paths.alignments", StringKey([](PipelineConfig* c,
                                         const std::string& v) {
          c->paths.alignments = v;
        }));
    add("paths.work_dir", StringKey([](PipelineConfig* c,
                                       const std::string& v) {
          c->paths.work_dir = v;
        }));
    add("paths.text_features", StringKey([](PipelineConfig* c,
                                            const std::string& v) {
          c->paths.text_features = v;
        }));
    add("paths.utd_pairs", StringKey([](PipelineConfig* c,
                                        const std::string& v) {
          c->paths.utd_pairs = v;
        }));
    return b;
  }();
  return *bindings;
}

const std::set<std::string>& Sections() {
  static const std::set<std::string> sections = {
      "frontend", "vtln", "cae", "pairs", "dtw", "synth", "paths"};
  return sections;
}

Json ConfigToJsonValue(const PipelineConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["stages"] = c.stages;
  Json paths;
  paths["manifest"] = c.paths.manifest;
  paths["alignments"] = c.paths.alignments;
  paths["work_dir"] = c.paths.work_dir;
  paths["text_features"] = c.paths.text_features;
  paths["utd_pairs"] = c.paths.utd_pairs;
  j["paths"] = std::move(paths);
  Json frontend;
  frontend["sample_rate"] = c.frontend.sample_rate;
  frontend["frame_length"] = c.frontend.frame_length;
  frontend["frame_shift"] = c.frontend.frame_shift;
  frontend["preemphasis"] = c.frontend.preemphasis;
  frontend["fft_size"] = c.frontend.fft_size;
  frontend["num_mel_bins"] = c.frontend.num_mel_bins;
  frontend["num_ceps"] = c.frontend.num_ceps;
  frontend["low_freq"] = c.frontend.low_freq;
  frontend["high_freq"] = c.frontend.high_freq;
  frontend["warp_low_cutoff_fraction"] = c.frontend.warp_low_cutoff_fraction;
  j["frontend"] = std::move(frontend);
  Json vtln;
  vtln["num_components"] = c.vtln.num_components;
  vtln["em_iterations"] = c.vtln.em_iterations;
  vtln["kmeans_iterations"] = c.vtln.kmeans_iterations;
  vtln["variance_floor_fraction"] = c.vtln.variance_floor_fraction;
  vtln["warp_grid"] = c.vtln.warp_grid;
  j["vtln"] = std::move(vtln);
  Json dtw;
  dtw["band_fraction"] = c.band_fraction;
  j["dtw"] = std::move(dtw);
  Json pairs;
  pairs["min_chars"] = c.pairs.min_chars;
  pairs["min_duration"] = c.pairs.min_duration;
  j["pairs"] = std::move(pairs);
  Json cae;
  cae["hidden_dims"] = c.cae.hidden_dims;
  cae["pretrain_epochs"] = c.cae.pretrain_epochs;
  cae["pretrain_lr"] = c.cae.pretrain_lr;
  cae["finetune_epochs"] = c.cae.finetune_epochs;
  cae["finetune_lr"] = c.cae.finetune_lr;
  cae["batch_size"] = c.cae.batch_size;
  cae["seed"] = c.cae.seed;
  j["cae"] = std::move(cae);
  Json synth;
  synth["n_words"] = c.synth.n_words;
  synth["tokens_per_word"] = c.synth.tokens_per_word;
  synth["n_speakers"] = c.synth.n_speakers;
  synth["feature_dim"] = c.synth.feature_dim;
  synth["mean_token_frames"] = c.synth.mean_token_frames;
  synth["speaker_offset_scale"] = c.synth.speaker_offset_scale;
  synth["speaker_rotation_angle_scale"] =
      c.synth.speaker_rotation_angle_scale;
  synth["noise_scale"] = c.synth.noise_scale;
  synth["tempo_jitter"] = c.synth.tempo_jitter;
  synth["seed"] = c.synth.seed;
  synth["mode"] = SynthModeName(c.synth.mode);
  synth["warp_set"] = c.synth.warp_set;
  synth["sample_rate"] = c.synth.sample_rate;
  j["synth"] = std::move(synth);
  return j;
}

// ---------------------------------------------------------------------------
// Argument parsing.

struct SubcommandSpec {
  std::vector<std::string> required;  // value flags that must be present
  std::vector<std::string> optional;  // value flags that may be present
  std::vector<std::string> booleans;  // presence-only flags
};

const std::map<std::string, SubcommandSpec>& Subcommands() {
  static const std::map<std::string, SubcommandSpec> specs = {
      {"mfcc", {{"manifest", "out"}, {}, {}}},
      {"vtln-train", {{"manifest", "out"}, {}, {}}},
      {"vtln-estimate", {{"manifest", "ubm", "out"}, {}, {}}},
      {"vtln-apply", {{"manifest", "warps", "out"}, {}, {}}},
      {"pairs-gold", {{"alignments", "manifest", "out"}, {}, {"all"}}},
      {"pairs-utd", {{"pairs", "manifest", "out"}, {}, {}}},
      {"pairs-frames", {{"pairs", "features", "out"}, {}, {}}},
      {"cae-pretrain", {{"features", "out"}, {}, {}}},
      {"cae-train", {{"model", "pairs", "out"}, {}, {}}},
      {"cae-encode", {{"model", "features", "out"}, {"layer"}, {}}},
      {"import-features", {{"text", "out"}, {}, {}}},
      {"eval", {{"features", "pairs", "out"}, {"curve", "label"}, {}}},
      {"synth", {{"out"}, {}, {}}},
      {"pipeline", {{}, {"work"}, {}}},
  };
  return specs;
}

struct ParsedArgs {
  std::string subcommand;
  std::map<std::string, std::string> io;  // flag name -> value
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string config_file;
  std::set<std::string> booleans;
  int jobs = 0;  // 0 = unset; falls back to ZRKIT_JOBS, then 1
  int verbosity = 0;
};

bool Contains(const std::vector<std::string>& names, const std::string& name) {
  for (const std::string& n : names)
    if (n == name) return true;
  return false;
}

ParsedArgs ParseArgs(const std::vector<std::string>& args) {
  ParsedArgs parsed;
  if (args.empty()) throw UsageError("no subcommand given");
  parsed.subcommand = args[0];
  if (parsed.subcommand == "help") return parsed;
  const auto spec_it = Subcommands().find(parsed.subcommand);
  if (spec_it == Subcommands().end())
    throw UsageError("unknown subcommand '" + parsed.subcommand + "'");
  const SubcommandSpec& spec = spec_it->second;

  auto next_value = [&args](size_t* i, const std::string& flag) {
    if (*i + 1 >= args.size())
      throw UsageError("option " + flag + " needs a value");
    return args[++*i];
  };
  for (size_t i = 1; i < args.size(); ++i) {
    const std::string& token = args[i];
    if (token == "-v") {
      parsed.verbosity = std::max(parsed.verbosity, 1);
    } else if (token == "-vv") {
      parsed.verbosity = 2;
    } else if (token == "--config") {
      parsed.config_file = next_value(&i, token);
    } else if (token == "--jobs") {
      const int64_t jobs = ParseInt(next_value(&i, token), "--jobs");
      if (jobs < 1) throw UsageError("--jobs must be >= 1");
      parsed.jobs = static_cast<int>(jobs);
    } else if (token.rfind("--", 0) == 0) {
      const std::string name = token.substr(2);
      if (Contains(spec.booleans, name)) {
        parsed.booleans.insert(name);
      } else if (Contains(spec.required, name) ||
                 Contains(spec.optional, name)) {
        parsed.io[name] = next_value(&i, token);
      } else if (Bindings().count(name) != 0) {
        parsed.overrides.emplace_back(name, next_value(&i, token));
      } else {
        throw UsageError("unknown option --" + name);
      }
    } else {
      throw UsageError("unexpected argument '" + token + "'");
    }
  }
  for (const std::string& name : spec.required)
    if (parsed.io.count(name) == 0)
      throw UsageError(parsed.subcommand + " needs --" + name);
  return parsed;
}

int ResolveJobs(const ParsedArgs& args) {
  if (args.jobs > 0) return args.jobs;
  if (const char* env = std::getenv("ZRKIT_JOBS")) {
    const int64_t jobs = ParseInt(env, "ZRKIT_JOBS");
    if (jobs < 1) throw UsageError("ZRKIT_JOBS must be >= 1");
    return static_cast<int>(jobs);
  }
  return 1;
}

void PrintUsage(std::FILE* stream) {
  std::fprintf(
      stream,
      "usage: zrkit <subcommand> [flags]\n"
      "\n"
      "subcommands:\n"
      "  mfcc            --manifest M --out F.zrfa\n"
      "  vtln-train      --manifest M --out UBM.zrgm\n"
      "  vtln-estimate   --manifest M --ubm UBM.zrgm --out WARPS.tsv\n"
      "  vtln-apply      --manifest M --warps WARPS.tsv --out F.zrfa\n"
      "  pairs-gold      --alignments A --manifest M --out P.tsv [--all]\n"
      "  pairs-utd       --pairs UTD.tsv --manifest M --out P.tsv\n"
      "  pairs-frames    --pairs P.tsv --features F.zrfa --out FP.zrfp\n"
      "  cae-pretrain    --features F.zrfa --out MODEL.zrnn\n"
      "  cae-train       --model PRE.zrnn --pairs FP.zrfp --out MODEL.zrnn\n"
      "  cae-encode      --model MODEL.zrnn --features F.zrfa --out E.zrfa\n"
      "                  [--layer K]\n"
      "  import-features --text F.txt --out F.zrfa\n"
      "  eval            --features F.zrfa --pairs P.tsv --out REPORT.json\n"
      "                  [--curve CURVE.csv] [--label NAME]\n"
      "  synth           --out DIR\n"
      "  pipeline        --config CFG.json [--work DIR]\n"
      "  help\n"
      "\n"
      "common flags: --config FILE, --jobs N (or ZRKIT_JOBS), --seed N,\n"
      "-v/-vv, and any configuration key as --<section>.<key> VALUE\n"
      "(lists comma-separated), e.g. --cae.batch_size 64. Precedence is\n"
      "flags > config file > defaults. Every run writes the resolved\n"
      "configuration as <subcommand>.config.json next to its outputs.\n");
}

// ---------------------------------------------------------------------------
// Shared pieces.

UtteranceManifest LoadManifestResolved(const std::string& path) {
  return ResolveAudioPaths(LoadManifest(path),
                           fs::path(path).parent_path().string());
}

Matrix StackArchive(const std::vector<FeatureSequence>& archive) {
  if (archive.empty()) throw DomainError("feature archive is empty");
  int64_t total = 0;
  for (const FeatureSequence& f : archive) total += f.NumFrames();
  Matrix stacked(total, archive.front().Dim());
  int64_t row = 0;
  for (const FeatureSequence& f : archive) {
    stacked.middleRows(row, f.NumFrames()) = f.frames.cast<double>();
    row += f.NumFrames();
  }
  return stacked;
}

// The resolved-config echo, written next to the outputs after a successful
// run (into `dir`, named by the subcommand).
void WriteEcho(const std::string& dir, const std::string& subcommand,
               const PipelineConfig& config) {
  const fs::path parent = dir.empty() ? fs::path(".") : fs::path(dir);
  const fs::path path = parent / (subcommand + ".config.json");
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw IoError("cannot create config echo '" + path.string() + "'");
  out << ConfigToJson(config);
}

std::string ParentDir(const std::string& file_path) {
  return fs::path(file_path).parent_path().string();
}

void EvalToFiles(const std::vector<SegmentPair>& pairs,
                 const std::vector<FeatureSequence>& archive,
                 const std::string& label, const PipelineConfig& config,
                 int jobs, const std::string& report_path,
                 const std::string& curve_path) {
  const EvalReport report =
      Evaluate(pairs, archive, label, config.band_fraction, jobs);
  SaveEvalReport(report_path, report, /*include_curve=*/true,
                 ConfigToJsonValue(config).dump());
  if (!curve_path.empty()) SavePrCurveCsv(curve_path, report.curve);
  std::fprintf(stdout, "ap %.6f\n", report.average_precision);
}

// ---------------------------------------------------------------------------
// Subcommands. Each returns the echo directory.

std::string CmdMfcc(const ParsedArgs& a, const PipelineConfig& config,
                    int jobs) {
  const UtteranceManifest manifest = LoadManifestResolved(a.io.at("manifest"));
  const std::vector<FeatureSequence> archive =
      ApplyVtln(manifest, IdentityWarpTable(manifest), config.frontend, jobs);
  WriteFeatureArchive(a.io.at("out"), archive);
  Info("wrote " + std::to_string(archive.size()) + " utterances to " +
       a.io.at("out"));
  return ParentDir(a.io.at("out"));
}

std::string CmdVtlnTrain(const ParsedArgs& a, const PipelineConfig& config,
                         int jobs) {
  const UtteranceManifest manifest = LoadManifestResolved(a.io.at("manifest"));
  const std::vector<FeatureSequence> archive =
      ApplyVtln(manifest, IdentityWarpTable(manifest), config.frontend, jobs);
  const UbmTrainResult result =
      TrainUbm(StackArchive(archive), config.vtln, config.seed, jobs);
  SaveGmm(a.io.at("out"), result.gmm);
  Info("ubm final log-likelihood " +
       std::to_string(result.log_likelihoods.back()));
  return ParentDir(a.io.at("out"));
}

std::string CmdVtlnEstimate(const ParsedArgs& a, const PipelineConfig& config,
                            int jobs) {
  const UtteranceManifest manifest = LoadManifestResolved(a.io.at("manifest"));
  const DiagonalGmm ubm = LoadGmm(a.io.at("ubm"));
  const WarpTable warps =
      EstimateWarps(manifest, ubm, config.frontend, config.vtln, jobs);
  SaveWarpTable(a.io.at("out"), warps);
  return ParentDir(a.io.at("out"));
}

std::string CmdVtlnApply(const ParsedArgs& a, const PipelineConfig& config,
                         int jobs) {
  const UtteranceManifest manifest = LoadManifestResolved(a.io.at("manifest"));
  const WarpTable warps = LoadWarpTable(a.io.at("warps"));
  const std::vector<FeatureSequence> archive =
      ApplyVtln(manifest, warps, config.frontend, jobs);
  WriteFeatureArchive(a.io.at("out"), archive);
  return ParentDir(a.io.at("out"));
}

std::string CmdPairsGold(const ParsedArgs& a, const PipelineConfig& config,
                         int /*jobs*/) {
  const std::vector<WordAlignmentEntry> alignments =
      LoadAlignments(a.io.at("alignments"));
  const UtteranceManifest manifest = LoadManifest(a.io.at("manifest"));
  const std::vector<SegmentRecord> segments = SelectSegments(
      alignments, manifest, config.pairs, config.frontend.frame_shift);
  const std::vector<SegmentPair> pairs = a.booleans.count("all") != 0
                                             ? MakeEvalPairs(segments)
                                             : MakeGoldPairs(segments);
  SaveSegmentPairs(a.io.at("out"), pairs);
  Info("wrote " + std::to_string(pairs.size()) + " pairs from " +
       std::to_string(segments.size()) + " segments");
  return ParentDir(a.io.at("out"));
}

std::string CmdPairsUtd(const ParsedArgs& a, const PipelineConfig& config,
                        int /*jobs*/) {
  const UtteranceManifest manifest = LoadManifest(a.io.at("manifest"));
  const std::vector<UtdPairEntry> entries =
      LoadUtdPairs(a.io.at("pairs"), manifest);
  int64_t dropped = 0;
  const std::vector<SegmentPair> pairs = UtdPairsToSegmentPairs(
      entries, manifest, config.frontend.frame_shift, &dropped);
  if (dropped > 0)
    Warn(std::to_string(dropped) + " pairs dropped (fragment under 2 frames)");
  SaveSegmentPairs(a.io.at("out"), pairs);
  return ParentDir(a.io.at("out"));
}

std::string CmdPairsFrames(const ParsedArgs& a, const PipelineConfig& config,
                           int jobs) {
  const std::vector<SegmentPair> pairs = LoadSegmentPairs(a.io.at("pairs"));
  const std::vector<FeatureSequence> archive =
      ReadFeatureArchive(a.io.at("features"));
  const FramePairSet set = ExtractFramePairs(pairs, archive, config.seed, jobs);
  SaveFramePairs(a.io.at("out"), set);
  Info("extracted " + std::to_string(set.NumPairs()) + " frame pairs");
  return ParentDir(a.io.at("out"));
}

std::string CmdCaePretrain(const ParsedArgs& a, const PipelineConfig& config,
                           int jobs) {
  const std::vector<FeatureSequence> archive =
      ReadFeatureArchive(a.io.at("features"));
  const PretrainResult result =
      PretrainLayerwise(StackArchive(archive), config.cae, jobs);
  SaveMlp(a.io.at("out"), result.model);
  return ParentDir(a.io.at("out"));
}

std::string CmdCaeTrain(const ParsedArgs& a, const PipelineConfig& config,
                        int jobs) {
  const MlpModel model = LoadMlp(a.io.at("model"));
  const FramePairSet pairs = LoadFramePairs(a.io.at("pairs"));
  const FinetuneResult result =
      FinetuneCorrespondence(model, pairs, config.cae, jobs);
  SaveMlp(a.io.at("out"), result.model);
  Info("final loss " +
       std::to_string(result.log.entries.empty()
                          ? 0.0
                          : result.log.entries.back().mean_loss));
  return ParentDir(a.io.at("out"));
}

std::string CmdCaeEncode(const ParsedArgs& a, const PipelineConfig& /*config*/,
                         int jobs) {
  const MlpModel model = LoadMlp(a.io.at("model"));
  const std::vector<FeatureSequence> archive =
      ReadFeatureArchive(a.io.at("features"));
  const int64_t layer = a.io.count("layer") != 0
                            ? ParseInt(a.io.at("layer"), "--layer")
                            : -1;
  std::vector<FeatureSequence> encoded(archive.size());
  ParallelFor(static_cast<int64_t>(archive.size()), jobs, [&](int64_t i) {
    encoded[i] = Encode(model, archive[i], layer);
  });
  WriteFeatureArchive(a.io.at("out"), encoded);
  return ParentDir(a.io.at("out"));
}

std::string CmdImportFeatures(const ParsedArgs& a,
                              const PipelineConfig& /*config*/, int /*jobs*/) {
  WriteFeatureArchive(a.io.at("out"), ReadTextFeatures(a.io.at("text")));
  return ParentDir(a.io.at("out"));
}

std::string CmdEval(const ParsedArgs& a, const PipelineConfig& config,
                    int jobs) {
  const std::vector<FeatureSequence> archive =
      ReadFeatureArchive(a.io.at("features"));
  const std::vector<SegmentPair> pairs = LoadSegmentPairs(a.io.at("pairs"));
  const std::string label =
      a.io.count("label") != 0
          ? a.io.at("label")
          : fs::path(a.io.at("features")).filename().string();
  EvalToFiles(pairs, archive, label, config, jobs, a.io.at("out"),
              a.io.count("curve") != 0 ? a.io.at("curve") : "");
  return ParentDir(a.io.at("out"));
}

std::string CmdSynth(const ParsedArgs& a, const PipelineConfig& config,
                     int /*jobs*/) {
  const SynthCorpus corpus = GenerateSynthCorpus(config.synth);
  WriteSynthCorpus(a.io.at("out"), corpus);
  Info("wrote " + std::to_string(corpus.manifest.entries().size()) +
       " utterances to " + a.io.at("out"));
  return a.io.at("out");
}

// Pipeline stages communicate through fixed filenames in the work directory
// and a notion of "current features": mfcc, vtln-apply, cae-encode and
// import-features each produce an archive that later stages consume.
std::string CmdPipeline(const ParsedArgs& a, const PipelineConfig& config,
                        int jobs) {
  std::string work = a.io.count("work") != 0 ? a.io.at("work")
                                             : config.paths.work_dir;
  if (work.empty())
    throw UsageError("pipeline needs a work directory (--work or "
                     "paths.work_dir)");
  if (config.stages.empty())
    throw UsageError("pipeline needs a non-empty stage list (stages)");
  fs::create_directories(work);
  WriteEcho(work, "pipeline", config);
  const auto in_work = [&work](const char* name) {
    return (fs::path(work) / name).string();
  };

  std::string manifest_path = config.paths.manifest;
  std::string alignments_path = config.paths.alignments;
  std::string features;     // current feature archive
  std::string train_pairs;  // current cAE training pair list

  const auto need_manifest = [&](const std::string& stage) {
    if (manifest_path.empty())
      throw DomainError("stage " + stage +
                        ": no manifest (set paths.manifest or run synth "
                        "first)");
    return LoadManifestResolved(manifest_path);
  };
  const auto need_features = [&](const std::string& stage) {
    if (features.empty())
      throw DomainError("stage " + stage +
                        ": no feature archive yet (run mfcc, vtln-apply, "
                        "cae-encode or import-features first)");
    return ReadFeatureArchive(features);
  };

  for (const std::string& stage : config.stages) {
    Info("stage " + stage);
    if (stage == "synth") {
      const fs::path dir = fs::path(work) / "corpus";
      const SynthCorpus corpus = GenerateSynthCorpus(config.synth);
      WriteSynthCorpus(dir.string(), corpus);
      manifest_path = (dir / "manifest.tsv").string();
      alignments_path = (dir / "alignments.txt").string();
      if (config.synth.mode == SynthMode::kFeatureSpace)
        features = (dir / "features.zrfa").string();
    } else if (stage == "mfcc") {
      const UtteranceManifest manifest = need_manifest(stage);
      WriteFeatureArchive(
          in_work("feats.zrfa"),
          ApplyVtln(manifest, IdentityWarpTable(manifest), config.frontend,
                    jobs));
      features = in_work("feats.zrfa");
    } else if (stage == "vtln-train") {
      const UtteranceManifest manifest = need_manifest(stage);
      const std::vector<FeatureSequence> archive = ApplyVtln(
          manifest, IdentityWarpTable(manifest), config.frontend, jobs);
      SaveGmm(in_work("ubm.zrgm"),
              TrainUbm(StackArchive(archive), config.vtln, config.seed, jobs)
                  .gmm);
    } else if (stage == "vtln-estimate") {
      const UtteranceManifest manifest = need_manifest(stage);
      SaveWarpTable(in_work("warps.tsv"),
                    EstimateWarps(manifest, LoadGmm(in_work("ubm.zrgm")),
                                  config.frontend, config.vtln, jobs));
    } else if (stage == "vtln-apply") {
      const UtteranceManifest manifest = need_manifest(stage);
      WriteFeatureArchive(
          in_work("feats_vtln.zrfa"),
          ApplyVtln(manifest, LoadWarpTable(in_work("warps.tsv")),
                    config.frontend, jobs));
      features = in_work("feats_vtln.zrfa");
    } else if (stage == "pairs-gold") {
      if (alignments_path.empty())
        throw DomainError("stage pairs-gold: no alignments (set "
                          "paths.alignments or run synth first)");
      const UtteranceManifest manifest = need_manifest(stage);
      const std::vector<SegmentRecord> segments =
          SelectSegments(LoadAlignments(alignments_path), manifest,
                         config.pairs, config.frontend.frame_shift);
      SaveSegmentPairs(in_work("gold_pairs.tsv"), MakeGoldPairs(segments));
      SaveSegmentPairs(in_work("eval_pairs.tsv"), MakeEvalPairs(segments));
      train_pairs = in_work("gold_pairs.tsv");
    } else if (stage == "pairs-utd") {
      if (config.paths.utd_pairs.empty())
        throw DomainError("stage pairs-utd: paths.utd_pairs is not set");
      const UtteranceManifest manifest = need_manifest(stage);
      int64_t dropped = 0;
      SaveSegmentPairs(
          in_work("utd_pairs.tsv"),
          UtdPairsToSegmentPairs(LoadUtdPairs(config.paths.utd_pairs,
                                              manifest),
                                 manifest, config.frontend.frame_shift,
                                 &dropped));
      if (dropped > 0)
        Warn(std::to_string(dropped) +
             " pairs dropped (fragment under 2 frames)");
      train_pairs = in_work("utd_pairs.tsv");
    } else if (stage == "pairs-frames") {
      if (train_pairs.empty())
        throw DomainError("stage pairs-frames: no training pairs yet (run "
                          "pairs-gold or pairs-utd first)");
      SaveFramePairs(in_work("frame_pairs.zrfp"),
                     ExtractFramePairs(LoadSegmentPairs(train_pairs),
                                       need_features(stage), config.seed,
                                       jobs));
    } else if (stage == "cae-pretrain") {
      SaveMlp(in_work("cae_pre.zrnn"),
              PretrainLayerwise(StackArchive(need_features(stage)),
                                config.cae, jobs)
                  .model);
    } else if (stage == "cae-train") {
      SaveMlp(in_work("cae.zrnn"),
              FinetuneCorrespondence(LoadMlp(in_work("cae_pre.zrnn")),
                                     LoadFramePairs(in_work(
                                         "frame_pairs.zrfp")),
                                     config.cae, jobs)
                  .model);
    } else if (stage == "cae-encode") {
      const MlpModel model = LoadMlp(in_work("cae.zrnn"));
      const std::vector<FeatureSequence> archive = need_features(stage);
      std::vector<FeatureSequence> encoded(archive.size());
      ParallelFor(static_cast<int64_t>(archive.size()), jobs, [&](int64_t i) {
        encoded[i] = Encode(model, archive[i]);
      });
      WriteFeatureArchive(in_work("feats_cae.zrfa"), encoded);
      features = in_work("feats_cae.zrfa");
    } else if (stage == "import-features") {
      if (config.paths.text_features.empty())
        throw DomainError("stage import-features: paths.text_features is "
                          "not set");
      WriteFeatureArchive(in_work("feats.zrfa"),
                          ReadTextFeatures(config.paths.text_features));
      features = in_work("feats.zrfa");
    } else if (stage == "eval") {
      EvalToFiles(LoadSegmentPairs(in_work("eval_pairs.tsv")),
                  need_features(stage),
                  fs::path(features).filename().string(), config, jobs,
                  in_work("report.json"), in_work("curve.csv"));
    } else {
      throw IoError("config: unknown stage \"" + stage + "\"");
    }
  }
  return "";  // echo already written up front
}

}  // namespace

void PipelineConfig::Validate() const {
  frontend.Validate();
  vtln.Validate();
  cae.Validate();
  pairs.Validate();
  synth.Validate();
  if (!(band_fraction > 0.0 && band_fraction <= 1.0))
    throw DomainError("dtw.band_fraction must be in (0, 1]");
}

PipelineConfig ResolveConfig(
    const std::string& file_path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  PipelineConfig config;
  std::set<std::string> assigned;
  const auto& bindings = Bindings();

  if (!file_path.empty()) {
    std::ifstream in(file_path);
    if (!in) throw IoError("cannot open config file '" + file_path + "'");
    Json root;
    try {
      root = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw IoError("config file '" + file_path + "': " + e.what());
    }
    if (!root.is_object())
      throw IoError("config file '" + file_path +
                    "': top level must be a JSON object");
    for (const auto& [section, value] : root.items()) {
      if (Sections().count(section) != 0) {
        if (!value.is_object())
          throw IoError("config: section \"" + section +
                        "\" must be a JSON object");
        for (const auto& [key, inner] : value.items()) {
          const std::string dotted = section + "." + key;
          const auto it = bindings.find(dotted);
          if (it == bindings.end())
            throw IoError("config: unknown key \"" + key + "\" in section \"" +
                          section + "\"");
          it->second.json(&config, inner, dotted);
          assigned.insert(dotted);
        }
      } else if (bindings.count(section) != 0) {
        bindings.at(section).json(&config, value, section);
        assigned.insert(section);
      } else {
        throw IoError("config: unknown key \"" + section + "\"");
      }
    }
  }

  for (const auto& [key, raw] : overrides) {
    const auto it = bindings.find(key);
    if (it == bindings.end()) throw UsageError("unknown option --" + key);
    it->second.flag(&config, raw, "--" + key);
    assigned.insert(key);
  }

  // The global seed fills every per-module seed that was not set explicitly.
  if (assigned.count("seed") != 0) {
    if (assigned.count("cae.seed") == 0) config.cae.seed = config.seed;
    if (assigned.count("synth.seed") == 0) config.synth.seed = config.seed;
  }

  config.Validate();
  return config;
}

std::string ConfigToJson(const PipelineConfig& config) {
  return ConfigToJsonValue(config).dump(2) + "\n";
}

int RunCli(const std::vector<std::string>& args) {
  try {
    const ParsedArgs parsed = ParseArgs(args);
    g_verbosity = parsed.verbosity;
    if (parsed.subcommand == "help") {
      PrintUsage(stdout);
      return 0;
    }
    const PipelineConfig config =
        ResolveConfig(parsed.config_file, parsed.overrides);
    const int jobs = ResolveJobs(parsed);

    std::string echo_dir;
    if (parsed.subcommand == "mfcc") echo_dir = CmdMfcc(parsed, config, jobs);
    else if (parsed.subcommand == "vtln-train")
      echo_dir = CmdVtlnTrain(parsed, config, jobs);
    else if (parsed.subcommand == "vtln-estimate")
      echo_dir = CmdVtlnEstimate(parsed, config, jobs);
    else if (parsed.subcommand == "vtln-apply")
      echo_dir = CmdVtlnApply(parsed, config, jobs);
    else if (parsed.subcommand == "pairs-gold")
      echo_dir = CmdPairsGold(parsed, config, jobs);
    else if (parsed.subcommand == "pairs-utd")
      echo_dir = CmdPairsUtd(parsed, config, jobs);
    else if (parsed.subcommand == "pairs-frames")
      echo_dir = CmdPairsFrames(parsed, config, jobs);
    else if (parsed.subcommand == "cae-pretrain")
      echo_dir = CmdCaePretrain(parsed, config, jobs);
    else if (parsed.subcommand == "cae-train")
      echo_dir = CmdCaeTrain(parsed, config, jobs);
    else if (parsed.subcommand == "cae-encode")
      echo_dir = CmdCaeEncode(parsed, config, jobs);
    else if (parsed.subcommand == "import-features")
      echo_dir = CmdImportFeatures(parsed, config, jobs);
    else if (parsed.subcommand == "eval")
      echo_dir = CmdEval(parsed, config, jobs);
    else if (parsed.subcommand == "synth")
      echo_dir = CmdSynth(parsed, config, jobs);
    else if (parsed.subcommand == "pipeline")
      echo_dir = CmdPipeline(parsed, config, jobs);

    if (parsed.subcommand != "pipeline")
      WriteEcho(echo_dir, parsed.subcommand, config);
    return 0;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "zrkit: %s\n", e.what());
    PrintUsage(stderr);
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "zrkit: %s\n", e.what());
    return 2;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "zrkit: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "zrkit: %s\n", e.what());
    return 1;
  }
}

}  // namespace zrkit
