//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/pipeline/pipeline.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hemgen/binio.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/dataset.h"
#include "hemgen/error.h"
#include "hemgen/gnn/predictor.h"
#include "hemgen/rng.h"
#include "hemgen/sha256.h"

namespace hemgen::pipeline {
namespace {

constexpr std::string_view kCandidateHeader[] = { "smiles", "OB(CO2)", "r0", "HGAS", "HSUB",
                                                   "Q",      "D",       "P",  "EG",   "h50" };

std::string candidate_header() {
  std::string out;
  for (const auto name: kCandidateHeader)
    out += (out.empty() ? "" : ",") + std::string(name);
  return out;
}

std::string join_path(const std::string &dir, std::string_view name) {
  return (std::filesystem::path(dir) / name).string();
}

// Runs f, rethrowing library errors tagged with the stage name.
template <class F>
auto stage(const PipelineOptions &opts, std::string_view name, F &&f) {
  if (opts.on_stage)
    opts.on_stage(name);
  try {
    return f();
  } catch (const StageError &) {
    throw;
  } catch (const Error &e) {
    throw StageError(std::string(name), e);
  }
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  for (const char c: line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace

RunConfig RunConfig::with_seed(std::uint64_t root) {
  RunConfig c;
  c.seed = root;
  c.gen.seed = root;
  c.pred.seed = root;
  c.sample_seed = derive_seed(root, "generator.sample");
  return c;
}

RunConfig RunConfig::from_text(std::string_view text) {
  const KeyValues kv = KeyValues::parse(text);
  std::set<std::string> used;
  std::uint64_t root = 0;
  kv.read("seed", root, used);
  RunConfig c = with_seed(root);
  kv.read("dataset", c.dataset, used);
  kv.read("out_dir", c.out_dir, used);
  c.gen.load(kv, "gen.", used);
  kv.read("gen.val_fraction", c.val_fraction, used);
  kv.read("gen.checkpoint", c.gen_checkpoint, used);
  c.pred.load(kv, "pred.", used);
  kv.read("pred.checkpoint", c.pred_checkpoint, used);
  kv.read("augment.factor", c.augment_factor, used);
  kv.read("sample.n", c.sample_n, used);
  kv.read("sample.temperature", c.sample_temperature, used);
  kv.read("sample.seed", c.sample_seed, used);
  kv.read("filter.target", c.filter_target, used);
  kv.read("filter.threshold", c.filter_threshold, used);
  std::string dir(metrics::direction_symbol(c.filter_direction));
  kv.read("filter.direction", dir, used);
  c.filter_direction = metrics::parse_direction(dir);
  kv.reject_unknown(used);
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string &path) {
  return from_text(read_text(path));
}

std::string RunConfig::to_text() const {
  KeyValues kv;
  kv.set("seed", seed);
  kv.set("dataset", dataset);
  kv.set("out_dir", out_dir);
  gen.store(kv, "gen.");
  kv.set("gen.val_fraction", val_fraction);
  kv.set("gen.checkpoint", gen_checkpoint);
  pred.store(kv, "pred.");
  kv.set("pred.checkpoint", pred_checkpoint);
  kv.set("augment.factor", augment_factor);
  kv.set("sample.n", sample_n);
  kv.set("sample.temperature", sample_temperature);
  kv.set("sample.seed", sample_seed);
  kv.set("filter.target", filter_target);
  kv.set("filter.threshold", filter_threshold);
  kv.set("filter.direction", std::string(metrics::direction_symbol(filter_direction)));
  return kv.to_text();
}

std::string RunConfig::hash() const {
  return to_hex(sha256(to_text()));
}

void RunConfig::validate() const {
  gen.validate();
  pred.validate();
  if (augment_factor < 1)
    throw Error(Errc::kBadConfig, "augment.factor must be at least 1");
  if (!(val_fraction >= 0.0 && val_fraction <= 0.5))
    throw Error(Errc::kBadConfig, "gen.val_fraction must lie in [0, 0.5]");
  if (sample_n < 1)
    throw Error(Errc::kBadConfig, "sample.n must be at least 1");
  if (!(sample_temperature > 0.0) || !std::isfinite(sample_temperature))
    throw Error(Errc::kBadConfig, "sample.temperature must be positive");
  if (!std::isfinite(filter_threshold))
    throw Error(Errc::kBadConfig, "filter.threshold must be finite");
  try {
    target_index(filter_target);
  } catch (const Error &e) {
    throw Error(Errc::kBadConfig, std::string("filter.target: ") + e.what());
  }
}

std::vector<std::string> read_smiles(const std::string &path) {
  const std::string text = read_text(path);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos)
      end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

void write_smiles(const std::string &path, std::span<const std::string> smiles) {
  std::string text;
  for (const auto &s: smiles) {
    text += s;
    text += '\n';
  }
  write_text(path, text);
}

void write_text(const std::string &path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::string read_text(const std::string &path) {
  const auto bytes = read_file(path);
  return { bytes.begin(), bytes.end() };
}

std::string candidates_csv(std::span<const metrics::Candidate> rows) {
  std::string out = candidate_header() + "\n";
  for (const auto &r: rows) {
    out += r.smiles;
    for (const double v: r.properties) {
      out += ',';
      out += std::isnan(v) ? std::string() : format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<metrics::Candidate> parse_candidates_csv(std::string_view text) {
  std::istringstream in { std::string(text) };
  std::string line;
  if (!std::getline(in, line))
    throw Error(Errc::kMissingColumn, "candidates file is empty");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  const auto header = split_csv_line(line);
  if (header.size() != std::size(kCandidateHeader) ||
      !std::equal(header.begin(), header.end(), std::begin(kCandidateHeader)))
    throw Error(Errc::kMissingColumn, "candidates header must be " + candidate_header());
  std::vector<metrics::Candidate> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size() || fields[0].empty())
      throw Error(Errc::kUnparseableRow, "bad candidates row", line_no);
    metrics::Candidate c;
    c.smiles = fields[0];
    for (std::size_t k = 0; k < kTargetCount; ++k) {
      const auto &f = fields[k + 1];
      if (f.empty()) {
        c.properties[k] = std::nan("");
        continue;
      }
      std::size_t used = 0;
      try {
        c.properties[k] = std::stod(f, &used);
      } catch (const std::exception &) {
        used = 0;
      }
      if (used != f.size())
        throw Error(Errc::kUnparseableRow, "bad number '" + f + "'", line_no);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string generator_history_csv(const seq::TrainingHistory &history) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < history.epochs(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(history.train_loss[e]) + ",";
    if (!std::isnan(history.val_loss[e]))
      out += format_double(history.val_loss[e]);
    out += '\n';
  }
  return out;
}

std::string predictor_history_csv(const std::vector<double> &train_rmse,
                                  const std::vector<double> &test_rmse) {
  std::string out = "epoch,train_rmse,test_rmse\n";
  for (std::size_t e = 0; e < train_rmse.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(train_rmse[e]) + ",";
    if (e < test_rmse.size() && !std::isnan(test_rmse[e]))
      out += format_double(test_rmse[e]);
    out += '\n';
  }
  return out;
}

std::string eval_json(const metrics::EvalReport &report, std::string_view config_hash) {
  auto j = nlohmann::json::parse(report.to_json());
  j["config_hash"] = std::string(config_hash);
  return j.dump(2) + "\n";
}

std::string manifest_json(const std::string &out_dir, std::span<const std::string_view> files,
                          std::string_view config_hash, std::string_view previous) {
  nlohmann::json j = nlohmann::json::object();
  if (!previous.empty()) {
    try {
      j = nlohmann::json::parse(previous);
    } catch (const nlohmann::json::exception &e) {
      throw Error(Errc::kIo, std::string("unreadable manifest: ") + e.what());
    }
  }
  if (!j.contains("artifacts") || !j["artifacts"].is_object())
    j["artifacts"] = nlohmann::json::object();
  j["config_hash"] = std::string(config_hash);
  for (const auto name: files) {
    const auto bytes = read_file(join_path(out_dir, name));
    j["artifacts"][std::string(name)] = {
      { "sha256", to_hex(sha256(std::string_view(reinterpret_cast<const char *>(bytes.data()),
                                                 bytes.size()))) },
      { "config_hash", std::string(config_hash) },
    };
  }
  return j.dump(2) + "\n";
}

void update_manifest(const std::string &out_dir, std::span<const std::string_view> files,
                     std::string_view config_hash) {
  const std::string path = join_path(out_dir, artifact::kManifest);
  const std::string previous = std::filesystem::exists(path) ? read_text(path) : std::string();
  write_text(path, manifest_json(out_dir, files, config_hash, previous));
}

std::vector<std::string> novel_valid(std::span<const std::string> generated,
                                     std::span<const std::string> training) {
  std::unordered_set<std::string> known;
  for (const auto &s: training) {
    try {
      known.insert(chem::canonical_smiles(s));
    } catch (const Error &) {
    }
  }
  std::vector<std::string> out;
  for (const auto &s: generated) {
    std::string canon;
    try {
      canon = chem::canonical_smiles(s);
    } catch (const Error &) {
      continue;
    }
    if (known.insert(canon).second)
      out.push_back(std::move(canon));
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig &config, const PipelineOptions &options) {
  config.validate();
  PipelineResult result;
  result.config_hash = config.hash();
  const std::string &dir = config.out_dir;
  std::vector<std::string_view> written;
  const auto emit = [&](std::string_view name, std::string_view text) {
    write_text(join_path(dir, name), text);
    written.push_back(name);
  };

  stage(options, "setup", [&] {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
      throw Error(Errc::kIo, "cannot create " + dir + ": " + ec.message());
    emit(artifact::kConfig, config.to_text());
    return 0;
  });

  const auto records = stage(options, "ingest", [&] {
    if (config.dataset.empty())
      throw Error(Errc::kBadConfig, "dataset is not set");
    return read_dataset(config.dataset, { .drop_invalid = true }).records;
  });
  const auto training = smiles_of(records);

  const auto generator = stage(options, "train-gen", [&] {
    seq::TrainOptions topts;
    topts.val_fraction = config.val_fraction;
    topts.augment_factor = config.augment_factor;
    topts.on_epoch = options.on_generator_epoch;
    auto setup = seq::prepare_training(config.gen, training, topts);
    std::vector<std::string> augmented;
    augmented.reserve(setup.train.size());
    for (const auto &ids: setup.train)
      augmented.push_back(setup.initial.vocab.decode(ids));
    write_smiles(join_path(dir, artifact::kAugmented), augmented);
    written.push_back(artifact::kAugmented);
    seq::GeneratorCheckpoint ck;
    if (!config.gen_checkpoint.empty()) {
      ck = seq::GeneratorCheckpoint::load(config.gen_checkpoint);
    } else {
      auto trained = seq::run_training(std::move(setup), topts);
      emit(artifact::kGeneratorHistory, generator_history_csv(trained.history));
      ck = std::move(trained.checkpoint);
    }
    ck.save(join_path(dir, artifact::kGenerator));
    written.push_back(artifact::kGenerator);
    return ck;
  });

  const auto samples = stage(options, "sample", [&] {
    seq::SampleOptions so;
    so.n = config.sample_n;
    so.temperature = config.sample_temperature;
    so.seed = config.sample_seed;
    auto s = seq::sample(generator, so);
    write_smiles(join_path(dir, artifact::kSamples), s);
    written.push_back(artifact::kSamples);
    return s;
  });

  const auto predictor = stage(options, "train-pred", [&] {
    gnn::PredictorCheckpoint ck;
    if (!config.pred_checkpoint.empty()) {
      ck = gnn::PredictorCheckpoint::load(config.pred_checkpoint);
    } else {
      gnn::PredictorTrainOptions po;
      if (options.on_predictor_epoch)
        po.on_epoch = [&](int epoch, const gnn::PredictorHistory &h) {
          options.on_predictor_epoch(epoch, h.train_rmse.back());
        };
      auto run = gnn::train_predictor(config.pred, records, po);
      emit(artifact::kPredictorHistory,
           predictor_history_csv(run.history.train_rmse, run.history.test_rmse));
      ck = std::move(run.checkpoint);
    }
    ck.save(join_path(dir, artifact::kPredictor));
    written.push_back(artifact::kPredictor);
    return ck;
  });

  // Valid samples in generation order, and the novel unique subset.
  std::vector<std::string> valid;
  for (const auto &s: samples)
    if (chem::is_valid(s))
      valid.push_back(s);
  const auto novel = novel_valid(samples, training);

  const auto [valid_pred, novel_pred] = stage(options, "predict", [&] {
    auto all = gnn::predict_properties(predictor, valid);
    auto sub = gnn::predict_properties(predictor, novel);
    std::vector<metrics::Candidate> rows;
    for (std::size_t i = 0; i < novel.size(); ++i)
      rows.push_back({ novel[i], sub[i] });
    emit(artifact::kPredictions, candidates_csv(rows));
    return std::pair { std::move(all), std::move(sub) };
  });

  result.report = stage(options, "evaluate", [&] {
    auto report = metrics::evaluate(samples, training, valid_pred);
    emit(artifact::kEvalJson, eval_json(report, result.config_hash));
    emit(artifact::kEvalCsv, report.to_csv());
    return report;
  });

  result.candidates = stage(options, "filter", [&] {
    auto kept = metrics::filter_by_property(novel, novel_pred, config.filter_target,
                                            config.filter_threshold, config.filter_direction);
    emit(artifact::kCandidates, candidates_csv(kept));
    return kept;
  });

  stage(options, "manifest", [&] {
    write_text(join_path(dir, artifact::kManifest),
               manifest_json(dir, written, result.config_hash));
    return 0;
  });
  return result;
}

}  // namespace hemgen::pipeline
