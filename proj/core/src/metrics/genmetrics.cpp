//
// Project hemgen - Copyright 2026 hemgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "hemgen/metrics/genmetrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "hemgen/chem/descriptors.h"
#include "hemgen/chem/smiles.h"
#include "hemgen/chem/writer.h"
#include "hemgen/config.h"
#include "hemgen/error.h"

namespace hemgen::metrics {
namespace {

// Canonical form, or nullopt for strings that fail the validity check.
std::optional<std::string> try_canonical(const std::string &s) {
  if (!chem::is_valid(s))
    return std::nullopt;
  return chem::canonical_smiles(s);
}

std::unordered_set<std::string> canonical_set(std::span<const std::string> training) {
  std::unordered_set<std::string> out;
  for (const auto &s: training)
    if (auto c = try_canonical(s))
      out.insert(std::move(*c));
  return out;
}

// Sums in ascending order so the result is independent of input order.
double sorted_sum(std::vector<double> &terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (const double t: terms)
    sum += t;
  return sum;
}

std::vector<chem::Fingerprint> fingerprints(std::span<const std::string> set,
                                            const FingerprintOptions &fp) {
  std::vector<chem::Fingerprint> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!chem::is_valid(set[i]))
      throw Error(Errc::kInvalidMolecule, "invalid molecule '" + set[i] + "'", i);
    out.push_back(chem::morgan_fingerprint(chem::parse(set[i]), fp.radius, fp.nbits));
  }
  return out;
}

double intra_mean(const std::vector<chem::Fingerprint> &fps) {
  if (fps.empty())
    throw Error(Errc::kEmptyInput, "mean_tanimoto: empty set");
  if (fps.size() < 2)
    throw Error(Errc::kEmptyPairSet, "mean_tanimoto: a single molecule has no pairs");
  std::vector<double> terms;
  terms.reserve(fps.size() * (fps.size() - 1) / 2);
  for (std::size_t i = 0; i < fps.size(); ++i)
    for (std::size_t j = i + 1; j < fps.size(); ++j)
      terms.push_back(chem::tanimoto(fps[i], fps[j]));
  const double n = static_cast<double>(terms.size());
  return sorted_sum(terms) / n;
}

double inter_mean(const std::vector<chem::Fingerprint> &a,
                  const std::vector<chem::Fingerprint> &b) {
  if (a.empty() || b.empty())
    throw Error(Errc::kEmptyInput, "mean_tanimoto: empty set");
  std::vector<double> terms;
  terms.reserve(a.size() * b.size());
  for (const auto &x: a)
    for (const auto &y: b)
      terms.push_back(chem::tanimoto(x, y));
  const double n = static_cast<double>(terms.size());
  return sorted_sum(terms) / n;
}

bool passes(double value, double threshold, Direction d) noexcept {
  switch (d) {
  case Direction::kGreater: return value > threshold;
  case Direction::kGreaterEqual: return value >= threshold;
  case Direction::kLess: return value < threshold;
  case Direction::kLessEqual: return value <= threshold;
  }
  return false;
}

// JSON cannot hold non-finite numbers; they are written as strings.
nlohmann::json number(double v) {
  if (std::isfinite(v))
    return v;
  return format_double(v);
}

}  // namespace

LibraryCounts count_library(std::span<const std::string> generated,
                            std::span<const std::string> training) {
  const auto train = canonical_set(training);
  LibraryCounts c;
  c.generated = generated.size();
  std::unordered_set<std::string> seen;
  for (const auto &s: generated) {
    auto canon = try_canonical(s);
    if (!canon)
      continue;
    ++c.valid;
    if (!train.contains(*canon))
      ++c.novel;
    seen.insert(std::move(*canon));
  }
  c.unique_valid = seen.size();
  return c;
}

double validity(std::span<const std::string> generated) {
  if (generated.empty())
    throw Error(Errc::kEmptyInput, "validity: no generated strings");
  const auto valid = std::count_if(generated.begin(), generated.end(),
                                   [](const std::string &s) { return chem::is_valid(s); });
  return static_cast<double>(valid) / static_cast<double>(generated.size());
}

double novelty(std::span<const std::string> generated,
               std::span<const std::string> training) {
  if (generated.empty() || training.empty())
    throw Error(Errc::kEmptyInput, "novelty: empty generated or training set");
  const auto c = count_library(generated, training);
  return static_cast<double>(c.novel) / static_cast<double>(c.generated);
}

double novelty_among_valid(std::span<const std::string> generated,
                           std::span<const std::string> training) {
  if (generated.empty() || training.empty())
    throw Error(Errc::kEmptyInput, "novelty: empty generated or training set");
  const auto c = count_library(generated, training);
  if (c.valid == 0)
    throw Error(Errc::kNoValidMolecules, "novelty: no valid molecules");
  return static_cast<double>(c.novel) / static_cast<double>(c.valid);
}

double uniqueness(std::span<const std::string> generated) {
  const auto c = count_library(generated, {});
  if (c.valid == 0)
    throw Error(Errc::kNoValidMolecules, "uniqueness: no valid molecules");
  return static_cast<double>(c.unique_valid) / static_cast<double>(c.valid);
}

double mean_tanimoto(std::span<const std::string> set, const FingerprintOptions &fp) {
  return intra_mean(fingerprints(set, fp));
}

double mean_tanimoto(std::span<const std::string> a, std::span<const std::string> b,
                     const FingerprintOptions &fp) {
  return inter_mean(fingerprints(a, fp), fingerprints(b, fp));
}

std::size_t Histogram::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t { 0 });
}

StructuralProfile structural_profile(std::span<const std::string> molecules,
                                     double bin_width) {
  if (molecules.empty())
    throw Error(Errc::kEmptyInput, "structural_profile: no molecules");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width))
    throw Error(Errc::kBadConfig, "structural_profile: bin width must be positive");
  StructuralProfile p;
  for (const auto g: chem::kAllGroups)
    p.group_counts[std::string(chem::group_name(g))] = 0;
  std::vector<std::size_t> bins;
  for (std::size_t i = 0; i < molecules.size(); ++i) {
    if (!chem::is_valid(molecules[i]))
      throw Error(Errc::kInvalidMolecule, "invalid molecule '" + molecules[i] + "'", i);
    const auto d = chem::descriptors(chem::parse(molecules[i]));
    const auto bin = static_cast<std::size_t>(std::floor(d.molecular_weight / bin_width));
    if (bin >= bins.size())
      bins.resize(bin + 1, 0);
    ++bins[bin];
    ++p.ring_counts[d.ring_count];
    for (const auto &[name, count]: d.group_counts)
      p.group_counts[name] += static_cast<std::size_t>(count);
  }
  p.molecular_weight.counts = std::move(bins);
  for (std::size_t k = 0; k <= p.molecular_weight.counts.size(); ++k)
    p.molecular_weight.edges.push_back(static_cast<double>(k) * bin_width);
  return p;
}

Direction parse_direction(std::string_view s) {
  if (s == ">")
    return Direction::kGreater;
  if (s == ">=")
    return Direction::kGreaterEqual;
  if (s == "<")
    return Direction::kLess;
  if (s == "<=")
    return Direction::kLessEqual;
  throw Error(Errc::kBadConfig, "unknown filter direction '" + std::string(s) + "'");
}

std::string_view direction_symbol(Direction d) noexcept {
  switch (d) {
  case Direction::kGreater: return ">";
  case Direction::kGreaterEqual: return ">=";
  case Direction::kLess: return "<";
  case Direction::kLessEqual: return "<=";
  }
  return "?";
}

std::vector<Candidate> filter_by_property(std::span<const std::string> molecules,
                                          std::span<const PropertyVector> predictions,
                                          std::string_view target, double threshold,
                                          Direction direction) {
  const int t = target_index(target);
  if (molecules.size() != predictions.size())
    throw Error(Errc::kLengthMismatch,
                "filter: " + std::to_string(molecules.size()) + " molecules but " +
                  std::to_string(predictions.size()) + " predictions");
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < molecules.size(); ++i)
    if (passes(predictions[i][t], threshold, direction))
      out.push_back({ molecules[i], predictions[i] });
  return out;
}

std::vector<PropertySummary> summarize(std::span<const PropertyVector> values) {
  std::vector<PropertySummary> out;
  if (values.empty())
    return out;
  const double n = static_cast<double>(values.size());
  for (int t = 0; t < kTargetCount; ++t) {
    std::vector<double> col;
    col.reserve(values.size());
    for (const auto &v: values)
      col.push_back(v[t]);
    PropertySummary s;
    s.target = std::string(kTargetNames[t]);
    s.n = values.size();
    s.mean = sorted_sum(col) / n;
    std::vector<double> dev;
    dev.reserve(col.size());
    for (const double x: col)
      dev.push_back((x - s.mean) * (x - s.mean));
    s.stddev = std::sqrt(sorted_sum(dev) / n);
    s.min = col.front();
    s.max = col.back();
    out.push_back(std::move(s));
  }
  return out;
}

EvalReport evaluate(std::span<const std::string> generated,
                    std::span<const std::string> training,
                    std::span<const PropertyVector> predictions,
                    const EvalOptions &options) {
  if (generated.empty() || training.empty())
    throw Error(Errc::kEmptyInput, "evaluate: empty generated or training set");
  EvalReport r;
  r.counts = count_library(generated, training);
  const auto &c = r.counts;
  r.validity = static_cast<double>(c.valid) / static_cast<double>(c.generated);
  r.novelty = static_cast<double>(c.novel) / static_cast<double>(c.generated);
  if (c.valid > 0) {
    r.novelty_among_valid = static_cast<double>(c.novel) / static_cast<double>(c.valid);
    r.uniqueness = static_cast<double>(c.unique_valid) / static_cast<double>(c.valid);
  }

  std::vector<std::string> valid;
  for (const auto &s: generated)
    if (chem::is_valid(s))
      valid.push_back(s);
  std::vector<std::string> valid_training;
  for (const auto &s: training)
    if (chem::is_valid(s))
      valid_training.push_back(s);

  if (!predictions.empty() && predictions.size() != valid.size())
    throw Error(Errc::kLengthMismatch,
                "evaluate: " + std::to_string(predictions.size()) +
                  " predictions for " + std::to_string(valid.size()) + " valid molecules");

  if (!valid.empty()) {
    const auto fps = fingerprints(valid, options.fingerprint);
    if (fps.size() >= 2)
      r.intra_tanimoto = intra_mean(fps);
    if (!valid_training.empty())
      r.tanimoto_vs_training = inter_mean(fps, fingerprints(valid_training, options.fingerprint));
    r.profile = structural_profile(valid, options.mw_bin_width);
  }
  r.properties = summarize(predictions);
  return r;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  json j;
  j["counts"] = {
    { "generated", counts.generated },
    { "valid", counts.valid },
    { "novel", counts.novel },
    { "unique_valid", counts.unique_valid },
  };
  j["validity"] = number(validity);
  j["novelty"] = number(novelty);
  j["novelty_among_valid"] = number(novelty_among_valid);
  j["uniqueness"] = number(uniqueness);
  j["intra_tanimoto"] = intra_tanimoto ? number(*intra_tanimoto) : json(nullptr);
  j["tanimoto_vs_training"] =
    tanimoto_vs_training ? number(*tanimoto_vs_training) : json(nullptr);
  j["molecular_weight_histogram"] = {
    { "edges", profile.molecular_weight.edges },
    { "counts", profile.molecular_weight.counts },
  };
  json rings = json::object();
  for (const auto &[k, v]: profile.ring_counts)
    rings[std::to_string(k)] = v;
  j["ring_count_histogram"] = rings;
  json groups = json::object();
  for (const auto &[k, v]: profile.group_counts)
    groups[k] = v;
  j["functional_groups"] = groups;
  json props = json::array();
  for (const auto &p: properties)
    props.push_back({ { "target", p.target }, { "n", p.n }, { "mean", number(p.mean) },
                      { "stddev", number(p.stddev) }, { "min", number(p.min) },
                      { "max", number(p.max) } });
  j["properties"] = props;
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  auto row = [&out](std::string_view section, std::string_view key, const std::string &value) {
    out << section << ',' << key << ',' << value << '\n';
  };
  auto opt = [](const std::optional<double> &v) { return v ? format_double(*v) : std::string(); };
  out << "section,key,value\n";
  row("counts", "generated", std::to_string(counts.generated));
  row("counts", "valid", std::to_string(counts.valid));
  row("counts", "novel", std::to_string(counts.novel));
  row("counts", "unique_valid", std::to_string(counts.unique_valid));
  row("metric", "validity", format_double(validity));
  row("metric", "novelty", format_double(novelty));
  row("metric", "novelty_among_valid", format_double(novelty_among_valid));
  row("metric", "uniqueness", format_double(uniqueness));
  row("metric", "intra_tanimoto", opt(intra_tanimoto));
  row("metric", "tanimoto_vs_training", opt(tanimoto_vs_training));
  const auto &h = profile.molecular_weight;
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    row("mw_histogram", format_double(h.edges[k]), std::to_string(h.counts[k]));
  for (const auto &[k, v]: profile.ring_counts)
    row("ring_histogram", std::to_string(k), std::to_string(v));
  for (const auto &[k, v]: profile.group_counts)
    row("functional_group", k, std::to_string(v));
  for (const auto &p: properties) {
    // Target names contain no commas; mean, stddev, min, max per target.
    row("property_mean", p.target, format_double(p.mean));
    row("property_stddev", p.target, format_double(p.stddev));
    row("property_min", p.target, format_double(p.min));
    row("property_max", p.target, format_double(p.max));
  }
  return out.str();
}

}  // namespace hemgen::metrics
