#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "treco/experiment.hpp"

namespace treco {

using json = nlohmann::json;

/// Dense tensors: {"shape": [...], "values": [... co-lexicographic ...]}.
json dense_to_json(const DenseTensor& u);
DenseTensor dense_from_json(const json& j);

/// Tucker: shape, ranks, flat core (co-lexicographic), factors as
/// column-major flats, per-mode sigma.
json tucker_to_json(const TuckerTensor& t);
TuckerTensor tucker_from_json(const json& j);

/// TT: shape, ranks, flat cores (co-lexicographic (r_{i-1}, n_i, r_i)),
/// per-bond sigma when present.
json tt_to_json(const TTTensor& t);
TTTensor tt_from_json(const json& j);

/// Maps serialize as seed + parameters only; the matrix or index set is
/// regenerated on load.
json map_to_json(const MeasurementMap& map);
std::unique_ptr<MeasurementMap> map_from_json(const json& j);

json report_to_json(const RecoveryReport& rep);

json spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const json& j);

json trial_to_json(const TrialRecord& rec);

/// Sweep summary: spec echo, per-row statistics with +-2 sigma binomial
/// bands, pct_max / pct_min.
json sweep_summary_to_json(const ExperimentSpec& spec, const SweepResult& result);

json probe_summary_to_json(const ProbeSpec& spec, const ProbeResult& result);

json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const json& j);
void save_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace treco
