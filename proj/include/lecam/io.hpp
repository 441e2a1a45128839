#pragma once

#include "lecam/convergence.hpp"
#include "lecam/coupling.hpp"
#include "lecam/deficiency.hpp"
#include "lecam/experiment.hpp"
#include "lecam/minimax.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lecam {

using Json = nlohmann::ordered_json;

class IoError : public Error {
public:
    using Error::Error;
};

Json read_json_file(const std::filesystem::path& path);
/// Two-space indent plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& value);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Numbers become labels through format_label; strings are kept.
std::vector<ParamLabel> read_labels(const Json& value);

/// `{"params": [...], "atoms": [...], "probs": [[...], ...]}`; "atoms" is
/// optional. Rows off by more than 1e-9 are rejected, the rest renormalized.
FiniteExperiment read_experiment(const Json& value);
Json to_json(const FiniteExperiment& experiment);

/// `{"actions": [...], "L": [[...]], "M": m}`, with an optional "params"
/// list naming the rows. Without it the rows follow `default_params`.
LossSpec read_loss(const Json& value, const std::vector<ParamLabel>& default_params);
Json to_json(const LossSpec& loss);

Json to_json(const Kernel& kernel);
Json to_json(const DualCertificate& certificate);
Json to_json(const DeficiencyResult& result);
Json to_json(const LeCamDistance& distance);
Json to_json(const CouplingCertificate& certificate, const Partition& partition);
Json to_json(const ConvergenceReport& report);
Json to_json(const GameResult& game, const LossSpec& loss);
Json to_json(const TransferReport& report);

/// Comma-separated labels ("-1,0,1").
std::vector<ParamLabel> split_labels(const std::string& text);
std::vector<int> split_ints(const std::string& text);

/// `rows` as CSV with a header line.
std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

} // namespace lecam
