#pragma once

#include <string>

#include "kscore/baselines.hpp"
#include "kscore/kernel_model.hpp"

namespace kscore {

/// %.17g — shortest text that always round-trips a double exactly.
std::string format_g17(double v);

/// Kernel model JSON: {schema_version, d, beta, horizon, centers,
/// provider: {kind: "table"|"mlp", ...}}. Numbers are emitted with %.17g so
/// save/load round-trips are value-exact.
void save_model(const KernelModel& model, const std::string& path);
KernelModel load_model(const std::string& path);

/// DSM score nets share the container: {schema_version, kind: "dsm_net", ...}.
void save_dsm_net(const DsmScoreNet& net, const std::string& path);
DsmScoreNet load_dsm_net(const std::string& path);

/// Top-level "kind" of a model file ("kernel" or "dsm_net").
std::string model_file_kind(const std::string& path);

}  // namespace kscore
