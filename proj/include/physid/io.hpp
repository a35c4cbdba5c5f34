#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "physid/excite.hpp"
#include "physid/identify.hpp"
#include "physid/model.hpp"
#include "physid/simulate.hpp"

namespace physid {

// Insertion-ordered so that emitted files are stable and readable.
using Json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Names, limits and the 13N parameter vector.
Json model_summary(const RobotModel& model);

Json to_json(const LinkInertialParams& p);
LinkInertialParams link_params_from_json(const Json& j);

Json to_json(const ParamVector& p);
ParamVector param_vector_from_json(const Json& j);

Json to_json(const FourierTrajectory& t);
FourierTrajectory trajectory_from_json(const Json& j);

Json to_json(const InformationValue& v);
Json to_json(const ConstraintRecord& r);
Json to_json(const DesignReport& r);
Json to_json(const FeasibilityReport& r);
Json to_json(const SubspaceReport& s);
Json to_json(const std::vector<BarrierStage>& trace);
Json to_json(const IdentificationResult& r);
Json to_json(const PayloadResult& r);
Json to_json(const ErrorMetrics& m);
Json to_json(const NoiseSpec& n);
NoiseSpec noise_from_json(const Json& j);

Json to_json(const std::vector<BaseParamSet>& sets);
std::vector<BaseParamSet> base_param_sets_from_json(const Json& j);

/// Header `t,q_*,qd_*,qdd_*`.
void write_trajectory_csv(std::ostream& out, const FourierTrajectory& traj, double rate);

/// Throws Error when the file cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
/// Throws ParseError on malformed JSON.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace physid
