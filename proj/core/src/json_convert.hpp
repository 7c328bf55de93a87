// Private JSON conversions shared by the serialization code. Not installed.
#ifndef RICHPREF_SRC_JSON_CONVERT_HPP
#define RICHPREF_SRC_JSON_CONVERT_HPP

#include <filesystem>
#include <string>

#include <json.hpp>

#include "richpref/belief.hpp"
#include "richpref/observation.hpp"
#include "richpref/querygen.hpp"
#include "richpref/simuser.hpp"
#include "richpref/world.hpp"

namespace richpref::json_io {

using nlohmann::json;

// JSON has no infinities; they travel as the strings "inf" / "-inf".
json encode_real(double v);
double decode_real(const json& j);

json to_json(const CarState& s);
CarState car_state_from(const json& j);

json to_json(const Control& u);
Control control_from(const json& j);

json to_json(const Environment& env);
Environment environment_from(const json& j);

json to_json(const FeatureVector& v);
FeatureVector feature_vector_from(const json& j);

json to_json(const Trajectory& traj);
Trajectory trajectory_from(const json& j);

json to_json(const WorldConfig& w);
WorldConfig world_config_from(const json& j);

json to_json(const OptimizerConfig& o);
OptimizerConfig optimizer_config_from(const json& j);

json to_json(const Answer& a);
Answer answer_from(const json& j);

json to_json(const RationalityParams& p);
RationalityParams rationality_from(const json& j);

json to_json(const AnswerLog& log);
AnswerLog answer_log_from(const json& j);

json to_json(const Belief& b);
Belief belief_from(const json& j);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// Parses text, mapping parse and type errors to Error(Format).
json parse(const std::string& text);

/// Throws Format unless j["schema"] == expected.
void expect_schema(const json& j, const char* expected);

}  // namespace richpref::json_io

#endif  // RICHPREF_SRC_JSON_CONVERT_HPP
