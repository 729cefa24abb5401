#pragma once

#include <string>

#include <json.hpp>

#include "folsim/ensemble.hpp"

namespace folsim {

// Checkpoint document, version 1. Plain JSON; every double is stored as the 16 hex
// digits of its IEEE-754 bytes in little-endian order so that resume is bit-exact.
//   format      "folsim-checkpoint"
//   version     1
//   byte_order  "little-endian"
//   foliation   foliation description document (see foliation_io.hpp)
//   config      run configuration
//   extra       caller data (output locations and the like)
//   step        round barrier reached by every unfinished path
//   paths       one object per path, in path-id order
inline constexpr int kCheckpointVersion = 1;

std::string hex_double(double v);
double parse_hex_double(const std::string& s);

nlohmann::json config_to_json(const RunConfig& cfg);
// RunConfig::spec of the result is left null.
RunConfig config_from_json(const nlohmann::json& j);

nlohmann::json path_state_to_json(const PathState& st);
PathState path_state_from_json(const nlohmann::json& j);

struct Checkpoint {
    nlohmann::json foliation;
    RunConfig config;
    EnsembleState state;
    nlohmann::json extra;
};

nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

// Written to a temporary file and renamed into place.
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace folsim
