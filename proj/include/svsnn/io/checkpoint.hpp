#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "svsnn/model/field_model.hpp"

namespace svsnn::io {

// Little-endian file layout:
//   0      8 bytes   magic "SVSNNCK1"
//   8      u32       format version (1)
//   12     u32       header length H
//   16     H bytes   JSON header (model description, problem, seed, ...)
//   16+H   u64       parameter count P
//   24+H   P x f64   flat parameters, IEEE-754 binary64
//   24+H+8P u64      FNV-1a 64 of the parameter bytes
struct Checkpoint {
  nlohmann::json header;
  std::vector<double> params;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// {"kind": "svsnn", "modes", "k", "temporal", "fields"} or
// {"kind": "baseline", "widths", "spatial_dim", "temporal"}.
nlohmann::json describe_model(const model::FieldModel& m);
std::unique_ptr<model::FieldModel> build_model(const nlohmann::json& description);

Checkpoint make_checkpoint(const model::FieldModel& m, nlohmann::json extra = nlohmann::json::object());
// Rebuilds the model and loads the parameters; the count must match the description.
std::unique_ptr<model::FieldModel> restore_model(const Checkpoint& ck);

}  // namespace svsnn::io
