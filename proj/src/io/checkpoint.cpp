#include "svsnn/io/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "svsnn/baseline/mlp_model.hpp"
#include "svsnn/error.hpp"
#include "svsnn/model/svsnn_model.hpp"
#include "svsnn/numerics/random.hpp"

namespace svsnn::io {

namespace {

constexpr char kMagic[8] = {'S', 'V', 'S', 'N', 'N', 'C', 'K', '1'};

template <class U>
void put(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <class U>
U get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(U) > in.size()) throw CheckpointError("checkpoint truncated at byte " + std::to_string(pos));
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(U);
  return v;
}

std::uint64_t checksum(const std::string& bytes, std::size_t from, std::size_t len) {
  return numerics::fnv1a64(std::string_view(bytes).substr(from, len));
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const std::string header = ck.header.dump();
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  put<std::uint64_t>(out, ck.params.size());
  const std::size_t start = out.size();
  for (double d : ck.params) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(d));
  put<std::uint64_t>(out, checksum(out, start, out.size() - start));
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw CheckpointError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < sizeof(kMagic) || std::memcmp(in.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint (bad magic)");
  }
  std::size_t pos = sizeof(kMagic);
  const auto version = get<std::uint32_t>(in, pos);
  if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto hlen = get<std::uint32_t>(in, pos);
  if (pos + hlen > in.size()) throw CheckpointError("checkpoint header truncated");
  Checkpoint ck;
  try {
    ck.header = nlohmann::json::parse(in.substr(pos, hlen));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  pos += hlen;
  const auto count = get<std::uint64_t>(in, pos);
  if (count > (in.size() - pos) / 8) throw CheckpointError("checkpoint parameter block truncated");
  const std::size_t start = pos;
  ck.params.resize(count);
  for (auto& d : ck.params) d = std::bit_cast<double>(get<std::uint64_t>(in, pos));
  const std::uint64_t want = checksum(in, start, pos - start);
  if (get<std::uint64_t>(in, pos) != want) throw CheckpointError("checkpoint checksum mismatch");
  if (pos != in.size()) throw CheckpointError("trailing bytes after checkpoint");
  return ck;
}

nlohmann::json describe_model(const model::FieldModel& m) {
  if (const auto* s = dynamic_cast<const model::SvSnnModel*>(&m)) {
    const auto& c = s->config();
    return {{"kind", "svsnn"}, {"modes", c.modes}, {"k", c.k}, {"temporal", c.temporal}, {"fields", c.fields}};
  }
  if (const auto* b = dynamic_cast<const baseline::MlpModel*>(&m)) {
    return {{"kind", "baseline"},
            {"widths", b->shape().widths()},
            {"spatial_dim", b->spatial_dim()},
            {"temporal", b->temporal()}};
  }
  throw InvalidInput("describe_model: unsupported model kind " + m.kind());
}

std::unique_ptr<model::FieldModel> build_model(const nlohmann::json& d) {
  try {
    const std::string kind = d.at("kind");
    if (kind == "svsnn") {
      model::SvSnnConfig cfg{d.at("modes").get<int>(), d.at("k").get<std::vector<int>>(), d.at("temporal").get<bool>(),
                             d.at("fields").get<int>()};
      return std::make_unique<model::SvSnnModel>(cfg);
    }
    if (kind == "baseline") {
      return std::make_unique<baseline::MlpModel>(d.at("widths").get<std::vector<int>>(), d.at("spatial_dim").get<int>(),
                                                  d.at("temporal").get<bool>());
    }
    throw CheckpointError("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("bad model description: ") + e.what());
  }
}

Checkpoint make_checkpoint(const model::FieldModel& m, nlohmann::json extra) {
  Checkpoint ck;
  ck.header = std::move(extra);
  ck.header["model"] = describe_model(m);
  ck.params.assign(m.params().begin(), m.params().end());
  return ck;
}

std::unique_ptr<model::FieldModel> restore_model(const Checkpoint& ck) {
  if (!ck.header.contains("model")) throw CheckpointError("checkpoint header has no model description");
  auto m = build_model(ck.header["model"]);
  if (m->parameter_count() != ck.params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ck.params.size()) + " parameters, model expects " +
                          std::to_string(m->parameter_count()));
  }
  std::copy(ck.params.begin(), ck.params.end(), m->params().begin());
  return m;
}

}  // namespace svsnn::io
