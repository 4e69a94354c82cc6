#include "sqrdln/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace sqrdln {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void put_le(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(std::begin(bytes), std::end(bytes));
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta,
                      const ParameterList& params) {
  nlohmann::json blocks = nlohmann::json::array();
  std::size_t offset = 0;
  for (const auto* p : params) {
    blocks.push_back({{"name", p->name()},
                      {"shape", p->shape()},
                      {"constraint",
                       {{"kind", to_string(p->constraint().kind)},
                        {"dims", p->constraint().dims}}},
                      {"offset", offset},
                      {"count", p->size()}});
    offset += p->size();
  }
  const nlohmann::json header = {
      {"format", "sqrdln-checkpoint"}, {"version", 1}, {"meta", meta}, {"blocks", blocks}};
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto* p : params) {
    for (double v : p->values()) put_le<double>(out, v);
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const auto header_len = get_le<std::uint64_t>(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw std::runtime_error("checkpoint header truncated");
  const auto header = nlohmann::json::parse(text);
  if (header.value("format", "") != "sqrdln-checkpoint") {
    throw std::runtime_error("unexpected checkpoint format");
  }

  Checkpoint ckpt;
  ckpt.meta = header.at("meta");
  for (const auto& b : header.at("blocks")) {
    StoredBlock block;
    block.name = b.at("name").get<std::string>();
    block.shape = b.at("shape").get<std::vector<std::size_t>>();
    block.constraint.kind = constraint_kind_from_string(b.at("constraint").at("kind"));
    block.constraint.dims = b.at("constraint").at("dims").get<std::vector<std::size_t>>();
    const auto count = b.at("count").get<std::size_t>();
    if (count != element_count(block.shape)) {
      throw std::runtime_error("checkpoint block '" + block.name + "' count/shape mismatch");
    }
    block.values.resize(count);
    for (auto& v : block.values) v = get_le<double>(in);
    ckpt.blocks.push_back(std::move(block));
  }
  return ckpt;
}

void restore_blocks(const Checkpoint& ckpt, const ParameterList& params) {
  std::unordered_map<std::string, const StoredBlock*> by_name;
  for (const auto& b : ckpt.blocks) by_name[b.name] = &b;
  if (by_name.size() != params.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(by_name.size()) +
                             " blocks, model expects " + std::to_string(params.size()));
  }
  for (auto* p : params) {
    auto it = by_name.find(p->name());
    if (it == by_name.end()) {
      throw std::runtime_error("checkpoint is missing block '" + p->name() + "'");
    }
    if (it->second->shape != p->shape()) {
      throw std::runtime_error("checkpoint block '" + p->name() + "' has a different shape");
    }
    p->assign(it->second->values);
  }
}

}  // namespace sqrdln
