#include "s2r/train/checkpoint.hpp"

#include <fstream>

#include "s2r/core/error.hpp"

namespace fs = std::filesystem;

namespace s2r::train {

void save_checkpoint(const fs::path& dir, const CheckpointMeta& meta,
                     const std::map<std::string, torch::nn::Module*>& modules,
                     const std::map<std::string, torch::optim::Optimizer*>& optimizers) {
  fs::path tmp = dir;
  tmp += ".tmp";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  for (const auto& [name, module] : modules) {
    torch::serialize::OutputArchive archive;
    module->save(archive);
    archive.save_to((tmp / (name + ".pt")).string());
  }
  for (const auto& [name, opt] : optimizers) {
    torch::serialize::OutputArchive archive;
    opt->save(archive);
    archive.save_to((tmp / (name + "_optim.pt")).string());
  }
  nlohmann::json j{{"version", meta.version}, {"kind", meta.kind},  {"step", meta.step},
                   {"seed", meta.seed},       {"config", meta.config}};
  std::ofstream(tmp / "meta.json") << j.dump(2) << '\n';
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

CheckpointMeta read_checkpoint_meta(const fs::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw ConfigError("missing checkpoint: " + dir.string());
  CheckpointMeta meta;
  try {
    auto j = nlohmann::json::parse(in);
    meta.version = j.at("version").get<int>();
    meta.kind = j.at("kind").get<std::string>();
    meta.step = j.at("step").get<std::int64_t>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed checkpoint metadata in " + dir.string() + ": " + e.what());
  }
  if (meta.version > kCheckpointVersion) {
    throw ConfigError("checkpoint version " + std::to_string(meta.version) +
                      " is newer than supported version " + std::to_string(kCheckpointVersion));
  }
  return meta;
}

void load_checkpoint(const fs::path& dir, const std::map<std::string, torch::nn::Module*>& modules,
                     const std::map<std::string, torch::optim::Optimizer*>& optimizers) {
  read_checkpoint_meta(dir);
  for (const auto& [name, module] : modules) {
    const auto file = dir / (name + ".pt");
    if (!fs::exists(file)) throw ConfigError("checkpoint lacks " + file.string());
    torch::serialize::InputArchive archive;
    archive.load_from(file.string());
    module->load(archive);
  }
  for (const auto& [name, opt] : optimizers) {
    const auto file = dir / (name + "_optim.pt");
    if (!fs::exists(file)) throw ConfigError("checkpoint lacks " + file.string());
    torch::serialize::InputArchive archive;
    archive.load_from(file.string());
    opt->load(archive);
  }
}

}  // namespace s2r::train
