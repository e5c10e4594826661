#ifndef SOTRANSFER_PPO_CHECKPOINT_H_
#define SOTRANSFER_PPO_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sotransfer/nn/mlp.h"
#include "sotransfer/nn/normalizer.h"
#include "sotransfer/ppo/actor_critic.h"
#include "sotransfer/ppo/ppo.h"

namespace sotransfer::ppo {

inline constexpr int kCheckpointVersion = 1;

// Doubles are written with full round-trip precision.
nlohmann::json ToJson(const Vec& v);
Vec VecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const nn::Mlp& net);
nn::Mlp MlpFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const nn::RunningNormalizer& n);
nn::RunningNormalizer NormalizerFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ActorCritic& ac);
ActorCritic ActorCriticFromJson(const nlohmann::json& j);

// 64-bit FNV-1a, used for config hashes.
std::uint64_t Fnv1a(const std::string& text);
std::string HexHash(std::uint64_t h);

struct CheckpointHeader {
  int version = kCheckpointVersion;
  std::string policy_kind;  // "universal", "robust", "hist", "uposi", "oracle"
  std::string config_hash;
  nlohmann::json extra;  // kind-specific fields, e.g. history length
};

// {"header": {...}, "policy": {...}, "osi": optional}
void WriteJsonFile(const std::string& path, const nlohmann::json& j);
nlohmann::json ReadJsonFile(const std::string& path);
nlohmann::json HeaderToJson(const CheckpointHeader& h);
// Throws ConfigError on a version mismatch.
CheckpointHeader HeaderFromJson(const nlohmann::json& j);

// Training curve rows: iteration, steps, episodes, mean return, losses.
void WriteTrainingCsv(const std::string& path, const std::vector<IterationLog>& log);

}  // namespace sotransfer::ppo

#endif  // SOTRANSFER_PPO_CHECKPOINT_H_
