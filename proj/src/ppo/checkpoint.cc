#include "sotransfer/ppo/checkpoint.h"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sotransfer::ppo {

using nlohmann::json;

json ToJson(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec VecFromJson(const json& j) {
  Require(j.is_array(), "checkpoint: expected an array of numbers");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json ToJson(const nn::Mlp& net) {
  json layers = json::array();
  for (int l = 0; l < net.NumLayers(); ++l) {
    const Mat& w = net.weights[l];
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"w", ToJson(Eigen::Map<const Vec>(w.data(), w.size()))},
                      {"b", ToJson(net.biases[l])}});
  }
  return {{"layer_sizes", net.layer_sizes}, {"layers", layers}};
}

nn::Mlp MlpFromJson(const json& j) {
  nn::Mlp net = nn::ZeroMlp(j.at("layer_sizes").get<std::vector<int>>());
  const json& layers = j.at("layers");
  Require(static_cast<int>(layers.size()) == net.NumLayers(),
          "checkpoint: layer count mismatch");
  for (int l = 0; l < net.NumLayers(); ++l) {
    const Vec w = VecFromJson(layers[l].at("w"));
    Require(w.size() == net.weights[l].size(), "checkpoint: weight shape mismatch");
    net.weights[l] = Eigen::Map<const Mat>(w.data(), net.weights[l].rows(),
                                           net.weights[l].cols());
    net.biases[l] = VecFromJson(layers[l].at("b"));
  }
  net.Validate();
  return net;
}

json ToJson(const nn::RunningNormalizer& n) {
  return {{"mean", ToJson(n.mean)}, {"var", ToJson(n.var)},
          {"count", n.count}, {"clip", n.clip}};
}

nn::RunningNormalizer NormalizerFromJson(const json& j) {
  nn::RunningNormalizer n;
  n.mean = VecFromJson(j.at("mean"));
  n.var = VecFromJson(j.at("var"));
  n.count = j.at("count").get<double>();
  n.clip = j.at("clip").get<double>();
  return n;
}

json ToJson(const ActorCritic& ac) {
  return {{"actor", ToJson(ac.actor)},
          {"log_std", ToJson(ac.head.log_std)},
          {"critic", ToJson(ac.critic)},
          {"normalizer", ToJson(ac.normalizer)},
          {"return_stats", ToJson(ac.return_stats)}};
}

ActorCritic ActorCriticFromJson(const json& j) {
  ActorCritic ac;
  ac.actor = MlpFromJson(j.at("actor"));
  ac.head.log_std = VecFromJson(j.at("log_std"));
  ac.critic = MlpFromJson(j.at("critic"));
  ac.normalizer = NormalizerFromJson(j.at("normalizer"));
  ac.return_stats = NormalizerFromJson(j.at("return_stats"));
  ac.Validate();
  return ac;
}

std::uint64_t Fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HexHash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void WriteJsonFile(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw RuntimeFailure("write failed: " + path);
}

json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json HeaderToJson(const CheckpointHeader& h) {
  return {{"version", h.version},
          {"policy_kind", h.policy_kind},
          {"config_hash", h.config_hash},
          {"extra", h.extra.is_null() ? json::object() : h.extra}};
}

CheckpointHeader HeaderFromJson(const json& j) {
  CheckpointHeader h;
  h.version = j.at("version").get<int>();
  Require(h.version == kCheckpointVersion,
          "checkpoint: version " + std::to_string(h.version) + " unsupported (expected " +
              std::to_string(kCheckpointVersion) + ")");
  h.policy_kind = j.at("policy_kind").get<std::string>();
  h.config_hash = j.at("config_hash").get<std::string>();
  h.extra = j.value("extra", json::object());
  return h;
}

void WriteTrainingCsv(const std::string& path, const std::vector<IterationLog>& log) {
  std::ofstream out(path);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << "iteration,steps,episodes,mean_return,policy_loss,value_loss,entropy,"
         "approx_kl,clip_fraction,grad_norm\n";
  out.precision(10);
  for (const IterationLog& l : log) {
    out << l.iteration << ',' << l.total_steps << ',' << l.episodes << ','
        << l.mean_return << ',' << l.stats.policy_loss << ',' << l.stats.value_loss
        << ',' << l.stats.entropy << ',' << l.stats.approx_kl << ','
        << l.stats.clip_fraction << ',' << l.stats.grad_norm << '\n';
  }
}

}  // namespace sotransfer::ppo
