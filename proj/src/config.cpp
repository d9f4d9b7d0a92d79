#include "mpmab/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "mpmab/instances.hpp"

namespace mpmab {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) bad(path + "." + key, "missing");
  return *it;
}

int64_t as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "must be an integer");
  return j.get<int64_t>();
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "must be a number");
  return j.get<double>();
}

std::vector<double> as_nums(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "must be an array of numbers");
  std::vector<double> out;
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(as_num(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

UtilityMatrix parse_instance(const json& j, std::string* name, bool* per_seed,
                             const std::string& path) {
  if (!j.is_object()) bad(path, "must be an object");
  if (auto it = j.find("builtin"); it != j.end()) {
    if (!it->is_string()) bad(path + ".builtin", "must be a string");
    *name = it->get<std::string>();
    return builtin_instance(*name);
  }
  if (auto it = j.find("random"); it != j.end()) {
    const json& r = *it;
    int K = static_cast<int>(as_int(need(r, "K", path + ".random"), path + ".random.K"));
    int M = static_cast<int>(as_int(need(r, "M", path + ".random"), path + ".random.M"));
    auto seed = static_cast<uint64_t>(
        as_int(need(r, "seed", path + ".random"), path + ".random.seed"));
    if (K < 1 || M < 1 || M > K) bad(path + ".random", "need 1 <= M <= K");
    *name = "random";
    return random_instance(K, M, seed);
  }
  if (auto it = j.find("random_each"); it != j.end()) {
    // fresh i.i.d. instance per run seed, for final-regret histograms
    const json& r = *it;
    int K = static_cast<int>(
        as_int(need(r, "K", path + ".random_each"), path + ".random_each.K"));
    int M = static_cast<int>(
        as_int(need(r, "M", path + ".random_each"), path + ".random_each.M"));
    if (K < 1 || M < 1 || M > K) bad(path + ".random_each", "need 1 <= M <= K");
    *name = "random_each";
    *per_seed = true;
    UtilityMatrix mu;
    mu.K = K;
    mu.M = M;
    mu.mu.assign(static_cast<size_t>(K) * M, 0.0);
    return mu;
  }
  if (auto it = j.find("matrix"); it != j.end()) {
    if (!it->is_array() || it->empty()) bad(path + ".matrix", "must be a nonempty array of rows");
    UtilityMatrix mu;
    mu.M = static_cast<int>(it->size());
    for (size_t m = 0; m < it->size(); ++m) {
      auto row = as_nums((*it)[m], path + ".matrix[" + std::to_string(m) + "]");
      if (m == 0) mu.K = static_cast<int>(row.size());
      if (static_cast<int>(row.size()) != mu.K)
        bad(path + ".matrix", "rows must have equal length");
      for (size_t k = 0; k < row.size(); ++k) {
        if (row[k] < 0.0 || row[k] > 1.0)
          bad(path + ".matrix[" + std::to_string(m) + "][" + std::to_string(k) + "]",
              "must lie in [0, 1]");
        mu.mu.push_back(row[k]);
      }
    }
    if (mu.M > mu.K) bad(path + ".matrix", "more players than arms");
    *name = "matrix";
    return mu;
  }
  bad(path, "must contain builtin, random, random_each or matrix");
}

Reward parse_reward(const json& j, int M, const std::string& path) {
  if (!j.is_object()) bad(path, "must be an object");
  const json& kj = need(j, "kind", path);
  if (!kj.is_string()) bad(path + ".kind", "must be a string");
  const std::string kind = kj.get<std::string>();
  if (kind == "linear") return Reward::linear(M);
  if (kind == "proportional_fairness") {
    std::vector<double> w(static_cast<size_t>(M), 1.0);
    if (auto it = j.find("weights"); it != j.end()) {
      w = as_nums(*it, path + ".weights");
      if (static_cast<int>(w.size()) != M)
        bad(path + ".weights", "needs one weight per player");
    }
    double eps = 0.01;
    if (auto it = j.find("epsilon"); it != j.end())
      eps = as_num(*it, path + ".epsilon");
    if (eps <= 0.0) bad(path + ".epsilon", "must be > 0");
    return Reward::proportional_fairness(std::move(w), eps);
  }
  if (kind == "minimal") return Reward::minimal(M);
  if (kind == "threshold") {
    auto phis = as_nums(need(j, "phis", path), path + ".phis");
    if (static_cast<int>(phis.size()) != M)
      bad(path + ".phis", "needs one threshold per player");
    return Reward::threshold(std::move(phis));
  }
  if (kind == "video_quality") {
    const json& uj = need(j, "utilities", path);
    if (!uj.is_array() || static_cast<int>(uj.size()) != M)
      bad(path + ".utilities", "needs one utility curve per player");
    std::vector<PiecewiseLinear> utils;
    for (size_t m = 0; m < uj.size(); ++m) {
      const std::string up = path + ".utilities[" + std::to_string(m) + "]";
      PiecewiseLinear u;
      u.x = as_nums(need(uj[m], "x", up), up + ".x");
      u.y = as_nums(need(uj[m], "y", up), up + ".y");
      utils.push_back(std::move(u));
    }
    return Reward::video_quality(std::move(utils));
  }
  if (kind == "top_l") {
    int L = static_cast<int>(as_int(need(j, "l", path), path + ".l"));
    if (L < 1 || L > M) bad(path + ".l", "need 1 <= l <= players");
    return Reward::top_l(M, L);
  }
  if (kind == "max_min") return Reward::max_min(M);
  bad(path + ".kind", "unknown reward kind '" + kind + "'");
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid json: ") + e.what());
  }
  if (!j.is_object()) bad("config", "must be an object");

  ExperimentConfig cfg;
  cfg.instance = parse_instance(need(j, "instance", "config"),
                                &cfg.instance_name, &cfg.instance_per_seed,
                                "config.instance");

  cfg.reward = parse_reward(need(j, "reward", "config"), cfg.instance.M,
                            "config.reward");

  const json& aj = need(j, "algorithms", "config");
  if (!aj.is_array() || aj.empty())
    bad("config.algorithms", "must be a nonempty array");
  for (size_t i = 0; i < aj.size(); ++i) {
    const std::string ap = "config.algorithms[" + std::to_string(i) + "]";
    if (!aj[i].is_string()) bad(ap, "must be a string");
    const std::string a = aj[i].get<std::string>();
    if (a != "beacon" && a != "cucb") bad(ap, "unknown algorithm '" + a + "'");
    cfg.algorithms.push_back(a);
  }

  cfg.horizon = as_int(need(j, "horizon", "config"), "config.horizon");
  if (cfg.horizon < 1) bad("config.horizon", "must be >= 1");

  const json& sj = need(j, "seeds", "config");
  if (sj.is_array()) {
    for (size_t i = 0; i < sj.size(); ++i)
      cfg.seeds.push_back(static_cast<uint64_t>(
          as_int(sj[i], "config.seeds[" + std::to_string(i) + "]")));
  } else if (sj.is_object()) {
    int64_t count = as_int(need(sj, "count", "config.seeds"), "config.seeds.count");
    int64_t base = 1;
    if (auto it = sj.find("base"); it != sj.end())
      base = as_int(*it, "config.seeds.base");
    if (count < 1) bad("config.seeds.count", "must be >= 1");
    for (int64_t s = 0; s < count; ++s)
      cfg.seeds.push_back(static_cast<uint64_t>(base + s));
  } else {
    bad("config.seeds", "must be an array or {count, base}");
  }

  if (auto it = j.find("oracle"); it != j.end()) {
    const json& oj = *it;
    if (!oj.is_object()) bad("config.oracle", "must be an object");
    const json& kj = need(oj, "kind", "config.oracle");
    if (!kj.is_string()) bad("config.oracle.kind", "must be a string");
    const std::string kind = kj.get<std::string>();
    if (kind == "exact") {
      cfg.oracle.kind = OracleConfig::Kind::exact;
    } else if (kind == "approx") {
      cfg.oracle.kind = OracleConfig::Kind::approx;
      cfg.oracle.alpha = as_num(need(oj, "alpha", "config.oracle"), "config.oracle.alpha");
      cfg.oracle.beta = as_num(need(oj, "beta", "config.oracle"), "config.oracle.beta");
      if (cfg.oracle.alpha <= 0.0 || cfg.oracle.alpha > 1.0)
        bad("config.oracle.alpha", "must lie in (0, 1]");
      if (cfg.oracle.beta <= 0.0 || cfg.oracle.beta > 1.0)
        bad("config.oracle.beta", "must lie in (0, 1]");
    } else {
      bad("config.oracle.kind", "unknown oracle kind '" + kind + "'");
    }
  }

  if (auto it = j.find("sample_stride"); it != j.end()) {
    cfg.sample_stride = as_int(*it, "config.sample_stride");
    if (cfg.sample_stride < 1) bad("config.sample_stride", "must be >= 1");
  }

  if (auto it = j.find("dumps"); it != j.end()) {
    const json& dj = *it;
    if (!dj.is_object()) bad("config.dumps", "must be an object");
    auto flag = [&](const char* key, bool* out) {
      if (auto f = dj.find(key); f != dj.end()) {
        if (!f->is_boolean()) bad(std::string("config.dumps.") + key, "must be a boolean");
        *out = f->get<bool>();
      }
    };
    flag("csv", &cfg.dumps.csv);
    flag("binary", &cfg.dumps.binary);
    flag("epochs", &cfg.dumps.epochs);
    flag("wire", &cfg.dumps.wire);
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mpmab
