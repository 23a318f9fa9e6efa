#include "nflow/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nflow {

using json = nlohmann::json;

namespace {

int levenshtein(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

class Reader {
 public:
  Reader(std::vector<ConfigError>& errors) : errors_(errors) {}

  void unknown_keys(const json& obj, const std::string& path,
                    const std::vector<std::string>& known) {
    if (!obj.is_object()) return;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
      std::string best;
      int best_d = 100;
      for (const auto& k : known) {
        int d = levenshtein(it.key(), k);
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      std::string msg = "unknown key '" + it.key() + "'";
      if (best_d <= 3) msg += " (did you mean '" + best + "'?)";
      errors_.push_back({path, msg});
    }
  }

  template <typename T>
  void read(const json& obj, const std::string& path, const char* key, T& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const std::exception&) {
      errors_.push_back({path + "/" + key, "wrong type"});
    }
  }

  void fail(const std::string& path, const std::string& msg) {
    errors_.push_back({path, msg});
  }

 private:
  std::vector<ConfigError>& errors_;
};

}  // namespace

RunConfig parse_config(const std::string& json_text, std::vector<ConfigError>& errors) {
  RunConfig cfg;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    errors.push_back({"", std::string("not valid JSON: ") + e.what()});
    return cfg;
  }
  if (!root.is_object()) {
    errors.push_back({"", "top level must be an object"});
    return cfg;
  }
  Reader rd(errors);
  rd.unknown_keys(root, "/",
                  {"mode", "domain", "target", "flow", "init", "schedule", "bubble",
                   "output_dir", "seed", "threads", "checkpoint_cadence"});

  std::string mode = "run";
  rd.read(root, "", "mode", mode);
  if (mode == "run") cfg.mode = RunMode::Flow;
  else if (mode == "minimize") cfg.mode = RunMode::Minimize;
  else if (mode == "bubbles") cfg.mode = RunMode::Bubbles;
  else if (mode == "check") cfg.mode = RunMode::Check;
  else rd.fail("/mode", "must be one of run|minimize|bubbles|check");

  if (root.contains("domain")) {
    const json& d = root["domain"];
    rd.unknown_keys(d, "/domain", {"kind", "dim", "resolution", "extent"});
    std::string kind = "torus";
    rd.read(d, "/domain", "kind", kind);
    if (kind == "torus") cfg.domain.kind = DomainKind::Torus;
    else if (kind == "sphere2") cfg.domain.kind = DomainKind::Sphere2;
    else rd.fail("/domain/kind", "must be torus or sphere2");
    if (cfg.domain.kind == DomainKind::Sphere2) cfg.domain.dim = 2;
    rd.read(d, "/domain", "dim", cfg.domain.dim);
    rd.read(d, "/domain", "extent", cfg.domain.extent);
    if (cfg.domain.kind == DomainKind::Sphere2 && cfg.domain.dim != 2)
      rd.fail("/domain/dim", "sphere2 domains are 2-dimensional");
    if (cfg.domain.dim < 2 || cfg.domain.dim > 4)
      rd.fail("/domain/dim", "must lie in [2,4]");
    if (!(cfg.domain.extent > 0.0)) rd.fail("/domain/extent", "must be positive");
    std::vector<int> res;
    rd.read(d, "/domain", "resolution", res);
    if (!res.empty()) {
      if (static_cast<int>(res.size()) != cfg.domain.dim)
        rd.fail("/domain/resolution", "length must equal dim");
      for (std::size_t i = 0; i < res.size() && i < 4; ++i) cfg.domain.resolution[i] = res[i];
    } else {
      rd.fail("/domain/resolution", "required");
    }
  } else {
    rd.fail("/domain", "required");
  }

  if (root.contains("target")) {
    const json& t = root["target"];
    rd.unknown_keys(t, "/target", {"kind", "m"});
    std::string kind = "sphere";
    rd.read(t, "/target", "kind", kind);
    if (kind != "sphere") rd.fail("/target/kind", "only 'sphere' targets are available");
    rd.read(t, "/target", "m", cfg.target_m);
  }

  if (root.contains("flow")) {
    const json& f = root["flow"];
    rd.unknown_keys(f, "/flow",
                    {"variant", "a", "epsilon", "p", "cfl", "dt_max", "t_end", "el_tol",
                     "max_steps", "monitor_cadence", "track_degree", "track_concentration",
                     "concentration_radius", "concentration_eps0", "snapshot_cadence"});
    std::string variant = "regularized_n";
    rd.read(f, "/flow", "variant", variant);
    if (variant == "rectified_n") cfg.flow.variant = FlowVariant::RectifiedN;
    else if (variant == "regularized_n") cfg.flow.variant = FlowVariant::RegularizedN;
    else if (variant == "minimizing_n") cfg.flow.variant = FlowVariant::MinimizingN;
    else if (variant == "p_flow") cfg.flow.variant = FlowVariant::PFlow;
    else rd.fail("/flow/variant", "must be rectified_n|regularized_n|minimizing_n|p_flow");
    rd.read(f, "/flow", "a", cfg.flow.a);
    rd.read(f, "/flow", "epsilon", cfg.flow.epsilon);
    rd.read(f, "/flow", "p", cfg.flow.p);
    rd.read(f, "/flow", "cfl", cfg.flow.cfl);
    rd.read(f, "/flow", "dt_max", cfg.flow.dt_max);
    rd.read(f, "/flow", "t_end", cfg.flow.t_end);
    rd.read(f, "/flow", "el_tol", cfg.flow.el_tol);
    rd.read(f, "/flow", "max_steps", cfg.flow.max_steps);
    rd.read(f, "/flow", "monitor_cadence", cfg.flow.monitor_cadence);
    rd.read(f, "/flow", "track_degree", cfg.flow.track_degree);
    rd.read(f, "/flow", "track_concentration", cfg.flow.track_concentration);
    rd.read(f, "/flow", "concentration_radius", cfg.flow.concentration_radius);
    rd.read(f, "/flow", "concentration_eps0", cfg.flow.concentration_eps0);
    rd.read(f, "/flow", "snapshot_cadence", cfg.flow.snapshot_cadence);
    if (cfg.flow.a < 0.0 || cfg.flow.a > 1.0) rd.fail("/flow/a", "must lie in [0,1]");
    if (!(cfg.flow.cfl > 0.0) || cfg.flow.cfl > 1.0) rd.fail("/flow/cfl", "must lie in (0,1]");
  }

  if (root.contains("init")) {
    const json& i = root["init"];
    rd.unknown_keys(i, "/init", {"kind", "k", "sigma", "center", "glue_radius", "path"});
    std::string kind = "constant";
    rd.read(i, "/init", "kind", kind);
    if (kind == "constant") cfg.init.kind = InitKind::Constant;
    else if (kind == "identity") cfg.init.kind = InitKind::Identity;
    else if (kind == "degree_k") cfg.init.kind = InitKind::DegreeK;
    else if (kind == "concentrated") cfg.init.kind = InitKind::Concentrated;
    else if (kind == "checkpoint") { /* path decides */ }
    else rd.fail("/init/kind", "must be constant|identity|degree_k|concentrated|checkpoint");
    rd.read(i, "/init", "k", cfg.init.k);
    rd.read(i, "/init", "sigma", cfg.init.sigma);
    rd.read(i, "/init", "glue_radius", cfg.init.glue_radius);
    rd.read(i, "/init", "path", cfg.init_checkpoint);
    std::vector<double> center;
    rd.read(i, "/init", "center", center);
    for (std::size_t j = 0; j < center.size() && j < 4; ++j) cfg.init.center[j] = center[j];
    if (kind == "checkpoint" && cfg.init_checkpoint.empty())
      rd.fail("/init/path", "required for checkpoint init");
  }

  if (root.contains("schedule")) {
    const json& s = root["schedule"];
    rd.unknown_keys(s, "/schedule", {"epsilons", "stage_t_end"});
    rd.read(s, "/schedule", "epsilons", cfg.schedule_epsilons);
    rd.read(s, "/schedule", "stage_t_end", cfg.stage_t_end);
  }

  if (root.contains("bubble")) {
    const json& b = root["bubble"];
    rd.unknown_keys(b, "/bubble",
                    {"x0", "R0", "eps_neck", "ratio_bound", "depth", "plateau_tol",
                     "el_tol", "rescale_res", "rescale_R_out", "body_fraction",
                     "checkpoints"});
    std::vector<double> x0;
    rd.read(b, "/bubble", "x0", x0);
    for (std::size_t j = 0; j < x0.size() && j < 4; ++j) cfg.bubble_x0[j] = x0[j];
    rd.read(b, "/bubble", "R0", cfg.bubble.R0);
    rd.read(b, "/bubble", "eps_neck", cfg.bubble.eps_neck);
    rd.read(b, "/bubble", "ratio_bound", cfg.bubble.ratio_bound);
    rd.read(b, "/bubble", "depth", cfg.bubble.depth);
    rd.read(b, "/bubble", "plateau_tol", cfg.bubble.plateau_tol);
    rd.read(b, "/bubble", "el_tol", cfg.bubble.el_tol);
    rd.read(b, "/bubble", "rescale_res", cfg.bubble.rescale_res);
    rd.read(b, "/bubble", "rescale_R_out", cfg.bubble.rescale_R_out);
    rd.read(b, "/bubble", "body_fraction", cfg.bubble.body_fraction);
    rd.read(b, "/bubble", "checkpoints", cfg.bubble_checkpoints);
  }

  rd.read(root, "", "output_dir", cfg.output_dir);
  rd.read(root, "", "seed", cfg.seed);
  rd.read(root, "", "threads", cfg.threads);
  rd.read(root, "", "checkpoint_cadence", cfg.checkpoint_cadence);
  return cfg;
}

RunConfig parse_config_file(const std::string& path, std::vector<ConfigError>& errors) {
  std::ifstream is(path);
  if (!is) {
    errors.push_back({path, "cannot open config file"});
    return {};
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), errors);
}

std::string RunConfig::canonical_json() const {
  json j;
  j["mode"] = mode == RunMode::Flow ? "run"
              : mode == RunMode::Minimize ? "minimize"
              : mode == RunMode::Bubbles ? "bubbles" : "check";
  j["domain"]["kind"] = domain.kind == DomainKind::Torus ? "torus" : "sphere2";
  j["domain"]["dim"] = domain.dim;
  j["domain"]["extent"] = domain.extent;
  for (int i = 0; i < domain.dim; ++i) j["domain"]["resolution"].push_back(domain.resolution[i]);
  j["target"]["kind"] = "sphere";
  j["target"]["m"] = target_m;
  j["flow"]["variant"] = to_string(flow.variant);
  j["flow"]["a"] = flow.a;
  j["flow"]["epsilon"] = flow.epsilon;
  j["flow"]["p"] = flow.p;
  j["flow"]["cfl"] = flow.cfl;
  j["flow"]["dt_max"] = flow.dt_max;
  j["flow"]["t_end"] = flow.t_end;
  j["flow"]["el_tol"] = flow.el_tol;
  j["flow"]["max_steps"] = flow.max_steps;
  j["flow"]["monitor_cadence"] = flow.monitor_cadence;
  j["flow"]["track_degree"] = flow.track_degree;
  j["flow"]["track_concentration"] = flow.track_concentration;
  j["flow"]["concentration_radius"] = flow.concentration_radius;
  j["flow"]["concentration_eps0"] = flow.concentration_eps0;
  j["flow"]["snapshot_cadence"] = flow.snapshot_cadence;
  j["init"]["kind"] = init.kind == InitKind::Constant ? "constant"
                      : init.kind == InitKind::Identity ? "identity"
                      : init.kind == InitKind::DegreeK ? "degree_k" : "concentrated";
  j["init"]["k"] = init.k;
  j["init"]["sigma"] = init.sigma;
  j["init"]["glue_radius"] = init.glue_radius;
  j["init"]["center"] = {init.center[0], init.center[1], init.center[2], init.center[3]};
  j["init"]["path"] = init_checkpoint;
  j["schedule"]["epsilons"] = schedule_epsilons;
  j["schedule"]["stage_t_end"] = stage_t_end;
  j["bubble"]["x0"] = {bubble_x0[0], bubble_x0[1], bubble_x0[2], bubble_x0[3]};
  j["bubble"]["R0"] = bubble.R0;
  j["bubble"]["eps_neck"] = bubble.eps_neck;
  j["bubble"]["ratio_bound"] = bubble.ratio_bound;
  j["bubble"]["depth"] = bubble.depth;
  j["bubble"]["plateau_tol"] = bubble.plateau_tol;
  j["bubble"]["el_tol"] = bubble.el_tol;
  j["bubble"]["rescale_res"] = bubble.rescale_res;
  j["bubble"]["rescale_R_out"] = bubble.rescale_R_out;
  j["bubble"]["body_fraction"] = bubble.body_fraction;
  j["bubble"]["checkpoints"] = bubble_checkpoints;
  j["output_dir"] = output_dir;
  j["seed"] = seed;
  j["threads"] = threads;
  j["checkpoint_cadence"] = checkpoint_cadence;
  return j.dump();
}

std::uint64_t RunConfig::hash() const {
  std::string s = canonical_json();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace nflow
