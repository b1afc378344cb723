#include "mmrl/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmrl/error.hpp"

namespace mmrl::io {

namespace {

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

/// Non-finite doubles are written as strings ("-inf"), which JSON lacks.
Json number_or_string(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

double read_number(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  throw InvalidArgument("expected a number, got " + j.dump());
}

Eigen::MatrixXd matrix_from(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw InvalidArgument("expected a nonempty 2-d array");
  Eigen::MatrixXd m(j.size(), j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != j[0].size()) throw InvalidArgument("ragged 2-d array");
    for (std::size_t c = 0; c < j[r].size(); ++c) m(r, c) = read_number(j[r][c]);
  }
  return m;
}

Eigen::VectorXd vector_from(const Json& j) {
  if (!j.is_array()) throw InvalidArgument("expected an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = read_number(j[i]);
  return v;
}

}  // namespace

Json to_json(const MomdpInstance& m) {
  const int S = m.num_states(), A = m.num_actions(), K = m.num_objectives();
  Json transition = Json::array();
  for (int s = 0; s < S; ++s) {
    Json per_action = Json::array();
    for (int a = 0; a < A; ++a) {
      Json row = Json::array();
      for (int t = 0; t < S; ++t) row.push_back(m.transition(s, a, t));
      per_action.push_back(std::move(row));
    }
    transition.push_back(std::move(per_action));
  }
  Json rewards = Json::array();
  for (int k = 0; k < K; ++k) {
    Json per_state = Json::array();
    for (int s = 0; s < S; ++s) {
      Json row = Json::array();
      for (int a = 0; a < A; ++a) row.push_back(m.reward(k, s, a));
      per_state.push_back(std::move(row));
    }
    rewards.push_back(std::move(per_state));
  }
  Json meta = {{"generator", m.meta().generator}, {"mu", m.meta().mu_rule}};
  meta["seed"] = m.meta().seed ? Json(*m.meta().seed) : Json(nullptr);
  return {{"gamma", m.gamma()}, {"mu", m.mu_data()}, {"transition", std::move(transition)},
          {"rewards", std::move(rewards)}, {"meta", std::move(meta)}};
}

MomdpInstance instance_from_json(const Json& j) {
  try {
    const auto& mu = j.at("mu");
    const auto& tr = j.at("transition");
    const auto& rw = j.at("rewards");
    const int S = static_cast<int>(mu.size());
    if (S == 0 || tr.size() != static_cast<std::size_t>(S) || tr[0].empty() || rw.empty())
      throw InvalidArgument("instance arrays have inconsistent shapes");
    const int A = static_cast<int>(tr[0].size());
    const int K = static_cast<int>(rw.size());
    std::vector<double> transition, rewards;
    for (int s = 0; s < S; ++s) {
      if (tr[s].size() != static_cast<std::size_t>(A)) throw InvalidArgument("transition has ragged action axis");
      for (int a = 0; a < A; ++a) {
        if (tr[s][a].size() != static_cast<std::size_t>(S)) throw InvalidArgument("transition row has wrong length");
        for (int t = 0; t < S; ++t) transition.push_back(tr[s][a][t].get<double>());
      }
    }
    for (int k = 0; k < K; ++k) {
      if (rw[k].size() != static_cast<std::size_t>(S)) throw InvalidArgument("rewards have wrong state axis");
      for (int s = 0; s < S; ++s) {
        if (rw[k][s].size() != static_cast<std::size_t>(A)) throw InvalidArgument("rewards have wrong action axis");
        for (int a = 0; a < A; ++a) rewards.push_back(read_number(rw[k][s][a]));
      }
    }
    MomdpInstance::Meta meta;
    if (j.contains("meta")) {
      const auto& mj = j["meta"];
      if (mj.contains("seed") && !mj["seed"].is_null()) meta.seed = mj["seed"].get<std::uint64_t>();
      meta.generator = mj.value("generator", "");
      meta.mu_rule = mj.value("mu", "");
    }
    return MomdpInstance(S, A, K, j.at("gamma").get<double>(), mu.get<std::vector<double>>(), std::move(transition),
                         std::move(rewards), std::move(meta));
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed instance JSON: ") + e.what());
  }
}

Json to_json(const Policy& policy) { return matrix_json(policy.probs); }

Json to_json(const Equilibrium& eq) {
  Json log_pi = Json::array();
  for (Eigen::Index s = 0; s < eq.log_policy_star.rows(); ++s) {
    Json row = Json::array();
    for (Eigen::Index a = 0; a < eq.log_policy_star.cols(); ++a) row.push_back(number_or_string(eq.log_policy_star(s, a)));
    log_pi.push_back(std::move(row));
  }
  Json log_w = Json::array();
  for (Eigen::Index k = 0; k < eq.log_weight_star.size(); ++k) log_w.push_back(number_or_string(eq.log_weight_star(k)));
  return {{"policy", matrix_json(eq.policy_star.probs)},
          {"log_policy", std::move(log_pi)},
          {"weight", vector_json(eq.weight_star.w)},
          {"log_weight", std::move(log_w)},
          {"value", eq.value_star},
          {"q", matrix_json(eq.q_star)},
          {"residuals", {{"policy", eq.residual_policy}, {"weight", eq.residual_weight}}},
          {"tau", eq.tau},
          {"tau_w", eq.tau_w},
          {"converged", eq.converged},
          {"method", eq.method},
          {"iterations", eq.iterations}};
}

Equilibrium equilibrium_from_json(const Json& j) {
  try {
    Equilibrium eq;
    eq.policy_star.probs = matrix_from(j.at("policy"));
    eq.log_policy_star = j.contains("log_policy") ? matrix_from(j["log_policy"])
                                                  : Eigen::MatrixXd(eq.policy_star.probs.array().log());
    eq.weight_star.w = vector_from(j.at("weight"));
    eq.log_weight_star = j.contains("log_weight") ? vector_from(j["log_weight"])
                                                  : Eigen::VectorXd(eq.weight_star.w.array().log());
    eq.value_star = j.at("value").get<double>();
    eq.q_star = matrix_from(j.at("q"));
    eq.residual_policy = j.at("residuals").at("policy").get<double>();
    eq.residual_weight = j.at("residuals").at("weight").get<double>();
    eq.tau = j.at("tau").get<double>();
    eq.tau_w = j.at("tau_w").get<double>();
    eq.converged = j.value("converged", false);
    eq.method = j.value("method", "");
    eq.iterations = j.value("iterations", 0L);
    return eq;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed equilibrium JSON: ") + e.what());
  }
}

Json to_json(const EvalReport& r) {
  return {{"v_vec", matrix_json(r.v_vec)},
          {"v_init_vec", vector_json(r.v_init_vec)},
          {"entropy_term", r.entropy_term},
          {"v_soft_vec", vector_json(r.v_soft_vec)},
          {"q_scalar", matrix_json(r.q_scalar)},
          {"occupancy", matrix_json(r.occupancy)},
          {"tau", r.tau}};
}

Json to_json(const GapReport& r) {
  Json out = {{"nash_gap", r.nash_gap}, {"exploit_learner", r.exploit_learner},
              {"exploit_adversary", r.exploit_adversary}};
  out["log_policy_gap"] = r.log_policy_gap ? Json(*r.log_policy_gap) : Json(nullptr);
  out["w_gap"] = r.w_gap ? Json(*r.w_gap) : Json(nullptr);
  out["q_gap"] = r.q_gap ? Json(*r.q_gap) : Json(nullptr);
  out["fitted_rate"] = r.fitted_rate ? Json(*r.fitted_rate) : Json(nullptr);
  return out;
}

Json to_json(const Reformulation& r) {
  return {{"weight", vector_json(r.w_opt.w)}, {"value", r.value_opt}, {"fw_gap", r.fw_gap},
          {"iterations", r.iterations}, {"converged", r.converged}};
}

Json to_json(const SolverConfig& c) {
  return {{"algorithm", to_string(c.algorithm)}, {"eval", to_string(c.eval_mode)},
          {"tau", c.tau}, {"tau_w", c.tau_w}, {"eta", c.eta}, {"lambda", c.lambda},
          {"iters", c.iters}, {"trace_every", c.trace_every}, {"record_nash_gap", c.record_nash_gap},
          {"samples", c.sampling.samples_per_pair}, {"sample_seed", c.sampling.seed}};
}

void merge_json(const Json& j, SolverConfig& c) {
  try {
    if (j.contains("algorithm")) c.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
    if (j.contains("eval")) c.eval_mode = parse_eval_mode(j["eval"].get<std::string>());
    c.tau = j.value("tau", c.tau);
    c.tau_w = j.value("tau_w", c.tau_w);
    c.eta = j.value("eta", c.eta);
    c.lambda = j.value("lambda", c.lambda);
    c.iters = j.value("iters", c.iters);
    c.trace_every = j.value("trace_every", c.trace_every);
    c.record_nash_gap = j.value("record_nash_gap", c.record_nash_gap);
    c.sampling.samples_per_pair = j.value("samples", c.sampling.samples_per_pair);
    c.sampling.seed = j.value("sample_seed", c.sampling.seed);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("malformed solver config: ") + e.what());
  }
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string instance_hash(const MomdpInstance& m) {
  Json j = to_json(m);
  j.erase("meta");
  return fnv1a_hex(j.dump());
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  if (s == "nan") return NAN;
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw InvalidArgument("bad number '" + s + "'");
  return x;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

std::string optional_field(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

}  // namespace

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  const int K = trace.num_objectives;
  out << "iter,min_value,scalar_soft_value,nash_gap,log_policy_gap,w_gap,q_gap";
  for (int k = 1; k <= K; ++k) out << ",w_" << k;
  for (int k = 1; k <= K; ++k) out << ",V_" << k;
  out << ",wall_ms\n";
  for (const auto& row : trace.rows) {
    out << row.iter << ',' << format_double(row.min_value) << ',' << format_double(row.scalar_soft_value) << ','
        << optional_field(row.nash_gap) << ',' << optional_field(row.log_policy_gap) << ','
        << optional_field(row.w_gap) << ',' << optional_field(row.q_gap);
    for (int k = 0; k < K; ++k) out << ',' << format_double(row.weight(k));
    for (int k = 0; k < K; ++k) out << ',' << format_double(row.values(k));
    out << ',' << format_double(row.wall_ms) << '\n';
  }
}

IterationTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty trace file");
  const auto header = split_csv(line);
  const std::vector<std::string> fixed = {"iter", "min_value", "scalar_soft_value", "nash_gap",
                                          "log_policy_gap", "w_gap", "q_gap"};
  if (header.size() < fixed.size() + 1 || (header.size() - fixed.size() - 1) % 2 != 0)
    throw InvalidArgument("trace header has the wrong number of columns");
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (header[i] != fixed[i]) throw InvalidArgument("trace header column " + std::to_string(i) + " is not " + fixed[i]);
  const int K = static_cast<int>((header.size() - fixed.size() - 1) / 2);
  for (int k = 0; k < K; ++k) {
    if (header[fixed.size() + k] != "w_" + std::to_string(k + 1) ||
        header[fixed.size() + K + k] != "V_" + std::to_string(k + 1))
      throw InvalidArgument("trace header has malformed weight/value columns");
  }
  if (header.back() != "wall_ms") throw InvalidArgument("trace header must end with wall_ms");

  IterationTrace trace;
  trace.num_objectives = K;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      throw InvalidArgument("trace line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
    TraceRow row;
    row.iter = static_cast<long>(parse_double(f[0]));
    row.min_value = parse_double(f[1]);
    row.scalar_soft_value = parse_double(f[2]);
    row.nash_gap = parse_optional(f[3]);
    row.log_policy_gap = parse_optional(f[4]);
    row.w_gap = parse_optional(f[5]);
    row.q_gap = parse_optional(f[6]);
    row.weight.resize(K);
    row.values.resize(K);
    for (int k = 0; k < K; ++k) {
      row.weight(k) = parse_double(f[7 + k]);
      row.values(k) = parse_double(f[7 + K + k]);
    }
    row.wall_ms = parse_double(f.back());
    if (!trace.rows.empty() && row.iter <= trace.rows.back().iter)
      throw InvalidArgument("trace iterations must be strictly increasing");
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace mmrl::io
