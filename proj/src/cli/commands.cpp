#include "mctrunc/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "mctrunc/bounds.hpp"
#include "mctrunc/ctmc.hpp"
#include "mctrunc/errors.hpp"
#include "mctrunc/lyapunov.hpp"
#include "mctrunc/models/gm1.hpp"
#include "mctrunc/models/toggle.hpp"
#include "mctrunc/version.hpp"

namespace mctrunc::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double param(const json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_number()) throw ConfigError(std::string("model.params.") + key + ": expected a number");
  return params.at(key).get<double>();
}

void only_params(const json& params, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : params.items()) {
    if (std::find_if(keys.begin(), keys.end(), [&](const char* a) { return k == a; }) == keys.end()) {
      throw ConfigError("model.params: unknown key '" + k + "'");
    }
  }
}

// The model together with its certificate data. For jump processes `chain` is
// the embedded chain and `spec` the embedded form of `q_spec`.
struct Problem {
  std::unique_ptr<GM1Model> gm1;
  std::unique_ptr<ToggleSwitchModel> toggle;
  std::unique_ptr<EmbeddedChain> embedded;
  const ChainModel* chain = nullptr;
  const JumpModel* jump = nullptr;
  DriftSpec spec;
  DriftSpec q_spec;
  std::size_t dim = 1;
  json model_json;
  json constants = json::object();
};

std::int64_t state_size(const State& s) { return s.total(); }

DriftSpec generic_spec(const LyapunovChoice& l, BallFunction ball) {
  DriftSpec s;
  const double scale = l.type == "zero" ? 0.0 : l.scale;
  s.g1 = [scale](const State& x) { return scale * static_cast<double>(state_size(x)); };
  s.g2 = s.g1;
  s.r = [](const State&) { return 1.0; };
  s.slack2 = s.r;
  s.n1 = s.n2 = l.radius;
  s.ball = std::move(ball);
  return s;
}

Problem build_problem(const Config& cfg) {
  Problem p;
  const auto& l = cfg.model.lyapunov;
  const json& params = cfg.model.params;
  if (cfg.model.name == "gm1") {
    only_params(params, {"mu", "b"});
    GM1Model::Params gp;
    gp.mu = param(params, "mu", gp.mu);
    gp.b = param(params, "b", gp.b);
    if (!(gp.mu > 0.0) || !(gp.b > 0.0)) throw ConfigError("gm1: mu and b must be positive");
    p.gm1 = std::make_unique<GM1Model>(gp);
    p.chain = p.gm1.get();
    p.dim = 1;
    p.model_json = {{"name", "gm1"}, {"process", "chain"}, {"params", {{"mu", gp.mu}, {"b", gp.b}}}};
    if (l.type == "builtin") {
      const GM1Lyapunov L = gm1_lyapunov(*p.gm1, l.c1, l.c2, l.c3);
      p.spec = L.spec;
      p.constants = {{"c1", L.c1}, {"c2", L.c2}, {"c3", L.c3}, {"n1", L.n1}, {"n2", L.n2}, {"n3", L.n3},
                     {"moment_poly", {L.a0, L.a1, L.a2, L.a3}},
                     {"moment_bound", moment_bound(*p.gm1, L.g3, L.w, gm1_ball(L.n3 + 1))}};
    } else {
      p.spec = generic_spec(l, gm1_ball);
      p.constants = {{"n1", l.radius}, {"n2", l.radius}};
    }
  } else {
    only_params(params, {"lambda", "mu"});
    const double lambda = param(params, "lambda", 20.0);
    const double mu = param(params, "mu", 1.0);
    p.toggle = std::make_unique<ToggleSwitchModel>(lambda, mu);
    p.jump = p.toggle.get();
    p.embedded = std::make_unique<EmbeddedChain>(*p.toggle);
    p.chain = p.embedded.get();
    p.dim = 2;
    p.model_json = {{"name", "toggle"}, {"process", "jump"}, {"params", {{"lambda", lambda}, {"mu", mu}}},
                    {"mode", p.toggle->mode()}, {"centre", p.toggle->centre()}};
    if (l.type == "builtin") {
      const ToggleLyapunov L = toggle_lyapunov(*p.toggle, l.alpha);
      p.q_spec = L.spec;
      p.constants = {{"c0", L.c0}, {"c1", L.c1}, {"c2", L.c2}, {"n1", L.n1}, {"n2", L.n2},
                     {"alpha", L.alpha}, {"c3", L.c3}, {"n3", L.n3},
                     {"moment_bound", ctmc_moment_bound(*p.toggle, L.g3, L.w, simplex_ball(L.n3 + 1))}};
    } else {
      p.q_spec = generic_spec(l, simplex_ball);
      p.constants = {{"n1", l.radius}, {"n2", l.radius}};
    }
    p.spec = embedded_spec(*p.toggle, p.q_spec);
  }
  return p;
}

State make_state(const std::vector<std::int64_t>& coords, std::size_t dim) {
  if (coords.size() != dim) throw ConfigError("return_set.states: state has the wrong dimension");
  for (auto v : coords) {
    if (v < 0) throw ConfigError("return_set.states: coordinates must be nonnegative");
  }
  return State(std::span<const std::int64_t>(coords));
}

std::vector<State> build_K(const Config& cfg, const Problem& p) {
  std::vector<State> k;
  if (cfg.return_set.mode == "explicit") {
    for (const auto& s : cfg.return_set.states) k.push_back(make_state(s, p.dim));
    return merge_regions(k, {});
  }
  k = p.jump ? construct_K_ctmc(*p.jump, p.q_spec) : construct_K(*p.chain, p.spec);
  if (k.empty()) throw AssumptionViolation("return set: the Lyapunov functions give an empty K");
  return k;
}

StatePredicate a_predicate(const TruncationConfig& t, std::size_t dim, std::int64_t level) {
  if (t.type == "range") {
    if (dim != 1) throw ConfigError("truncation.A: range requires a one-dimensional model");
    return [level](const State& s) { return s[0] <= level; };
  }
  if (t.type == "simplex") return [level](const State& s) { return s.total() <= level; };
  if (t.box.size() != dim) throw ConfigError("truncation.A.box: length does not match the model dimension");
  const auto box = t.box;
  return [box](const State& s) {
    for (std::size_t i = 0; i < box.size(); ++i) {
      if (s[i] > box[i]) return false;
    }
    return true;
  };
}

Truncation build_truncation(const Problem& p, const TruncationConfig& tc, std::int64_t level,
                            const std::vector<State>& k) {
  const StatePredicate in_k = [&k](const State& s) { return std::binary_search(k.begin(), k.end(), s); };
  Truncation t = enumerate(*p.chain, a_predicate(tc, p.dim, level), in_k);
  if (t.k_size() != static_cast<Index>(k.size())) {
    throw AssumptionViolation("return set: K is not contained in A, or part of K is unreachable inside A");
  }
  return t;
}

std::int64_t k_star(const std::vector<State>& k) {
  std::int64_t m = 0;
  for (const auto& s : k) m = std::max(m, state_size(s));
  return m;
}

std::string first_states(const std::vector<State>& v, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < v.size() && i < limit; ++i) out += (i ? " " : "") + v[i].to_string();
  if (v.size() > limit) out += " ...";
  return out;
}

// Verifies the Q-form drift of a jump process (with the rate-envelope policy)
// before the embedded certificate is formed.
void check_jump_drift(const Config& cfg, const Problem& p, const Truncation& t, json* record) {
  CtmcDriftOptions opt;
  opt.require_rate_envelope = cfg.bounds.require_rate_envelope;
  const StatePredicate in_k = [&t](const State& x) { return t.space.in_k(x); };
  const auto& states = t.space.states();
  const StateFunction one = [](const State&) { return 1.0; };
  const auto d1 = verify_ctmc_drift(*p.jump, p.q_spec.g1, p.q_spec.r, in_k,
                                    merge_regions(p.q_spec.ball(p.q_spec.n1), states), opt);
  const auto d2 = verify_ctmc_drift(*p.jump, p.q_spec.g2, p.q_spec.slack2 ? p.q_spec.slack2 : one, in_k,
                                    merge_regions(p.q_spec.ball(p.q_spec.n2), states), opt);
  if (record) {
    *record = {{"q_form_consistent", d1.consistent && d2.consistent},
               {"rate_envelope_checked", d1.rate_envelope_checked}};
  }
  if (!d1.q_form.verified() || !d2.q_form.verified()) {
    throw AssumptionViolation("drift inequality fails off K at " +
                              first_states(d1.q_form.verified() ? d2.q_form.violations : d1.q_form.violations));
  }
  if (!d1.consistent || !d2.consistent) {
    throw NumericalFailure("drift check: Q-form and embedded margins disagree");
  }
}

LyapunovCertificate certify_checked(const Config& cfg, const Problem& p, const Truncation& t, json* jump_record) {
  if (p.jump) check_jump_drift(cfg, p, t, jump_record);
  LyapunovCertificate cert = certify(*p.chain, t, p.spec);
  if (!cert.verified()) {
    const auto& v = cert.drift1.verified() ? cert.drift2.violations : cert.drift1.violations;
    throw AssumptionViolation("drift inequality fails off K at " + first_states(v));
  }
  return cert;
}

struct RewardResult {
  std::string name;
  std::string tv_weight;
  BoundReport report;
};

RewardResult evaluate_reward(const Problem& p, const Censoring& c, const LyapunovCertificate& cert,
                             const std::string& reward, const BoundOptions& opt) {
  const Truncation& t = c.truncation();
  const StateFunction one = [](const State&) { return 1.0; };
  RewardResult out{reward, reward == "one" ? "one" : "r", {}};
  StateFunction f;
  if (reward.rfind("coord:", 0) == 0) {
    const auto i = static_cast<std::size_t>(std::stoul(reward.substr(6)));
    if (i >= p.dim) throw ConfigError("bounds.rewards: coordinate index out of range in '" + reward + "'");
    f = [i](const State& x) { return static_cast<double>(x[i]); };
  }
  if (p.jump) {
    if (reward == "one") {
      out.report = ctmc_expectation_bounds(c, *p.jump, one, one, cert.h2, cert.h2, opt);
    } else {
      out.report = ctmc_expectation_bounds(c, *p.jump, f ? f : p.q_spec.r, p.q_spec.r, cert.h1, cert.h2, opt);
    }
    return out;
  }
  const Vector e = Vector::Ones(t.size());
  if (reward == "one") {
    out.report = evaluate_bounds(c, e, cert.h2, e, cert.h2, opt);
  } else {
    const Vector r = t.evaluate(p.spec.r);
    out.report = f ? evaluate_reward_bounds(c, t.evaluate(f), r, cert.h1, e, cert.h2, opt)
                   : evaluate_bounds(c, r, cert.h1, e, cert.h2, opt);
  }
  return out;
}

json approximation_json(const Problem& p, const Censoring& c, StochasticizationMethod method) {
  const Truncation& t = c.truncation();
  const Stochasticization st = stochasticize(c, method);
  Vector v = approx_distribution(c, st.pi);
  if (p.jump) v = jump_distribution(v, exit_rates(*p.jump, t));
  json entries = json::array();
  for (Index i = 0; i < t.size(); ++i) {
    if (v[i] <= 0.0) continue;
    const State& s = t.space.state_of(i);
    json coords = json::array();
    for (std::size_t d = 0; d < s.dim(); ++d) coords.push_back(s[d]);
    entries.push_back({coords, v[i]});
  }
  return {{"method", to_string(method)}, {"process", p.jump ? "jump" : "chain"}, {"format", "coordinate"},
          {"entries", entries}};
}

json truncation_json(const TruncationConfig& tc, std::int64_t level, const Truncation& t, const std::vector<State>& k) {
  json j = {{"type", tc.type}, {"size", t.size()}, {"k_size", t.k_size()}, {"k_star", k_star(k)}};
  if (tc.type == "box") {
    j["box"] = tc.box;
  } else {
    j["level"] = level;
  }
  return j;
}

std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << content;
    if (!out) throw ConfigError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const AssumptionViolation& e) {
    err << "assumption violated: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

std::string output_dir(const Config& config) {
  const char* env = std::getenv(kOutputDirEnv);
  if (env && *env) return env;
  return config.output.dir;
}

json run_report(const Config& cfg, const CommandOptions& options) {
  json timings = json::object();
  auto t0 = Clock::now();
  const Problem p = build_problem(cfg);
  const std::vector<State> k = build_K(cfg, p);
  timings["model_and_K"] = seconds_since(t0);

  t0 = Clock::now();
  const Truncation t = build_truncation(p, cfg.truncation, cfg.truncation.level, k);
  timings["enumerate"] = seconds_since(t0);

  t0 = Clock::now();
  json jump_record;
  const LyapunovCertificate cert = certify_checked(cfg, p, t, &jump_record);
  timings["certify"] = seconds_since(t0);

  t0 = Clock::now();
  Censoring::Options copt;
  copt.threads = std::max(1, options.threads);
  const Censoring c(t, copt);
  timings["censor"] = seconds_since(t0);

  json results = json::array();
  t0 = Clock::now();
  const std::string hash = cert.hash(t);
  for (auto method : cfg.bounds.methods) {
    BoundOptions bopt{method, cfg.bounds.singleton};
    for (const auto& reward : cfg.bounds.rewards) {
      RewardResult rr = evaluate_reward(p, c, cert, reward, bopt);
      rr.report.provenance["certificate"] = hash;
      json j = rr.report.to_json(false);
      j["reward"] = rr.name;
      j["tv_weight"] = rr.tv_weight;
      results.push_back(j);
    }
  }
  timings["bounds"] = seconds_since(t0);

  json report = {{"version", kVersion},
                 {"model", p.model_json},
                 {"constants", p.constants},
                 {"truncation", truncation_json(cfg.truncation, cfg.truncation.level, t, k)},
                 {"certificate",
                  {{"hash", hash},
                   {"n1", cert.n1},
                   {"n2", cert.n2},
                   {"verified", cert.verified()},
                   {"region_size", cert.region_size},
                   {"checked", cert.drift1.checked + cert.drift2.checked}}},
                 {"results", results}};
  if (p.jump) report["certificate"]["jump"] = jump_record;
  if (cfg.output.approximation) {
    t0 = Clock::now();
    report["approximation"] = approximation_json(p, c, cfg.bounds.methods.front());
    timings["approximation"] = seconds_since(t0);
  }
  report["timings"] = timings;
  return report;
}

json verify_report(const Config& cfg) {
  const Problem p = build_problem(cfg);
  const std::vector<State> k = build_K(cfg, p);
  const StatePredicate in_k = [&k](const State& s) { return std::binary_search(k.begin(), k.end(), s); };
  const DriftSpec& s = p.jump ? p.q_spec : p.spec;
  const StateFunction one = [](const State&) { return 1.0; };
  DriftReport d1, d2;
  json extra = json::object();
  if (p.jump) {
    CtmcDriftOptions opt;
    opt.require_rate_envelope = cfg.bounds.require_rate_envelope;
    const auto c1 = verify_ctmc_drift(*p.jump, s.g1, s.r, in_k, s.ball(s.n1), opt);
    const auto c2 = verify_ctmc_drift(*p.jump, s.g2, s.slack2 ? s.slack2 : one, in_k, s.ball(s.n2), opt);
    d1 = c1.q_form;
    d2 = c2.q_form;
    extra = {{"q_form_consistent", c1.consistent && c2.consistent}, {"rate_envelope_checked", c1.rate_envelope_checked}};
  } else {
    d1 = verify_drift(*p.chain, s.g1, s.r, in_k, s.ball(s.n1));
    d2 = verify_drift(*p.chain, s.g2, s.slack2 ? s.slack2 : one, in_k, s.ball(s.n2));
  }
  auto report_json = [](const DriftReport& d) {
    std::vector<std::string> v;
    for (const auto& x : d.violations) v.push_back(x.to_string());
    return json{{"checked", d.checked}, {"worst_margin", d.worst_margin}, {"violations", v}};
  };
  std::vector<std::string> kstates;
  for (const auto& x : k) kstates.push_back(x.to_string());
  json j = {{"version", kVersion},
            {"model", p.model_json},
            {"constants", p.constants},
            {"return_set", {{"mode", cfg.return_set.mode}, {"size", k.size()}, {"k_star", k_star(k)}, {"states", kstates}}},
            {"drift1", report_json(d1)},
            {"drift2", report_json(d2)},
            {"verified", d1.verified() && d2.verified()}};
  if (p.jump) j["jump"] = extra;
  return j;
}

std::string sweep_csv(const Config& cfg, const CommandOptions& options) {
  const auto& schedule = cfg.truncation.schedule;
  if (schedule.empty()) throw ConfigError("truncation.schedule must list at least one A level for a sweep");
  if (cfg.truncation.type == "box") throw ConfigError("truncation.schedule requires a range or simplex A");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (schedule[i] <= schedule[i - 1]) throw ConfigError("truncation.schedule must be strictly increasing");
  }
  const Problem p = build_problem(cfg);
  const std::vector<State> k = build_K(cfg, p);

  std::ostringstream csv;
  csv << "level,a_size,k_size,method,reward,tv_weight,lower,upper,approx,approx_error,tv_bound,delta,ell,"
         "t_enumerate,t_certify,t_g_build,t_tau,t_bounds,t_total\n";
  std::map<std::pair<int, std::string>, std::pair<double, double>> last;  // (width, tv_bound)
  const auto slack = [](double prev) { return 1e-12 * std::max(1.0, std::abs(prev)); };

  for (const auto level : schedule) {
    const auto start = Clock::now();
    auto t0 = Clock::now();
    const Truncation t = build_truncation(p, cfg.truncation, level, k);
    const double t_enum = seconds_since(t0);
    t0 = Clock::now();
    const LyapunovCertificate cert = certify_checked(cfg, p, t, nullptr);
    const double t_cert = seconds_since(t0);
    t0 = Clock::now();
    Censoring::Options copt;
    copt.threads = std::max(1, options.threads);
    const Censoring c(t, copt);
    const double t_g = seconds_since(t0);
    for (auto method : cfg.bounds.methods) {
      for (const auto& reward : cfg.bounds.rewards) {
        t0 = Clock::now();
        const RewardResult rr = evaluate_reward(p, c, cert, reward, BoundOptions{method, cfg.bounds.singleton});
        const double t_b = seconds_since(t0);
        const BoundReport& b = rr.report;
        const auto tau_it = b.timings.find("tau");
        const double t_tau = tau_it == b.timings.end() ? 0.0 : tau_it->second;
        const auto key = std::make_pair(static_cast<int>(method), reward);
        const double width = b.upper - b.lower;
        if (auto it = last.find(key); it != last.end()) {
          if (width > it->second.first + slack(it->second.first) ||
              b.tv_bound > it->second.second + slack(it->second.second)) {
            throw NumericalFailure("sweep: bounds for reward '" + reward + "' increased at A level " +
                                   std::to_string(level));
          }
        }
        last[key] = {width, b.tv_bound};
        csv << level << ',' << t.size() << ',' << t.k_size() << ',' << to_string(method) << ',' << reward << ','
            << rr.tv_weight << ',' << format_double(b.lower) << ',' << format_double(b.upper) << ','
            << format_double(b.approx) << ',' << (b.approx_error >= 0.0 ? format_double(b.approx_error) : "")
            << ',' << format_double(b.tv_bound) << ',' << format_double(b.delta) << ',' << format_double(b.ell)
            << ',' << format_double(t_enum) << ',' << format_double(t_cert) << ',' << format_double(t_g) << ','
            << format_double(t_tau) << ',' << format_double(t_b) << ',' << format_double(seconds_since(start))
            << '\n';
      }
    }
  }
  return csv.str();
}

int run_command(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Config cfg = load_config(path);
        const json report = run_report(cfg, options);
        const std::filesystem::path file = std::filesystem::path(output_dir(cfg)) / cfg.output.report;
        write_atomically(file, report.dump(2) + "\n");
        for (const auto& r : report["results"]) {
          out << r["stochasticization"].get<std::string>() << " " << r["reward"].get<std::string>() << ": ["
              << format_double(r["lower"].get<double>()) << ", " << format_double(r["upper"].get<double>())
              << "] tv_bound(" << r["tv_weight"].get<std::string>()
              << ") = " << format_double(r["tv_bound"].get<double>()) << "\n";
        }
        out << "report written to " << file.string() << "\n";
      },
      err);
}

int verify_command(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  int code = 0;
  const int status = guarded(
      [&] {
        const Config cfg = load_config(path);
        const json r = verify_report(cfg);
        if (options.json) {
          out << r.dump(2) << "\n";
        } else {
          out << "model " << r["model"]["name"].get<std::string>() << "\n";
          for (const auto& [key, value] : r["constants"].items()) out << key << " = " << value.dump() << "\n";
          out << "|K| = " << r["return_set"]["size"] << "\n";
          out << "k* = " << r["return_set"]["k_star"] << "\n";
          for (const char* d : {"drift1", "drift2"}) {
            const auto& v = r[d]["violations"];
            out << d << ": checked " << r[d]["checked"] << ", violations " << v.size() << "\n";
            for (const auto& x : v) out << "  violation at " << x.get<std::string>() << "\n";
          }
        }
        if (!r["verified"].get<bool>()) {
          err << "assumption violated: drift inequality fails off K\n";
          code = 2;
        }
      },
      err);
  return status != 0 ? status : code;
}

int sweep_command(const std::string& path, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(
      [&] {
        const Config cfg = load_config(path);
        const std::string csv = sweep_csv(cfg, options);
        const std::filesystem::path file = std::filesystem::path(output_dir(cfg)) / cfg.output.csv;
        write_atomically(file, csv);
        out << "sweep written to " << file.string() << "\n";
      },
      err);
}

}  // namespace mctrunc::cli
