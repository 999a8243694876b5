#include "persuade/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "persuade/error.hpp"

namespace persuade {

using nlohmann::json;

namespace {

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::BadConfig, std::string(what) + " is not valid JSON: " + e.what());
  }
}

const json& field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::BadConfig, std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_number()) throw Error(ErrorKind::BadConfig, std::string("field \"") + key + "\" must be a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_array()) throw Error(ErrorKind::BadConfig, std::string("field \"") + key + "\" must be an array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) {
      throw Error(ErrorKind::BadConfig, std::string("field \"") + key + "\" must hold numbers only");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

bool flag(const json& obj, const char* key) {
  const auto& v = field(obj, key);
  if (!v.is_boolean()) throw Error(ErrorKind::BadConfig, std::string("field \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

json problem_json(const ProblemSpec& spec) {
  const auto cuts = spec.payoff().cuts();
  const auto levels = spec.payoff().levels();
  return json{{"lambda0", spec.rates().lambda0},
              {"lambda1", spec.rates().lambda1},
              {"r", spec.discount().r},
              {"cuts", std::vector<double>(cuts.begin(), cuts.end())},
              {"levels", std::vector<double>(levels.begin(), levels.end())}};
}

ProblemSpec problem_from(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::BadConfig, "problem must be a JSON object");
  static const std::set<std::string> allowed{"lambda0", "lambda1", "r", "cuts", "levels"};
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) throw Error(ErrorKind::BadConfig, "unknown field \"" + key + "\"");
  }
  return validate_problem({number(doc, "lambda0"), number(doc, "lambda1")}, {number(doc, "r")},
                          numbers(doc, "cuts"), numbers(doc, "levels"));
}

json regions_json(const MarkovPolicy& policy) {
  json regions = json::array();
  for (const auto& r : policy.regions()) {
    json action;
    if (const auto* s = std::get_if<Split>(&r.action)) {
      action = {{"type", "split"}, {"low", s->low}, {"high", s->high}};
    } else {
      action = {{"type", "slide"}};
    }
    regions.push_back({{"lo", r.lo},
                       {"hi", r.hi},
                       {"lo_closed", r.lo_closed},
                       {"hi_closed", r.hi_closed},
                       {"action", action}});
  }
  return regions;
}

json cutoffs_json(const MarkovPolicy& policy) {
  json cutoffs = json::array();
  for (const auto& c : policy.cutoffs()) cutoffs.push_back({{"belief", c.belief}, {"interval", c.interval}});
  return cutoffs;
}

MarkovPolicy policy_from(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::BadConfig, "policy must be a JSON object");
  const auto& regions = field(doc, "regions");
  if (!regions.is_array()) throw Error(ErrorKind::BadConfig, "\"regions\" must be an array");
  std::vector<PolicyRegion> out;
  for (const auto& r : regions) {
    PolicyRegion region{number(r, "lo"), number(r, "hi"), flag(r, "lo_closed"), flag(r, "hi_closed"),
                        Slide{}};
    const auto& action = field(r, "action");
    const auto& type = field(action, "type");
    if (type == "split") {
      region.action = Split{number(action, "low"), number(action, "high")};
    } else if (type != "slide") {
      throw Error(ErrorKind::BadConfig, "action type must be \"slide\" or \"split\"");
    }
    out.push_back(region);
  }
  std::vector<Cutoff> cutoffs;
  if (const auto it = doc.find("cutoffs"); it != doc.end()) {
    for (const auto& c : *it) {
      const auto& j = field(c, "interval");
      if (!j.is_number_integer()) throw Error(ErrorKind::BadConfig, "cutoff interval must be an integer");
      cutoffs.push_back({number(c, "belief"), j.get<int>()});
    }
  }
  return MarkovPolicy(std::move(out), std::move(cutoffs));
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) out_ += ',';
      out_ += h;
      first = false;
    }
    out_ += '\n';
  }
  Csv& num(double x) { return cell(format_number(x)); }
  Csv& num(std::uint64_t x) { return cell(std::to_string(x)); }
  Csv& cell(std::string_view s) {
    if (!row_start_) out_ += ',';
    out_ += s;
    row_start_ = false;
    return *this;
  }
  void end_row() {
    out_ += '\n';
    row_start_ = true;
  }
  std::string str() && { return std::move(out_); }

 private:
  std::string out_;
  bool row_start_ = true;
};

}  // namespace

std::string format_number(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading " + path.string());
  return ss.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto " + path.string());
  }
}

ProblemSpec parse_problem(std::string_view json_text) {
  return problem_from(parse_json(json_text, "problem"));
}

ProblemSpec load_problem(const std::filesystem::path& path) {
  return parse_problem(read_text_file(path));
}

std::string problem_to_json(const ProblemSpec& spec) { return dump(problem_json(spec)); }

std::string policy_to_json(const MarkovPolicy& policy) {
  return dump(json{{"regions", regions_json(policy)}, {"cutoffs", cutoffs_json(policy)}});
}

MarkovPolicy parse_policy(std::string_view json_text) {
  return policy_from(parse_json(json_text, "policy"));
}

std::string solution_to_json(const ProblemSpec& spec, const Solution& solution) {
  json segments = json::array();
  for (const auto& s : solution.value.segments()) {
    if (const auto* lin = std::get_if<LinearPiece>(&s.shape)) {
      segments.push_back({{"kind", "linear"},
                          {"lo", s.lo},
                          {"hi", s.hi},
                          {"intercept", lin->intercept},
                          {"slope", lin->slope}});
    } else {
      const auto& arc = std::get<SlideArc>(s.shape);
      segments.push_back({{"kind", "slide_arc"},
                          {"lo", s.lo},
                          {"hi", s.hi},
                          {"level", arc.level},
                          {"coeff", arc.coeff},
                          {"center", arc.center},
                          {"exponent", arc.exponent}});
    }
  }
  return dump(json{{"problem", problem_json(spec)},
                   {"segments", segments},
                   {"regions", regions_json(solution.policy)},
                   {"cutoffs", cutoffs_json(solution.policy)}});
}

Solution parse_solution(std::string_view json_text) {
  const auto doc = parse_json(json_text, "solution");
  if (!doc.is_object()) throw Error(ErrorKind::BadConfig, "solution must be a JSON object");
  const auto& raw = field(doc, "segments");
  if (!raw.is_array()) throw Error(ErrorKind::BadConfig, "\"segments\" must be an array");
  std::vector<ValueSegment> segments;
  for (const auto& s : raw) {
    const auto& kind = field(s, "kind");
    ValueSegment seg{number(s, "lo"), number(s, "hi"), LinearPiece{0.0, 0.0}};
    if (kind == "linear") {
      seg.shape = LinearPiece{number(s, "intercept"), number(s, "slope")};
    } else if (kind == "slide_arc") {
      seg.shape = SlideArc{number(s, "level"), number(s, "coeff"), number(s, "center"),
                           number(s, "exponent")};
    } else {
      throw Error(ErrorKind::BadConfig, "segment kind must be \"linear\" or \"slide_arc\"");
    }
    segments.push_back(seg);
  }
  return Solution{PiecewiseValue(std::move(segments)), policy_from(doc)};
}

std::string solution_samples_csv(const ProblemSpec& spec, const Solution& solution,
                                 std::size_t samples) {
  std::vector<double> beliefs;
  if (samples == 1) beliefs.push_back(0.0);
  for (std::size_t i = 0; samples > 1 && i < samples; ++i) {
    beliefs.push_back(static_cast<double>(i) / static_cast<double>(samples - 1));
  }
  for (double c : spec.payoff().cuts()) beliefs.push_back(c);
  for (const auto& c : solution.policy.cutoffs()) beliefs.push_back(c.belief);
  std::sort(beliefs.begin(), beliefs.end());
  beliefs.erase(std::unique(beliefs.begin(), beliefs.end()), beliefs.end());

  const auto env = cav_u(spec.payoff());
  Csv csv{"belief", "u", "cav_u", "v", "v_prime", "region", "cutoffs"};
  for (double p : beliefs) {
    const auto side = p < 1.0 ? Side::Right : Side::Left;
    const bool split = std::holds_alternative<Split>(solution.policy.action_at(p));
    csv.num(p).num(spec.payoff()(p)).num(env(p)).num(solution.value.value(p));
    csv.num(solution.value.derivative(p, side)).cell(split ? "split" : "slide");
    std::string cut;
    for (const auto& c : solution.policy.cutoffs()) {
      if (c.belief == p) cut = std::to_string(c.interval);
    }
    csv.cell(cut);
    csv.end_row();
  }
  return std::move(csv).str();
}

std::string oracle_csv(const ProblemSpec& spec, const OracleResult& result,
                       const PiecewiseValue& solver_value) {
  const auto env = cav_u(spec.payoff());
  Csv csv{"belief", "value", "u", "cav_u", "solver_value", "abs_error"};
  for (std::size_t i = 0; i < result.grid.points.size(); ++i) {
    const double p = result.grid.points[i];
    const double v = solver_value.value(p);
    csv.num(p).num(result.values[i]).num(spec.payoff()(p)).num(env(p)).num(v);
    csv.num(std::abs(result.values[i] - v));
    csv.end_row();
  }
  return std::move(csv).str();
}

std::string sim_result_to_json(const SimResult& result) {
  json bins = json::array();
  for (const auto& b : result.calibration) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"center", b.center()},
                    {"count", b.count},
                    {"state_one", b.state_one},
                    {"frequency", b.frequency()},
                    {"std_error", b.std_error()},
                    {"pass", b.passes()}});
  }
  const auto& c = result.config;
  return dump(json{{"mean_discounted_payoff", result.mean_discounted_payoff},
                   {"std_error", result.std_error},
                   {"n_paths", result.n_paths},
                   {"tail_bound", result.tail_bound},
                   {"calibrated", result.calibrated()},
                   {"calibration_table", bins},
                   {"martingale",
                    {{"identity_error", result.martingale_identity_error},
                     {"gap_mean", result.martingale_gap_mean},
                     {"gap_se", result.martingale_gap_se},
                     {"messages", result.messages}}},
                   {"config",
                    {{"delta", c.delta},
                     {"horizon", c.horizon},
                     {"n_paths", c.n_paths},
                     {"seed", c.seed},
                     {"initial_belief", c.initial_belief},
                     {"calibration_bins", c.calibration_bins}}}});
}

std::string sim_result_csv(const SimResult& result) {
  Csv csv{"bin_lo", "bin_hi", "center", "count", "state_one", "frequency", "std_error", "pass"};
  for (const auto& b : result.calibration) {
    csv.num(b.lo).num(b.hi).num(b.center()).num(b.count).num(b.state_one).num(b.frequency());
    csv.num(b.std_error()).cell(b.passes() ? "1" : "0");
    csv.end_row();
  }
  return std::move(csv).str();
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  Csv csv{"path", "period", "state", "belief", "message", "payoff"};
  for (const auto& r : rows) {
    csv.cell(std::to_string(r.path)).cell(std::to_string(r.period)).cell(std::to_string(r.state));
    csv.num(r.belief).cell(std::to_string(r.message)).num(r.payoff);
    csv.end_row();
  }
  return std::move(csv).str();
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  Csv csv{"policy", "belief", "sim_mean", "sim_se", "dp_value", "solver_value", "flagged"};
  for (const auto& r : rows) {
    csv.cell(r.policy).num(r.belief).num(r.sim_mean).num(r.sim_se).num(r.dp_value);
    csv.num(r.solver_value).cell(r.flagged ? "1" : "0");
    csv.end_row();
  }
  return std::move(csv).str();
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  Csv csv{"delta", "value_error", "policy_error", "value_iterations", "policy_iterations",
          "converged"};
  for (const auto& r : rows) {
    csv.num(r.delta).num(r.value_error).num(r.policy_error);
    csv.cell(std::to_string(r.value_iterations)).cell(std::to_string(r.policy_iterations));
    csv.cell(r.converged ? "1" : "0");
    csv.end_row();
  }
  return std::move(csv).str();
}

}  // namespace persuade
