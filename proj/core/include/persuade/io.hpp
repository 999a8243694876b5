#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "persuade/model.hpp"
#include "persuade/oracle.hpp"
#include "persuade/policy.hpp"
#include "persuade/sim.hpp"
#include "persuade/solver.hpp"

namespace persuade {

/// Shortest decimal that parses back to the same double.
std::string format_number(double x);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temp file and renames it over `path`.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

// Problem document: exactly {"lambda0", "lambda1", "r", "cuts", "levels"}.
ProblemSpec parse_problem(std::string_view json_text);
ProblemSpec load_problem(const std::filesystem::path& path);
std::string problem_to_json(const ProblemSpec& spec);

std::string policy_to_json(const MarkovPolicy& policy);
/// Accepts a bare policy document or a solution document.
MarkovPolicy parse_policy(std::string_view json_text);

std::string solution_to_json(const ProblemSpec& spec, const Solution& solution);
Solution parse_solution(std::string_view json_text);

/// belief,u,cav_u,v,v_prime,region,cutoffs sampled at `samples` uniform
/// points plus every cut and cutoff. `cutoffs` holds the interval index j
/// on rows that sit at q_j and is empty elsewhere.
std::string solution_samples_csv(const ProblemSpec& spec, const Solution& solution,
                                 std::size_t samples);

/// belief,value,u,cav_u,solver_value,abs_error
std::string oracle_csv(const ProblemSpec& spec, const OracleResult& result,
                       const PiecewiseValue& solver_value);

std::string sim_result_to_json(const SimResult& result);
/// Calibration table: bin_lo,bin_hi,center,count,state_one,frequency,std_error,pass
std::string sim_result_csv(const SimResult& result);
/// path,period,state,belief,message,payoff
std::string trace_csv(const std::vector<TraceRow>& rows);

/// policy,belief,sim_mean,sim_se,dp_value,solver_value,flagged
std::string comparison_csv(const std::vector<ComparisonRow>& rows);

struct SweepRow {
  double delta;
  double value_error;   ///< sup |v_Delta - v|
  double policy_error;  ///< sup |w_Delta(sigma*) - v|
  std::size_t value_iterations;
  std::size_t policy_iterations;
  bool converged;
};
/// delta,value_error,policy_error,value_iterations,policy_iterations,converged
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace persuade
