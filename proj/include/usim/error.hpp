#pragma once

#include <stdexcept>
#include <string>

namespace usim {

enum class errc {
  // input / validation failures (CLI exit code 1)
  invalid_argument,
  inconsistent_totals,
  structural_zero,
  degenerate_bbox,
  insufficient_capacity,
  empty_catalog,
  empty_joint,
  unknown_schema,
  missing_file,
  malformed_row,
  empty_network,
  invalid_schedule,

  // runtime failures (CLI exit code 2)
  schema_violation,
  transport,
  no_convergence,
  no_routine_poi,
  no_candidates,
  unknown_stop,
  snap_failure,
  unreachable,
  no_feasible_mode,
  io_failure,
};

class error : public std::runtime_error {
public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  errc code() const { return code_; }

  // 1 = bad input data / configuration, 2 = everything else
  int exit_code() const { return code_ <= errc::invalid_schedule ? 1 : 2; }

private:
  errc code_;
};

[[noreturn]] inline void throw_error(errc code, const std::string& what) {
  throw error(code, what);
}

}  // namespace usim
