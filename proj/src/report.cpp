#include "cecran/report.hpp"

namespace cecran {

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::max_iter:
      return "max_iter";
    case RunStatus::solver_failure:
      return "solver_failure";
  }
  return "unknown";
}

}  // namespace cecran
