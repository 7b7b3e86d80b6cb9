#include "mfnc/runner.hpp"

namespace mfnc {

int resolve_jobs(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

}  // namespace mfnc
