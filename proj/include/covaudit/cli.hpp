#pragma once

namespace covaudit::cli {

/// Exit codes: 0 success, 1 other failure, 2 config/schema error, 3 degraded run.
int run(int argc, const char* const* argv);

}  // namespace covaudit::cli
