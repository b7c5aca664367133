#pragma once

#include <stdexcept>
#include <string>

namespace trustrec {

// Error classes map onto the CLI exit codes:
//   0 success, 1 usage error, 2 data error, 3 numerical failure.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace trustrec
