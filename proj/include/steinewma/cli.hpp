#pragma once

#include <iosfwd>
#include <vector>

#include "steinewma/charts.hpp"

namespace steinewma {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitAlarm = 2 };

struct CountRow {
  long t;
  long count;
  long line = 0;  // source line, for error messages
};

// Reads a `t,count` (or `count`) CSV. Throws DataError naming the line on
// malformed rows and on a file without data rows.
std::vector<CountRow> read_count_csv(std::istream& in);

// t,count,z,lcl,ucl,alarm
void write_monitor_csv(std::ostream& os, const ChartDesign& design, const std::vector<CountRow>& rows,
                       const SeriesResult& result);

// Entry point of the `steinewma` tool. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace steinewma
