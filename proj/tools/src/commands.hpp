#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sfn::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitData = 3,
  kExitTraining = 4,
};

/// Runs one command line (without the program name) and returns the exit code.
///
///   sfn train     --algo b --data synthetic-grid --seed 7 --out model.json
///   sfn predict   --model model.json --data points.csv
///   sfn benchmark --data rtt-surrogate --length 3000 --runs 5 --format records
///   sfn report    --log model.json.steps.jsonl
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sfn::cli
