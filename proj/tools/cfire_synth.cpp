/*
 * Copyright 2026 The CFIRE Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Writes the bundled synthetic tasks as CSV.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cfire/dataset.hpp"
#include "cfire/synthetic.hpp"

int main(int argc, char** argv) {
  std::string task = "two-box", out_path;
  std::size_t n = 2000, d = 8;
  std::uint64_t seed = 0;
  CLI::App app{"Generate synthetic classification tasks with known rules"};
  app.add_option("--task", task, "two-box or spam-like")->check(CLI::IsMember({"two-box", "spam-like"}));
  app.add_option("-n,--samples", n, "Number of rows");
  app.add_option("-d,--dim", d, "Number of features");
  app.add_option("--seed", seed, "Generator seed");
  app.add_option("--out", out_path, "Output CSV")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const cfire::Dataset ds = task == "two-box" ? cfire::MakeTwoBoxTask(n, d, seed)
                                                : cfire::MakeSpamLikeTask(n, d, seed);
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write '" << out_path << "'\n";
      return 2;
    }
    cfire::WriteCsv(ds, out, "label");
  } catch (const cfire::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
