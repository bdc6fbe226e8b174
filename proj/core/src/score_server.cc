// Copyright 2026 The attrib Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "attrib/score_server.h"

#include <cmath>
#include <sstream>
#include <utility>

#include "attrib/error.h"
#include "attrib/image_io.h"

namespace attrib {

ExternalScoreOracle::ExternalScoreOracle(std::string command, int num_classes,
                                         std::chrono::milliseconds timeout,
                                         int input_height, int input_width)
    : command_(std::move(command)),
      num_classes_(num_classes),
      timeout_(timeout),
      input_h_(input_height),
      input_w_(input_width) {
  if (command_.empty()) throw ParameterError("score server command is empty");
  if (num_classes_ < 1) throw ParameterError("num_classes must be >= 1");
}

std::vector<double> ExternalScoreOracle::DoScoreAll(const Image& x) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!tmp_) tmp_ = std::make_unique<TempDir>("attrib-score");
  // A crashed or timed-out server is restarted on the next request.
  if (!process_ || !process_->alive()) {
    process_ = std::make_unique<LineProcess>(command_);
  }
  const std::filesystem::path png = tmp_->NewFile("query", ".png");
  WriteImage(x, png);
  std::string reply;
  try {
    reply = process_->Request(png.string(), timeout_);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(png, ec);
    throw;
  }
  std::error_code ec;
  std::filesystem::remove(png, ec);

  std::istringstream in(reply);
  std::vector<double> p;
  double v;
  while (in >> v) p.push_back(v);
  if (!in.eof() || static_cast<int>(p.size()) != num_classes_) {
    throw IoError("score server reply is not " + std::to_string(num_classes_) +
                  " numbers: '" + reply + "'");
  }
  double total = 0.0;
  for (double q : p) {
    if (!(q >= 0.0 && q <= 1.0)) {
      throw IoError("score server returned a value outside [0,1]");
    }
    total += q;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw IoError("score server probabilities do not sum to 1");
  }
  return p;
}

}  // namespace attrib
