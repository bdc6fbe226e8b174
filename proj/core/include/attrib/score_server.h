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

#ifndef ATTRIB_SCORE_SERVER_H_
#define ATTRIB_SCORE_SERVER_H_

#include <chrono>
#include <memory>
#include <mutex>
#include <string>

#include "attrib/oracle.h"
#include "attrib/subprocess.h"

namespace attrib {

// Score-only oracle backed by a persistent external process. Protocol: one
// PNG path per line on the process's stdin; one line of num_classes
// whitespace-separated probabilities on its stdout. Requests are serialized.
class ExternalScoreOracle : public ClassifierOracle {
 public:
  ExternalScoreOracle(std::string command, int num_classes,
                      std::chrono::milliseconds timeout = std::chrono::seconds(60),
                      int input_height = 0, int input_width = 0);

  int num_classes() const override { return num_classes_; }
  int input_height() const override { return input_h_; }
  int input_width() const override { return input_w_; }

 protected:
  std::vector<double> DoScoreAll(const Image& x) const override;

 private:
  std::string command_;
  int num_classes_;
  std::chrono::milliseconds timeout_;
  int input_h_;
  int input_w_;
  mutable std::mutex mu_;
  mutable std::unique_ptr<LineProcess> process_;
  mutable std::unique_ptr<TempDir> tmp_;
};

}  // namespace attrib

#endif  // ATTRIB_SCORE_SERVER_H_
