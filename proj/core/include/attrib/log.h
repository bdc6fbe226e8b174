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

#ifndef ATTRIB_LOG_H_
#define ATTRIB_LOG_H_

#include <functional>
#include <string_view>

namespace attrib {

using WarningSink = std::function<void(std::string_view)>;

// Reports a non-fatal condition (degenerate metric input, vacuous mean, ...).
// Defaults to stderr.
void Warn(std::string_view message);

// Replaces the warning sink; an empty function restores the default.
void SetWarningSink(WarningSink sink);

}  // namespace attrib

#endif  // ATTRIB_LOG_H_
