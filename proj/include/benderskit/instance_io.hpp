// Copyright 2026 The benderskit Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BENDERSKIT_INSTANCE_IO_HPP_
#define BENDERSKIT_INSTANCE_IO_HPP_

#include <string>

#include "benderskit/power_system.hpp"

namespace benderskit::power {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Reads an instance document (JSON) plus the profile CSV it references.
/// The CSV path in `profiles.csv` is resolved relative to the JSON file.
InstanceData load_instance(const std::string& json_path);

/// Writes `<dir>/<name>.json` and `<dir>/<name>_profile.csv`; returns the
/// JSON path. Loading the written pair reproduces the instance.
std::string save_instance(const InstanceData& data, const std::string& dir);

}  // namespace benderskit::power

#endif  // BENDERSKIT_INSTANCE_IO_HPP_
