/*
 * Copyright 2026 The csrel Authors.
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

#ifndef CSREL_FORMAT_HPP_
#define CSREL_FORMAT_HPP_

#include <cstdio>
#include <string>

namespace csrel {

/// Decimal text that round-trips an IEEE double exactly (17 significant
/// digits). Every emitted file and report uses this so identical runs
/// produce byte-identical output.
inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace csrel

#endif  // CSREL_FORMAT_HPP_
