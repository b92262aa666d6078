/*
 * Copyright (c) 2026 ubrsim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace ubrsim {

// Internal invariant violation or misuse of a simulation API. The CLI maps
// this to exit code 3.
class SimFault : public std::runtime_error {
public:
    explicit SimFault(const std::string& what) : std::runtime_error(what) {}
};

// Bad user input: unparseable scenario text, unknown keys, out-of-range
// values. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Always-on invariant check; these guard protocol and accounting invariants
// that must hold in release builds too.
#define UBRSIM_CHECK(cond, msg)                                               \
    do {                                                                      \
        if (!(cond)) throw ::ubrsim::SimFault(std::string("invariant: ") + (msg)); \
    } while (0)

} // namespace ubrsim
