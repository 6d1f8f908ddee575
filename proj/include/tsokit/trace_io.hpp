/*
 * Copyright (c) 2026, the tsokit authors
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

#include <string>

#include "tsokit/runtime.hpp"

namespace tsokit {

/* Line-delimited, versioned trace format.
 *
 *   tsokit-trace 1
 *   protocol <name>
 *   procs <n>
 *   vars <name>...
 *   vals <v>...
 *   init <v>...
 *   seed <u64>
 *   horizon <T>
 *   round <k>
 *   p<i> <action> = <event>
 *   d<i> prop = prop <var> <value> <tag>
 *   env invoke p<i> <op>
 *   ...
 *   state
 *   mem <var> <value> <tag|init>
 *   buf p<i> [<var>:<value>:<tag>...]
 *   end
 *
 * The body is a replayable schedule: parsing re-executes every round from
 * the initial state and cross-checks each recorded event and the footer. */

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
};

std::string emit_trace(const Run& r);
Run parse_trace(const std::string& text);

void write_trace_file(const Run& r, const std::string& path);
Run read_trace_file(const std::string& path);

}  // namespace tsokit
