// Copyright 2026 The convosim Authors
//
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

#pragma once

#include <map>
#include <string>

namespace convosim {

/// Substitutes {{name}} placeholders. An unresolved placeholder throws
/// InvalidInputError so template/wiring drift fails loudly instead of
/// leaking braces into prompts.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values);

/// The on-disk prompt set: one file per (role, turn-kind), loaded once at
/// startup so wording can be versioned and edited without recompilation.
class PromptLibrary {
public:
    /// Loads every *.txt in the directory, keyed by file stem
    /// (e.g. "listener_turn1").
    static PromptLibrary load_dir(const std::string& dir);

    const std::string& get(const std::string& name) const;
    bool has(const std::string& name) const { return prompts_.count(name) > 0; }

private:
    std::map<std::string, std::string> prompts_;
};

}  // namespace convosim
