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

#include "convosim/prompt_template.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "convosim/errors.hpp"

namespace convosim {

std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t open = text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(text, pos, text.size() - pos);
            break;
        }
        const std::size_t close = text.find("}}", open + 2);
        if (close == std::string::npos) {
            out.append(text, pos, text.size() - pos);
            break;
        }
        out.append(text, pos, open - pos);
        const std::string name = text.substr(open + 2, close - open - 2);
        auto it = values.find(name);
        if (it == values.end())
            throw InvalidInputError("unresolved template placeholder '" + name + "'");
        out.append(it->second);
        pos = close + 2;
    }
    return out;
}

PromptLibrary PromptLibrary::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InvalidInputError("prompt directory not found: " + dir);
    PromptLibrary lib;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        if (!in) throw InvalidInputError("cannot read prompt file: " + entry.path().string());
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
        lib.prompts_[entry.path().stem().string()] = std::move(text);
    }
    if (lib.prompts_.empty())
        throw InvalidInputError("prompt directory holds no *.txt templates: " + dir);
    return lib;
}

const std::string& PromptLibrary::get(const std::string& name) const {
    auto it = prompts_.find(name);
    if (it == prompts_.end()) throw InvalidInputError("unknown prompt template '" + name + "'");
    return it->second;
}

}  // namespace convosim
