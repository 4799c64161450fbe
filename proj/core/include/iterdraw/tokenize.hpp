/* Copyright 2026 The iterdraw Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef ITERDRAW_TOKENIZE_HPP_
#define ITERDRAW_TOKENIZE_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace iterdraw {

// Lowercases and splits on whitespace; each ASCII punctuation character
// becomes its own token. Angle-bracket markers such as "<teller-drawer>"
// are kept whole.
std::vector<std::string> tokenize(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace iterdraw

#endif  // ITERDRAW_TOKENIZE_HPP_
