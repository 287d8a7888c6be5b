/*
 * Copyright 2026 The revlabel Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef REVLABEL_SRC_TEXT_INTERNAL_HPP
#define REVLABEL_SRC_TEXT_INTERNAL_HPP

#include <unicode/unistr.h>

#include <string>
#include <string_view>

namespace revlabel::detail {

std::string nfc(std::string_view text);
// NFC, root-locale lowercase, NFC again.
icu::UnicodeString nfc_lower(std::string_view text);

}  // namespace revlabel::detail

#endif  // REVLABEL_SRC_TEXT_INTERNAL_HPP
