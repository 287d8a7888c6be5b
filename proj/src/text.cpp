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

#include "revlabel/corpus.hpp"
#include "revlabel/error.hpp"
#include "text_internal.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <unordered_set>

namespace revlabel {

namespace {

// English function words (the widely used NLTK list, contractions without
// apostrophes since punctuation is stripped before lookup). Versioned with
// the code: changing it changes eligibility and dedup keys.
constexpr std::string_view kStopwords[] = {
    "a",          "about",    "above",     "after",      "again",
    "against",    "ain",      "all",       "am",         "an",
    "and",        "any",      "are",       "aren",       "as",
    "at",         "be",       "because",   "been",       "before",
    "being",      "below",    "between",   "both",       "but",
    "by",         "can",      "couldn",    "d",          "did",
    "didn",       "do",       "does",      "doesn",      "doing",
    "don",        "down",     "during",    "each",       "few",
    "for",        "from",     "further",   "had",        "hadn",
    "has",        "hasn",     "have",      "haven",      "having",
    "he",         "her",      "here",      "hers",       "herself",
    "him",        "himself",  "his",       "how",        "i",
    "if",         "in",       "into",      "is",         "isn",
    "it",         "its",      "itself",    "just",       "ll",
    "m",          "ma",       "me",        "mightn",     "more",
    "most",       "mustn",    "my",        "myself",     "needn",
    "no",         "nor",      "not",       "now",        "o",
    "of",         "off",      "on",        "once",       "only",
    "or",         "other",    "our",       "ours",       "ourselves",
    "out",        "over",     "own",       "re",         "s",
    "same",       "shan",     "she",       "should",     "shouldn",
    "so",         "some",     "such",      "t",          "than",
    "that",       "the",      "their",     "theirs",     "them",
    "themselves", "then",     "there",     "these",      "they",
    "this",       "those",    "through",   "to",         "too",
    "under",      "until",    "up",        "ve",         "very",
    "was",        "wasn",     "we",        "were",       "weren",
    "what",       "when",     "where",     "which",      "while",
    "who",        "whom",     "why",       "will",       "with",
    "won",        "wouldn",   "y",         "you",        "your",
    "yours",      "yourself", "yourselves",
};

const std::unordered_set<std::string_view>& stopword_set() {
  static const std::unordered_set<std::string_view> set(std::begin(kStopwords),
                                                        std::end(kStopwords));
  return set;
}

bool is_numeric(UChar32 c) {
  auto type = u_charType(c);
  return type == U_DECIMAL_DIGIT_NUMBER || type == U_LETTER_NUMBER ||
         type == U_OTHER_NUMBER;
}

// Unicode punctuation plus the ASCII symbol characters conventionally
// treated as punctuation ($ + < = > ^ ` | ~).
bool is_punctuation(UChar32 c) {
  if (u_ispunct(c)) return true;
  return c < 0x80 && c > 0x20 && !u_isalnum(c);
}

std::vector<UChar32> code_points(const std::vector<std::string>& utf8) {
  std::vector<UChar32> out;
  for (const auto& s : utf8) {
    auto u = icu::UnicodeString::fromUTF8(s);
    if (u.length() == 0) continue;
    out.push_back(u.char32At(0));
  }
  return out;
}

}  // namespace

namespace detail {

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const auto* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::Internal, "ICU NFC normalizer unavailable");
  }
  auto src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  auto dst = norm->normalize(src, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::Internal, "NFC normalization failed");
  }
  std::string out;
  dst.toUTF8String(out);
  return out;
}

icu::UnicodeString nfc_lower(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const auto* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::Internal, "ICU NFC normalizer unavailable");
  }
  auto u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u = norm->normalize(u, status);
  u.toLower(icu::Locale::getRoot());
  u = norm->normalize(u, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::Internal, "NFC normalization failed");
  }
  return u;
}

}  // namespace detail

const std::vector<std::string_view>& stopwords() {
  static const std::vector<std::string_view> list = [] {
    std::vector<std::string_view> v(std::begin(kStopwords),
                                    std::end(kStopwords));
    std::sort(v.begin(), v.end());
    return v;
  }();
  return list;
}

std::vector<std::string> clean_tokens(std::string_view text,
                                      const CleanOptions& options) {
  const auto lowered = detail::nfc_lower(text);
  const auto removable = code_points(options.non_informative);

  // Numeric characters are deleted so "100%" does not leave a "%" token
  // behind; punctuation and non-informative characters become separators.
  icu::UnicodeString stage;
  for (int32_t i = 0; i < lowered.length();) {
    UChar32 c = lowered.char32At(i);
    i += U16_LENGTH(c);
    if (is_numeric(c)) continue;
    if (is_punctuation(c)) {
      stage.append(static_cast<UChar32>(' '));
      continue;
    }
    stage.append(c);
  }
  icu::UnicodeString cleaned;
  for (int32_t i = 0; i < stage.length();) {
    UChar32 c = stage.char32At(i);
    i += U16_LENGTH(c);
    if (std::find(removable.begin(), removable.end(), c) != removable.end()) {
      cleaned.append(static_cast<UChar32>(' '));
    } else {
      cleaned.append(c);
    }
  }

  std::vector<std::string> tokens;
  const auto& stop = stopword_set();
  icu::UnicodeString current;
  auto flush = [&] {
    if (current.length() == 0) return;
    std::string word;
    current.toUTF8String(word);
    current.remove();
    if (!stop.contains(word)) tokens.push_back(std::move(word));
  };
  for (int32_t i = 0; i < cleaned.length();) {
    UChar32 c = cleaned.char32At(i);
    i += U16_LENGTH(c);
    if (u_isUWhiteSpace(c) || u_isspace(c)) {
      flush();
    } else {
      current.append(c);
    }
  }
  flush();
  return tokens;
}

bool is_eligible(std::string_view text, const CleanOptions& options) {
  return clean_tokens(text, options).size() >= options.min_tokens;
}

std::string normalized_text(std::string_view text,
                            const CleanOptions& options) {
  std::string out;
  for (const auto& t : clean_tokens(text, options)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string label_key(std::string_view label) {
  std::string out;
  bool pending_space = false;
  for (char c : label) {
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                         : c);
  }
  return out;
}

}  // namespace revlabel
