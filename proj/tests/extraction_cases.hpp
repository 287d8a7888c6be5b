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

#ifndef REVLABEL_TESTS_EXTRACTION_CASES_HPP
#define REVLABEL_TESTS_EXTRACTION_CASES_HPP

// Curated raw model outputs with hand-assigned outcomes under the shipped
// coarse alias table.

#include <string>
#include <vector>

namespace testing {

struct ExtractionCase {
  std::string raw;
  std::string label;   // empty unless status is "ok"
  std::string status;  // ok | ambiguous | parse_failed
};

inline const std::vector<ExtractionCase>& extraction_cases() {
  static const std::vector<ExtractionCase> cases = {
      // single clean answers
      {"Category: Bug Report", "Bug Report", "ok"},
      {"Category: Feature Request", "Feature Request", "ok"},
      {"Category: Other", "Other", "ok"},
      {"bug report", "Bug Report", "ok"},
      {"FEATURE REQUEST", "Feature Request", "ok"},
      {"Category: other.", "Other", "ok"},
      {"**Bug Report**", "Bug Report", "ok"},
      {"Category:\n\nFeature Request\n", "Feature Request", "ok"},
      {"The answer is: Bug-Report", "Bug Report", "ok"},
      {"\"Other\"", "Other", "ok"},
      {"Category: BugReport", "Bug Report", "ok"},
      {"This looks like an enhancement request for offline mode.", "Feature Request", "ok"},
      // several mentions of one category count once
      {"It's a bug \xE2\x80\x94 the app crashes. Definitely a bug report.", "Bug Report", "ok"},
      {"Feature request: the user wants a new feature (dark mode).", "Feature Request", "ok"},
      {"Bug. Bugs like this are bug reports.", "Bug Report", "ok"},
      {"Other (other feedback, not actionable)", "Other", "ok"},
      // substrings inside longer words are not mentions
      {"The user wants a better debug console. Category: Feature Request", "Feature Request", "ok"},
      {"debugging tips", "", "parse_failed"},
      {"Debug", "", "parse_failed"},
      {"It is featured on the store", "", "parse_failed"},
      {"Another satisfied customer", "", "parse_failed"},
      {"The bugfix worked, others agree", "", "parse_failed"},
      // nothing usable
      {"", "", "parse_failed"},
      {"I am unable to determine this.", "", "parse_failed"},
      {"Category: Praise", "", "parse_failed"},
      {"N/A", "", "parse_failed"},
      {"Category: Complaint", "", "parse_failed"},
      // two or more categories
      {"This could be a bug report or a feature request.", "", "ambiguous"},
      {"Bug Report / Other", "", "ambiguous"},
      {"Not a bug; it is a feature request.", "", "ambiguous"},
      {"Category: Other (maybe a feature)", "", "ambiguous"},
      {"Bug Report, Feature Request, Other", "", "ambiguous"},
      {"feature? bug? other?", "", "ambiguous"},
  };
  return cases;
}

}  // namespace testing

#endif  // REVLABEL_TESTS_EXTRACTION_CASES_HPP
