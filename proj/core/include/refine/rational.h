// Copyright 2026 The refine-loop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REFINE_RATIONAL_H_
#define REFINE_RATIONAL_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

namespace refine {

using Rational = boost::rational<std::int64_t>;

// Parses "12", "0.25", "-3.5" or "7/3" exactly. Returns nullopt on anything
// else.
std::optional<Rational> ParseRational(std::string_view text);

// Integer when the denominator is 1, otherwise a decimal rounded half away
// from zero to at most 6 places with trailing zeros trimmed.
std::string FormatRational(const Rational& value);

// Exact rendering: integers as-is, terminating decimals in full, anything
// else as "p/q". ParseRational(FormatExact(v)) == v for every v.
std::string FormatExact(const Rational& value);

// Converts a JSON-ish double (e.g. a dataset answer) to the rational it was
// most likely written as, using its shortest round-trip decimal spelling.
Rational RationalFromDouble(double value);

double ToDouble(const Rational& value);

}  // namespace refine

#endif  // REFINE_RATIONAL_H_
