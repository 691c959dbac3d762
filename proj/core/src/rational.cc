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

#include "refine/rational.h"

#include <charconv>
#include <cstdlib>
#include <string>

namespace refine {
namespace {

bool AllDigits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

std::optional<std::int64_t> ToInt(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string Int128ToString(__int128 v) {
  if (v == 0) return "0";
  bool negative = v < 0;
  unsigned __int128 u = negative ? static_cast<unsigned __int128>(-v)
                                 : static_cast<unsigned __int128>(v);
  std::string out;
  while (u > 0) {
    out.insert(out.begin(), static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (negative) out.insert(out.begin(), '-');
  return out;
}

// Renders `scaled / 10^places` with trailing fractional zeros trimmed.
std::string FormatScaled(__int128 scaled, int places) {
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  __int128 pow10 = 1;
  for (int i = 0; i < places; ++i) pow10 *= 10;
  std::string whole = Int128ToString(scaled / pow10);
  std::string frac = Int128ToString(scaled % pow10);
  frac.insert(frac.begin(), static_cast<std::size_t>(places) - frac.size(),
              '0');
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = negative ? "-" + whole : whole;
  if (!frac.empty()) out += "." + frac;
  return out;
}

}  // namespace

std::optional<Rational> ParseRational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = ToInt(text.substr(0, slash));
    auto den = ToInt(text.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    return Rational(*num, *den);
  }
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  std::string_view whole = body;
  std::string_view frac;
  if (auto dot = body.find('.'); dot != std::string_view::npos) {
    whole = body.substr(0, dot);
    frac = body.substr(dot + 1);
    if (!AllDigits(frac)) return std::nullopt;
    if (whole.empty()) whole = "0";
  }
  if (!AllDigits(whole) || frac.size() > 18) return std::nullopt;
  std::string digits = std::string(whole) + std::string(frac);
  auto numerator = ToInt(digits);
  if (!numerator) return std::nullopt;
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  Rational r(*numerator, den);
  return negative ? -r : r;
}

std::string FormatRational(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  constexpr int kPlaces = 6;
  __int128 num = value.numerator();
  __int128 den = value.denominator();
  __int128 scaled = num * 1000000;
  __int128 q = scaled / den;
  __int128 r = scaled % den;
  if (r < 0) r = -r;
  if (2 * r >= den) q += (scaled < 0 ? -1 : 1);
  return FormatScaled(q, kPlaces);
}

std::string FormatExact(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  std::int64_t den = value.denominator();
  __int128 pow10 = 1;
  for (int places = 1; places <= 18; ++places) {
    pow10 *= 10;
    if (pow10 % den == 0) {
      __int128 scaled = static_cast<__int128>(value.numerator()) * (pow10 / den);
      return FormatScaled(scaled, places);
    }
  }
  return std::to_string(value.numerator()) + "/" + std::to_string(den);
}

Rational RationalFromDouble(double value) {
  char buf[64];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed);
  if (ec == std::errc()) {
    if (auto r = ParseRational(std::string_view(buf, ptr - buf))) return *r;
  }
  // Too many digits for an exact int64 rational; settle for 1e-9 resolution.
  const auto scaled = static_cast<std::int64_t>(value * 1e9 + (value < 0 ? -0.5 : 0.5));
  return Rational(scaled, 1000000000);
}

double ToDouble(const Rational& value) {
  return static_cast<double>(value.numerator()) /
         static_cast<double>(value.denominator());
}

}  // namespace refine
