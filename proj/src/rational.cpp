#include "rpomdp/rational.hpp"

#include <cctype>

namespace rpomdp {

namespace {

using Integer = boost::multiprecision::mpz_int;

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational result;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = text.substr(0, slash);
    auto den = text.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) return std::nullopt;
    Integer d{std::string(den)};
    if (d == 0) return std::nullopt;
    result = Rational(Integer(std::string(num)), d);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto whole = text.substr(0, dot);
    auto frac = text.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    if (!whole.empty() && !all_digits(whole)) return std::nullopt;
    if (!frac.empty() && !all_digits(frac)) return std::nullopt;
    Integer scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    Integer w = whole.empty() ? Integer(0) : Integer(std::string(whole));
    Integer f = frac.empty() ? Integer(0) : Integer(std::string(frac));
    result = Rational(w * scale + f, scale);
  } else {
    if (!all_digits(text)) return std::nullopt;
    result = Rational(Integer(std::string(text)));
  }
  return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& value) {
  Integer num = boost::multiprecision::numerator(value);
  Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string to_decimal(const Rational& value, int digits) {
  Integer scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = abs(value) * scale;
  Integer num = boost::multiprecision::numerator(scaled);
  Integer den = boost::multiprecision::denominator(scaled);
  Integer rounded = (2 * num + den) / (2 * den);
  std::string body = rounded.str();
  if (digits > 0) {
    if (body.size() <= static_cast<std::size_t>(digits))
      body.insert(0, static_cast<std::size_t>(digits) + 1 - body.size(), '0');
    body.insert(body.size() - static_cast<std::size_t>(digits), ".");
  }
  bool is_zero = rounded == 0;
  return (value < 0 && !is_zero ? "-" : "") + body;
}

Rational abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

}  // namespace rpomdp
