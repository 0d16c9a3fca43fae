#include "vrpsd/rational.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace vrpsd {

BigInt rat_floor(const Rational& q) {
    BigInt num = numerator(q);
    BigInt den = denominator(q);
    BigInt t = num / den;  // truncates toward zero
    if (num < 0 && t * den != num) {
        t -= 1;
    }
    return t;
}

BigInt rat_ceil(const Rational& q) {
    BigInt num = numerator(q);
    BigInt den = denominator(q);
    BigInt t = num / den;
    if (num > 0 && t * den != num) {
        t += 1;
    }
    return t;
}

Rational rational_from_double(double value) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument("rational_from_double: non-finite value");
    }
    if (value == 0.0) return Rational(0);
    int exp = 0;
    double mant = std::frexp(value, &exp);  // value = mant * 2^exp, |mant| in [0.5, 1)
    // 53 doublings make the mantissa integral.
    long long m = static_cast<long long>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r(m);
    BigInt two(2);
    if (exp >= 0) {
        r *= Rational(pow(two, static_cast<unsigned>(exp)));
    } else {
        r /= Rational(pow(two, static_cast<unsigned>(-exp)));
    }
    return r;
}

namespace {

BigInt parse_bigint(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) throw std::invalid_argument("bad integer literal: " + s);
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            throw std::invalid_argument("bad integer literal: " + s);
        }
    }
    return BigInt(s);
}

}  // namespace

Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        BigInt num = parse_bigint(text.substr(0, slash));
        BigInt den = parse_bigint(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator: " + text);
        return Rational(num) / Rational(den);
    }
    // Decimal form: [sign] digits [. digits] [e/E [sign] digits]
    std::string body = text;
    long long exp10 = 0;
    auto e = body.find_first_of("eE");
    if (e != std::string::npos) {
        exp10 = std::stoll(body.substr(e + 1));
        body = body.substr(0, e);
    }
    bool neg = false;
    std::size_t i = 0;
    if (!body.empty() && (body[0] == '+' || body[0] == '-')) {
        neg = body[0] == '-';
        i = 1;
    }
    std::string digits;
    long long frac_digits = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    for (; i < body.size(); ++i) {
        char c = body[i];
        if (c == '.') {
            if (seen_dot) throw std::invalid_argument("bad rational literal: " + text);
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            digits.push_back(c);
            seen_digit = true;
            if (seen_dot) ++frac_digits;
        } else {
            throw std::invalid_argument("bad rational literal: " + text);
        }
    }
    if (!seen_digit) throw std::invalid_argument("bad rational literal: " + text);
    Rational r(BigInt(digits.empty() ? "0" : digits));
    long long net = exp10 - frac_digits;
    BigInt ten(10);
    if (net > 0) {
        r *= Rational(pow(ten, static_cast<unsigned>(net)));
    } else if (net < 0) {
        r /= Rational(pow(ten, static_cast<unsigned>(-net)));
    }
    return neg ? -r : r;
}

std::string format_rational(const Rational& q) {
    if (denominator(q) == 1) {
        return numerator(q).str();
    }
    return numerator(q).str() + "/" + denominator(q).str();
}

}  // namespace vrpsd
