#include "condexp/rational.hpp"

#include "condexp/errors.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace condexp {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

Integer pow10(unsigned long exponent) {
    Integer result;
    mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
    return result;
}

Rational parse_decimal(std::string_view text, std::string_view original) {
    auto fail = [&] { throw ValidationError("malformed number '" + std::string(original) + "'"); };
    bool negative = false;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    long exponent = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_text = text.substr(e + 1);
        text = text.substr(0, e);
        bool exp_negative = false;
        if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
            exp_negative = exp_text.front() == '-';
            exp_text.remove_prefix(1);
        }
        if (!all_digits(exp_text) || exp_text.size() > 6) fail();
        exponent = std::stol(std::string(exp_text));
        if (exp_negative) exponent = -exponent;
    }
    std::string_view whole = text;
    std::string_view frac;
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        whole = text.substr(0, dot);
        frac = text.substr(dot + 1);
    }
    if (whole.empty() && frac.empty()) fail();
    if (!whole.empty() && !all_digits(whole)) fail();
    if (!frac.empty() && !all_digits(frac)) fail();

    std::string digits = std::string(whole) + std::string(frac);
    Integer mantissa(digits.empty() ? std::string("0") : digits, 10);
    exponent -= static_cast<long>(frac.size());
    Rational value(mantissa);
    if (exponent > 0) {
        value *= pow10(static_cast<unsigned long>(exponent));
    } else if (exponent < 0) {
        value /= pow10(static_cast<unsigned long>(-exponent));
    }
    value.canonicalize();
    return negative ? Rational(-value) : value;
}

} // namespace

Rational parse_rational(std::string_view text) {
    std::string_view original = text;
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    if (text.empty()) throw ValidationError("empty number");

    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::string_view num = text.substr(0, slash);
        std::string_view den = text.substr(slash + 1);
        bool negative = false;
        if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
            negative = num.front() == '-';
            num.remove_prefix(1);
        }
        if (!all_digits(num) || !all_digits(den)) {
            throw ValidationError("malformed rational '" + std::string(original) + "'");
        }
        Integer p(std::string(num), 10);
        Integer q(std::string(den), 10);
        if (q == 0) throw ValidationError("zero denominator in '" + std::string(original) + "'");
        Rational value(negative ? Integer(-p) : p, q);
        value.canonicalize();
        return value;
    }
    return parse_decimal(text, original);
}

Rational rational_from_double(double value) {
    if (!std::isfinite(value)) throw DomainError("non-finite value cannot be made rational");
    Rational r(value);
    r.canonicalize();
    return r;
}

std::string to_fraction_string(const Rational& value) {
    Rational v = value;
    v.canonicalize();
    return v.get_num().get_str() + "/" + v.get_den().get_str();
}

std::string to_display_string(const Rational& value) {
    Rational v = value;
    v.canonicalize();
    return v.get_str();
}

void normalize_to_primitive_integers(std::vector<Rational>& values) {
    Integer lcm_den = 1;
    for (const auto& v : values) {
        if (v != 0) mpz_lcm(lcm_den.get_mpz_t(), lcm_den.get_mpz_t(), v.get_den_mpz_t());
    }
    Integer gcd_num = 0;
    for (auto& v : values) {
        v *= lcm_den;
        v.canonicalize();
        mpz_gcd(gcd_num.get_mpz_t(), gcd_num.get_mpz_t(), v.get_num_mpz_t());
    }
    if (gcd_num == 0 || gcd_num == 1) return;
    for (auto& v : values) {
        v /= gcd_num;
        v.canonicalize();
    }
}

} // namespace condexp
