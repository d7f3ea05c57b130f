#include "ncclock/rational.hpp"

#include <cctype>

namespace ncclock {

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidParameter: return "invalid-parameter";
        case ErrorKind::DomainError: return "domain-error";
        case ErrorKind::UnsupportedOperand: return "unsupported-operand";
        case ErrorKind::UnboundedResult: return "unbounded-result";
        case ErrorKind::InvalidClock: return "invalid-clock";
        case ErrorKind::InvalidScript: return "invalid-script";
        case ErrorKind::TraceMismatch: return "trace-mismatch";
        case ErrorKind::ConfigurationInfeasible: return "configuration-infeasible";
        case ErrorKind::UnstableElement: return "unstable-element";
        case ErrorKind::InvalidInput: return "invalid-input";
    }
    return "error";
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Rational pow10(long e) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rational(mpz_class(1), p) : Rational(p);
}

[[noreturn]] void bad(std::string_view text) {
    throw Error(ErrorKind::InvalidInput, "not a rational number: '" + std::string(text) + "'");
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    if (s.empty()) bad(text);

    bool negative = false;
    if (s.front() == '-' || s.front() == '+') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    Rational result;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = s.substr(0, slash);
        auto den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) bad(text);
        mpz_class d(std::string(den), 10);
        if (d == 0) bad(text);
        result = Rational(mpz_class(std::string(num), 10), d);
        result.canonicalize();
    } else {
        long exponent = 0;
        if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
            auto exp_text = s.substr(e + 1);
            bool exp_negative = false;
            if (!exp_text.empty() && (exp_text.front() == '-' || exp_text.front() == '+')) {
                exp_negative = exp_text.front() == '-';
                exp_text.remove_prefix(1);
            }
            if (!all_digits(exp_text) || exp_text.size() > 6) bad(text);
            exponent = std::stol(std::string(exp_text));
            if (exp_negative) exponent = -exponent;
            s = s.substr(0, e);
        }
        std::string digits;
        if (auto dot = s.find('.'); dot != std::string_view::npos) {
            auto whole = s.substr(0, dot);
            auto frac = s.substr(dot + 1);
            if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
                (whole.empty() && frac.empty()))
                bad(text);
            digits = std::string(whole) + std::string(frac);
            exponent -= static_cast<long>(frac.size());
        } else {
            if (!all_digits(s)) bad(text);
            digits = std::string(s);
        }
        result = Rational(mpz_class(digits, 10)) * pow10(exponent);
    }
    return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& q) { return q.get_str(); }

double to_double(const Rational& q) { return q.get_d(); }

Rational rational_floor(const Rational& q) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Rational(r);
}

Rational rational_ceil(const Rational& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Rational(r);
}

Rational sqrt_floor(const Rational& q, unsigned digits) {
    if (q < 0) throw Error(ErrorKind::DomainError, "square root of a negative number");
    Rational scale = pow10(static_cast<long>(2 * digits));
    mpz_class scaled = rational_floor(q * scale).get_num();
    mpz_class root;
    mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
    return Rational(root) / pow10(static_cast<long>(digits));
}

const Rational& ExtRational::value() const {
    if (infinite_) throw Error(ErrorKind::DomainError, "value of +inf requested");
    return value_;
}

std::string to_string(const ExtRational& e) { return e.is_infinite() ? "inf" : to_string(e.value()); }

ExtRational parse_ext_rational(std::string_view text) {
    if (text == "inf" || text == "+inf" || text == "infinity") return ExtRational::infinity();
    return ExtRational(parse_rational(text));
}

std::ostream& operator<<(std::ostream& os, const ExtRational& e) { return os << to_string(e); }

}  // namespace ncclock
