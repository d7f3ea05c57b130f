#pragma once

#include <gmpxx.h>

#include <compare>
#include <ostream>
#include <string>
#include <string_view>

#include "ncclock/error.hpp"

namespace ncclock {

using Rational = mpq_class;

// Accepts "p/q", integers, and decimal or scientific literals ("0.0002", "4e-9").
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

Rational rational_floor(const Rational& q);
Rational rational_ceil(const Rational& q);
// Largest multiple of 10^-digits not exceeding sqrt(q).
Rational sqrt_floor(const Rational& q, unsigned digits);

// A rational or +infinity.
class ExtRational {
public:
    ExtRational() = default;
    ExtRational(Rational v) : value_(std::move(v)) {}
    ExtRational(long v) : value_(v) {}
    static ExtRational infinity() {
        ExtRational e;
        e.infinite_ = true;
        return e;
    }

    bool is_infinite() const { return infinite_; }
    bool is_finite() const { return !infinite_; }
    const Rational& value() const;

    friend bool operator==(const ExtRational& a, const ExtRational& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.value_ == b.value_;
    }
    friend std::strong_ordering operator<=>(const ExtRational& a, const ExtRational& b) {
        if (a.infinite_ && b.infinite_) return std::strong_ordering::equal;
        if (a.infinite_) return std::strong_ordering::greater;
        if (b.infinite_) return std::strong_ordering::less;
        int c = cmp(a.value_, b.value_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }
    friend ExtRational operator+(const ExtRational& a, const ExtRational& b) {
        if (a.infinite_ || b.infinite_) return infinity();
        return ExtRational(Rational(a.value_ + b.value_));
    }

private:
    Rational value_{0};
    bool infinite_ = false;
};

std::string to_string(const ExtRational& e);
ExtRational parse_ext_rational(std::string_view text);
std::ostream& operator<<(std::ostream& os, const ExtRational& e);

}  // namespace ncclock
