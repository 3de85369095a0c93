#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace kh {

using i64 = std::int64_t;
using u64 = std::uint64_t;

struct parse_error : std::runtime_error {
    int line = 0, col = 0;
    parse_error(const std::string& msg, int line_ = 0, int col_ = 0)
        : std::runtime_error(line_ ? ("line " + std::to_string(line_) + ", col " + std::to_string(col_) + ": " + msg)
                                   : msg),
          line(line_), col(col_) {}
};

struct invalid_move : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct budget_error : std::runtime_error {
    u64 required = 0;
    budget_error(const std::string& msg, u64 required_) : std::runtime_error(msg), required(required_) {}
};

struct overflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline i64 checked_add(i64 a, i64 b) {
    i64 r;
    if (__builtin_add_overflow(a, b, &r)) throw overflow_error("integer overflow in addition");
    return r;
}

inline i64 checked_mul(i64 a, i64 b) {
    i64 r;
    if (__builtin_mul_overflow(a, b, &r)) throw overflow_error("integer overflow in multiplication");
    return r;
}

/// Laurent polynomials in one variable q with int64 coefficients.
class Laurent {
  public:
    Laurent() = default;
    explicit Laurent(i64 c, int exp = 0) {
        if (c) terms_[exp] = c;
    }

    static Laurent q(int exp) { return Laurent(1, exp); }

    bool is_zero() const { return terms_.empty(); }

    i64 coeff(int exp) const {
        auto it = terms_.find(exp);
        return it == terms_.end() ? 0 : it->second;
    }

    Laurent& add(i64 c, int exp) {
        if (!c) return *this;
        i64 r = checked_add(coeff(exp), c);
        if (r)
            terms_[exp] = r;
        else
            terms_.erase(exp);
        return *this;
    }

    Laurent operator+(const Laurent& o) const {
        Laurent r = *this;
        for (auto& [e, c] : o.terms_) r.add(c, e);
        return r;
    }
    Laurent operator-(const Laurent& o) const {
        Laurent r = *this;
        for (auto& [e, c] : o.terms_) r.add(-c, e);
        return r;
    }
    Laurent operator*(const Laurent& o) const {
        Laurent r;
        for (auto& [e1, c1] : terms_)
            for (auto& [e2, c2] : o.terms_) r.add(checked_mul(c1, c2), e1 + e2);
        return r;
    }
    bool operator==(const Laurent& o) const { return terms_ == o.terms_; }
    bool operator!=(const Laurent& o) const { return !(*this == o); }

    Laurent pow(unsigned k) const {
        Laurent r(1);
        for (unsigned i = 0; i < k; ++i) r = r * (*this);
        return r;
    }

    const std::map<int, i64>& terms() const { return terms_; }

    /// "c q^k" term list, ascending exponent; "0" for the zero polynomial.
    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (auto& [e, c] : terms_) {
            if (!first) os << (c > 0 ? " + " : " - ");
            else if (c < 0) os << "-";
            i64 a = c < 0 ? -c : c;
            first = false;
            if (e == 0)
                os << a;
            else {
                if (a != 1) os << a << " ";
                os << "q^" << e;
            }
        }
        return os.str();
    }

  private:
    std::map<int, i64> terms_;
};

inline u64 fnv1a(const std::string& s) {
    u64 h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace kh
