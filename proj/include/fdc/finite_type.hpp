#ifndef FDC_FINITE_TYPE_HPP
#define FDC_FINITE_TYPE_HPP

#include <cstdint>
#include <iterator>
#include <string>

namespace fdc {

// Carrier values of every finite type are encoded as naturals: Nat(b) uses
// 0..b directly, Bool uses 0 (false) and 1 (true).
using Value = std::uint64_t;

// Largest admissible inclusive bound; keeps sizes and products of bounds
// representable.
inline constexpr Value kMaxBound = (Value{1} << 48);

class FiniteType {
  public:
    enum class Kind { Nat, Bool };

    FiniteType() = default;
    static FiniteType nat(Value bound) { return FiniteType(Kind::Nat, bound); }
    static FiniteType boolean() { return FiniteType(Kind::Bool, 1); }

    Kind kind() const { return kind_; }
    bool is_bool() const { return kind_ == Kind::Bool; }
    bool is_nat() const { return kind_ == Kind::Nat; }
    // Inclusive maximum of the carrier (1 for Bool).
    Value bound() const { return bound_; }

    bool contains(Value v) const { return v <= bound_; }

    std::string to_string() const;

    friend bool operator==(const FiniteType&, const FiniteType&) = default;

  private:
    FiniteType(Kind k, Value b) : kind_(k), bound_(b) {}
    Kind kind_ = Kind::Nat;
    Value bound_ = 0;
};

std::uint64_t domain_size(const FiniteType& t);

// ceil(log2(domain_size(t))); 0 for singleton carriers.
unsigned bit_width(const FiniteType& t);

// Bit width needed for any natural up to `bound` inclusive.
unsigned bit_width_for_bound(Value bound);

// Lazy, ascending enumeration of a carrier. Elements are produced one at a
// time; `produced`, when given, counts how many elements were materialized.
class DomainRange {
  public:
    class iterator {
      public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Value;
        using difference_type = std::ptrdiff_t;

        iterator() = default;
        iterator(Value first, Value last, std::uint64_t* produced)
            : current_(first), last_(last), produced_(produced), done_(false) {
            note();
        }

        Value operator*() const { return current_; }
        iterator& operator++() {
            if (current_ == last_)
                done_ = true;
            else {
                ++current_;
                note();
            }
            return *this;
        }
        void operator++(int) { ++*this; }
        bool operator==(std::default_sentinel_t) const { return done_; }

      private:
        void note() {
            if (produced_)
                ++*produced_;
        }
        Value current_ = 0;
        Value last_ = 0;
        std::uint64_t* produced_ = nullptr;
        bool done_ = true;
    };

    DomainRange(const FiniteType& t, std::uint64_t* produced)
        : last_(t.bound()), produced_(produced) {}

    iterator begin() const { return iterator(0, last_, produced_); }
    std::default_sentinel_t end() const { return {}; }

  private:
    Value last_;
    std::uint64_t* produced_;
};

DomainRange enumerate_domain(const FiniteType& t,
                             std::uint64_t* produced = nullptr);

} // namespace fdc

#endif
