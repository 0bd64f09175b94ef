#include "doctest.h"

#include "fdc/finite_type.hpp"

#include <set>
#include <vector>

using namespace fdc;

TEST_SUITE("logic-core") {

TEST_CASE("domain sizes") {
    CHECK(domain_size(FiniteType::nat(63)) == 64);
    CHECK(domain_size(FiniteType::boolean()) == 2);
    CHECK(domain_size(FiniteType::nat(0)) == 1);
}

TEST_CASE("bit widths") {
    CHECK(bit_width(FiniteType::nat(63)) == 6);
    CHECK(bit_width(FiniteType::nat(0)) == 0);
    CHECK(bit_width(FiniteType::nat(4)) == 3);
    CHECK(bit_width(FiniteType::boolean()) == 1);
    CHECK(bit_width(FiniteType::nat(kMaxBound)) == 49);
}

TEST_CASE("width brackets the carrier size") {
    for (Value b = 1; b < 5000; ++b) {
        auto t = FiniteType::nat(b);
        unsigned w = bit_width(t);
        std::uint64_t size = domain_size(t);
        CAPTURE(b);
        CHECK(size <= (std::uint64_t{1} << w));
        CHECK((std::uint64_t{1} << (w - 1)) < size);
    }
}

TEST_CASE("enumeration order") {
    std::vector<Value> xs;
    for (Value v : enumerate_domain(FiniteType::nat(2)))
        xs.push_back(v);
    CHECK(xs == std::vector<Value>{0, 1, 2});

    xs.clear();
    for (Value v : enumerate_domain(FiniteType::boolean()))
        xs.push_back(v);
    CHECK(xs == std::vector<Value>{0, 1}); // false, true
}

TEST_CASE("enumeration is lazy") {
    std::uint64_t produced = 0;
    auto r = enumerate_domain(FiniteType::nat(63), &produced);
    auto it = r.begin();
    CHECK(*it == 0);
    CHECK(produced == 1);
    ++it;
    CHECK(produced == 2);
}

TEST_CASE("enumeration yields every element once") {
    for (Value b : {0u, 1u, 5u, 16u, 255u}) {
        std::uint64_t produced = 0;
        std::set<Value> seen;
        std::size_t n = 0;
        for (Value v : enumerate_domain(FiniteType::nat(b), &produced)) {
            seen.insert(v);
            ++n;
        }
        CHECK(n == domain_size(FiniteType::nat(b)));
        CHECK(seen.size() == n);
        CHECK(produced == n);
    }
}

}
