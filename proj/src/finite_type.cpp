#include "fdc/finite_type.hpp"

#include <bit>

namespace fdc {

std::string FiniteType::to_string() const {
    if (is_bool())
        return "bool";
    return "nat[" + std::to_string(bound_) + "]";
}

std::uint64_t domain_size(const FiniteType& t) { return t.bound() + 1; }

unsigned bit_width_for_bound(Value bound) {
    // Values 0..bound need as many bits as the bound itself.
    return static_cast<unsigned>(std::bit_width(bound));
}

unsigned bit_width(const FiniteType& t) {
    return bit_width_for_bound(t.bound());
}

DomainRange enumerate_domain(const FiniteType& t, std::uint64_t* produced) {
    return DomainRange(t, produced);
}

} // namespace fdc
