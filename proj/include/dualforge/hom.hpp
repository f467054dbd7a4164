#pragma once

#include "dualforge/structure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualforge {

/// A verified total map between carriers. Construction does not re-verify;
/// use is_homomorphism / check_hom to certify.
struct Hom {
    StructurePtr dom;
    StructurePtr cod;
    std::vector<int> map;
};

struct HomViolation {
    enum Kind { Op, Rel } kind;
    std::string symbol;
    Tuple args;       // domain elements witnessing the failure
    std::string what; // rendered description
};

/// True iff `map` preserves every operation and every relation (forward).
/// On failure reports the first violated constraint in canonical order:
/// operations in signature order with argument tuples in lexicographic
/// order, then relations in signature order with tuples in sorted order.
std::optional<HomViolation> check_hom(const std::vector<int>& map, const Structure& a,
                                      const Structure& b);

bool is_homomorphism(const std::vector<int>& map, const Structure& a, const Structure& b);

/// g after f; domains must chain.
std::vector<int> compose_maps(const std::vector<int>& f, const std::vector<int>& g);

bool is_injective(const std::vector<int>& map, int cod_size);

} // namespace dualforge
