#include "dualforge/hom.hpp"

#include "dualforge/errors.hpp"

#include <sstream>

namespace dualforge {

namespace {

std::string render_tuple(const Tuple& t) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        os << t[i];
    }
    os << ")";
    return os.str();
}

} // namespace

std::optional<HomViolation> check_hom(const std::vector<int>& map, const Structure& a,
                                      const Structure& b) {
    if (!(*a.sig() == *b.sig()))
        throw SignatureMismatch("check_hom requires equal signatures");
    if (static_cast<int>(map.size()) != a.size())
        throw ValidationFailed("map is not total on the domain carrier");
    for (int v : map)
        if (v < 0 || v >= b.size())
            throw ValidationFailed("map value out of codomain range");

    const auto& ops = a.sig()->ops();
    for (size_t oi = 0; oi < ops.size(); ++oi) {
        const int ar = ops[oi].arity;
        if (a.size() == 0) continue; // no rows; nullary on empty is ruled out by validate
        Tuple args(ar, 0);
        while (true) {
            int lhs = map[a.apply(static_cast<int>(oi), args)];
            Tuple imgs(ar);
            for (int j = 0; j < ar; ++j) imgs[j] = map[args[j]];
            int rhs = b.apply(static_cast<int>(oi), imgs);
            if (lhs != rhs) {
                HomViolation v;
                v.kind = HomViolation::Op;
                v.symbol = ops[oi].name;
                v.args = args;
                v.what = "h(" + ops[oi].name + render_tuple(args) + ") = " +
                         std::to_string(lhs) + " but " + ops[oi].name +
                         "(h args) = " + std::to_string(rhs);
                return v;
            }
            if (ar == 0) break;
            int pos = ar - 1;
            while (pos >= 0) {
                if (++args[pos] < a.size()) break;
                args[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }

    const auto& rels = a.sig()->rels();
    for (size_t ri = 0; ri < rels.size(); ++ri) {
        for (const auto& t : a.relset(static_cast<int>(ri))) {
            Tuple imgs(t.size());
            for (size_t j = 0; j < t.size(); ++j) imgs[j] = map[t[j]];
            if (!b.rel_holds(static_cast<int>(ri), imgs)) {
                HomViolation v;
                v.kind = HomViolation::Rel;
                v.symbol = rels[ri].name;
                v.args = t;
                v.what = render_tuple(t) + " in " + rels[ri].name + " but image " +
                         render_tuple(imgs) + " is not";
                return v;
            }
        }
    }
    return std::nullopt;
}

bool is_homomorphism(const std::vector<int>& map, const Structure& a, const Structure& b) {
    return !check_hom(map, a, b).has_value();
}

std::vector<int> compose_maps(const std::vector<int>& f, const std::vector<int>& g) {
    std::vector<int> out(f.size());
    for (size_t i = 0; i < f.size(); ++i) out[i] = g[f[i]];
    return out;
}

bool is_injective(const std::vector<int>& map, int cod_size) {
    std::vector<char> used(static_cast<size_t>(std::max(cod_size, 1)), 0);
    for (int v : map) {
        if (used[v]) return false;
        used[v] = 1;
    }
    return true;
}

} // namespace dualforge
