#include "dualforge/signature.hpp"

#include "dualforge/errors.hpp"

#include <set>

namespace dualforge {

Signature::Signature(std::vector<OpSym> ops, std::vector<RelSym> rels)
    : ops_(std::move(ops)), rels_(std::move(rels)) {
    std::set<std::string> seen;
    for (const auto& op : ops_) {
        if (op.arity < 0)
            throw ValidationFailed("operation symbol '" + op.name + "' has negative arity");
        if (!seen.insert(op.name).second)
            throw ValidationFailed("duplicate symbol '" + op.name + "' in signature");
    }
    for (const auto& rel : rels_) {
        if (rel.arity < 1)
            throw ValidationFailed("relation symbol '" + rel.name + "' must have arity >= 1");
        if (!seen.insert(rel.name).second)
            throw ValidationFailed("duplicate symbol '" + rel.name + "' in signature");
    }
}

std::optional<int> Signature::op_index(const std::string& name) const {
    for (size_t i = 0; i < ops_.size(); ++i)
        if (ops_[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::optional<int> Signature::rel_index(const std::string& name) const {
    for (size_t i = 0; i < rels_.size(); ++i)
        if (rels_[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

bool Signature::has_nullary_op() const {
    for (const auto& op : ops_)
        if (op.arity == 0) return true;
    return false;
}

SignaturePtr make_signature(std::vector<OpSym> ops, std::vector<RelSym> rels) {
    return std::make_shared<const Signature>(std::move(ops), std::move(rels));
}

} // namespace dualforge
