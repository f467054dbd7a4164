#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dualforge {

struct OpSym {
    std::string name;
    int arity = 0; // 0 = constant
    friend bool operator==(const OpSym&, const OpSym&) = default;
};

struct RelSym {
    std::string name;
    int arity = 1;
    friend bool operator==(const RelSym&, const RelSym&) = default;
};

/// A first-order signature: operation symbols with arities plus relation
/// symbols with arities. Declared order is part of the identity; two
/// structures are comparable (homs, isos) only over equal signatures.
class Signature {
public:
    Signature() = default;
    Signature(std::vector<OpSym> ops, std::vector<RelSym> rels);

    const std::vector<OpSym>& ops() const { return ops_; }
    const std::vector<RelSym>& rels() const { return rels_; }

    std::optional<int> op_index(const std::string& name) const;
    std::optional<int> rel_index(const std::string& name) const;

    bool has_nullary_op() const;
    bool purely_relational() const { return ops_.empty(); }

    friend bool operator==(const Signature&, const Signature&) = default;

private:
    std::vector<OpSym> ops_;
    std::vector<RelSym> rels_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

SignaturePtr make_signature(std::vector<OpSym> ops, std::vector<RelSym> rels);

} // namespace dualforge
