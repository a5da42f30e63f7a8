#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace pdms {

using Tuple = std::vector<std::string>;
using TupleSet = std::set<Tuple>;

/// Stored data: a set of constant tuples per (peer, relation). Set
/// semantics throughout; virtual relations never hold tuples.
struct Instance {
    std::map<std::pair<std::string, std::string>, TupleSet> relations;

    const TupleSet& tuples(const std::string& peer, const std::string& relation) const {
        static const TupleSet empty;
        auto it = relations.find({peer, relation});
        return it == relations.end() ? empty : it->second;
    }
    void add(const std::string& peer, const std::string& relation, Tuple t) {
        relations[{peer, relation}].insert(std::move(t));
    }
    std::size_t total_tuples() const {
        std::size_t n = 0;
        for (const auto& [_, ts] : relations) n += ts.size();
        return n;
    }

    friend bool operator==(const Instance&, const Instance&) = default;
};

}  // namespace pdms
