#pragma once

#include <vector>

#include "fairshare/bytes.hpp"
#include "fairshare/errors.hpp"
#include "fairshare/keccak.hpp"

namespace fairshare {

// Binary Merkle tree with domain-separated hashing:
//   leaf  = H(0x00 || index_u32 || data)
//   node  = H(0x01 || left || right)
// An odd node at the end of a level is promoted unchanged, so its path
// simply skips that level.

inline Digest merkle_leaf(uint32_t index, ByteView data) {
    Keccak256 h;
    uint8_t tag = 0x00;
    h.update(ByteView(&tag, 1));
    Bytes idx;
    append_u32(idx, index);
    h.update(idx);
    h.update(data);
    return h.finalize();
}

inline Digest merkle_node(const Digest& left, const Digest& right) {
    Keccak256 h;
    uint8_t tag = 0x01;
    h.update(ByteView(&tag, 1));
    h.update(ByteView(left.data(), left.size()));
    h.update(ByteView(right.data(), right.size()));
    return h.finalize();
}

struct MerklePathNode {
    bool sibling_right;  // sibling sits to the right of the running hash
    Digest sibling;
};

using MerklePath = std::vector<MerklePathNode>;

class MerkleTree {
  public:
    static MerkleTree build(std::vector<Digest> leaves) {
        if (leaves.empty()) throw ConfigError("merkle tree needs at least one leaf");
        MerkleTree t;
        t.levels_.push_back(std::move(leaves));
        while (t.levels_.back().size() > 1) {
            const auto& prev = t.levels_.back();
            std::vector<Digest> next;
            next.reserve((prev.size() + 1) / 2);
            for (size_t i = 0; i + 1 < prev.size(); i += 2)
                next.push_back(merkle_node(prev[i], prev[i + 1]));
            if (prev.size() % 2 == 1) next.push_back(prev.back());
            t.levels_.push_back(std::move(next));
        }
        return t;
    }

    const Digest& root() const { return levels_.back()[0]; }
    size_t leaf_count() const { return levels_[0].size(); }

    MerklePath path(size_t index) const {
        if (index >= leaf_count()) throw ConfigError("merkle path index out of range");
        MerklePath out;
        for (size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
            size_t sib = index ^ 1;
            if (sib < levels_[lvl].size())
                out.push_back({(sib & 1) == 1, levels_[lvl][sib]});
            index /= 2;
        }
        return out;
    }

  private:
    std::vector<std::vector<Digest>> levels_;
};

inline Digest merkle_apply_path(const Digest& leaf, const MerklePath& path) {
    Digest h = leaf;
    for (const auto& node : path)
        h = node.sibling_right ? merkle_node(h, node.sibling) : merkle_node(node.sibling, h);
    return h;
}

inline bool merkle_verify(const Digest& root, uint32_t index, ByteView leaf_data,
                          const MerklePath& path) {
    return merkle_apply_path(merkle_leaf(index, leaf_data), path) == root;
}

}  // namespace fairshare
