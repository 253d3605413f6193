#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "fairshare/aead.hpp"
#include "fairshare/bytes.hpp"
#include "fairshare/errors.hpp"
#include "fairshare/keccak.hpp"
#include "fairshare/merkle.hpp"

namespace fairshare {

// Commit-reveal file exchange in the FairSwap style, reduced to a chunk-digest
// predicate: the seller commits to Merkle roots over the encrypted chunks
// (r_z) and over the plaintext chunk digests (r_phi); the on-chain file digest
// h1 is itself computed from the chunk digests, so a commitment that verifies
// against h1 binds the exchange to the agreed file.

inline constexpr uint32_t kDefaultChunkSize = 4096;
inline constexpr uint16_t kMaxChunkCount = 65535;

struct ChunkedFile {
    std::vector<Bytes> chunks;  // every chunk padded to chunk_size
    uint32_t chunk_size = 0;
    uint64_t original_len = 0;
};

inline ChunkedFile chunk_file(ByteView data, uint32_t chunk_size) {
    if (chunk_size == 0) throw ConfigError("chunk_size must be positive");
    ChunkedFile cf;
    cf.chunk_size = chunk_size;
    cf.original_len = data.size();
    size_t count = data.empty() ? 1 : (data.size() + chunk_size - 1) / chunk_size;
    if (count > kMaxChunkCount) throw ConfigError("file too large for chunk count limit");
    cf.chunks.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        Bytes chunk(chunk_size, 0);
        size_t off = i * chunk_size;
        size_t n = off < data.size() ? std::min<size_t>(chunk_size, data.size() - off) : 0;
        if (n > 0) std::memcpy(chunk.data(), data.data() + off, n);
        cf.chunks.push_back(std::move(chunk));
    }
    return cf;
}

inline Bytes assemble_file(const std::vector<Bytes>& chunks, uint64_t original_len) {
    Bytes out;
    out.reserve(original_len);
    for (const auto& c : chunks) append(out, c);
    out.resize(original_len);
    return out;
}

inline std::vector<Digest> chunk_digests(const ChunkedFile& cf) {
    std::vector<Digest> phi;
    phi.reserve(cf.chunks.size());
    for (const auto& c : cf.chunks) phi.push_back(keccak256(c));
    return phi;
}

// Chunk-aware file digest: H(0x02 || len_u64 || phi_0 || ... || phi_{n-1}).
// Used wherever the protocol stores or compares "the hash of the file".
inline Digest file_digest_from_parts(uint64_t original_len, const std::vector<Digest>& phi) {
    Keccak256 h;
    uint8_t tag = 0x02;
    h.update(ByteView(&tag, 1));
    Bytes len;
    append_u64(len, original_len);
    h.update(len);
    for (const auto& d : phi) h.update(ByteView(d.data(), d.size()));
    return h.finalize();
}

inline Digest file_digest(ByteView data, uint32_t chunk_size = kDefaultChunkSize) {
    ChunkedFile cf = chunk_file(data, chunk_size);
    return file_digest_from_parts(cf.original_len, chunk_digests(cf));
}

struct ExchangeCommitment {
    Digest c{};      // H(0x04 || r_z || r_phi || count_u16 || chunk_size_u32)
    Digest r_z{};    // Merkle root over encrypted chunks
    Digest r_phi{};  // Merkle root over plaintext chunk digests
    uint16_t count = 0;
    uint32_t chunk_size = 0;
};

inline Digest commitment_digest(const Digest& r_z, const Digest& r_phi, uint16_t count,
                                uint32_t chunk_size) {
    Keccak256 h;
    uint8_t tag = 0x04;
    h.update(ByteView(&tag, 1));
    h.update(ByteView(r_z.data(), r_z.size()));
    h.update(ByteView(r_phi.data(), r_phi.size()));
    Bytes tail;
    append_u16(tail, count);
    append_u32(tail, chunk_size);
    h.update(tail);
    return h.finalize();
}

// What the seller ships to the buyer off-chain alongside the on-chain
// commitment.
struct SellerPackage {
    std::vector<Bytes> z;      // encrypted chunks, z_i = Enc_k(nonce=i, chunk_i)
    std::vector<Digest> phi;   // plaintext chunk digests
    uint64_t file_len = 0;     // |f'| before padding
};

inline uint64_t package_wire_size(const SellerPackage& pkg) {
    uint64_t n = 8;  // file_len
    for (const auto& zi : pkg.z) n += zi.size();
    n += 32 * pkg.phi.size();
    return n;
}

struct CommitResult {
    ExchangeCommitment commitment;
    SellerPackage package;
};

inline std::vector<Digest> z_leaves(const std::vector<Bytes>& z) {
    std::vector<Digest> leaves;
    leaves.reserve(z.size());
    for (size_t i = 0; i < z.size(); ++i)
        leaves.push_back(merkle_leaf(uint32_t(i), z[i]));
    return leaves;
}

inline std::vector<Digest> phi_leaves(const std::vector<Digest>& phi) {
    std::vector<Digest> leaves;
    leaves.reserve(phi.size());
    for (size_t i = 0; i < phi.size(); ++i)
        leaves.push_back(merkle_leaf(uint32_t(i), ByteView(phi[i].data(), phi[i].size())));
    return leaves;
}

inline CommitResult commit_from_chunks(const std::vector<Bytes>& plain_chunks,
                                       uint64_t file_len, const std::vector<Digest>& phi,
                                       const SymKey& k, uint32_t chunk_size) {
    SellerPackage pkg;
    pkg.file_len = file_len;
    pkg.phi = phi;
    pkg.z.reserve(plain_chunks.size());
    for (size_t i = 0; i < plain_chunks.size(); ++i)
        pkg.z.push_back(sym_encrypt(k, counter_nonce(i), plain_chunks[i]));

    ExchangeCommitment cm;
    cm.count = static_cast<uint16_t>(plain_chunks.size());
    cm.chunk_size = chunk_size;
    cm.r_z = MerkleTree::build(z_leaves(pkg.z)).root();
    cm.r_phi = MerkleTree::build(phi_leaves(pkg.phi)).root();
    cm.c = commitment_digest(cm.r_z, cm.r_phi, cm.count, cm.chunk_size);
    return CommitResult{cm, std::move(pkg)};
}

inline CommitResult seller_commit(ByteView fprime, const SymKey& k,
                                  uint32_t chunk_size = kDefaultChunkSize) {
    ChunkedFile cf = chunk_file(fprime, chunk_size);
    return commit_from_chunks(cf.chunks, cf.original_len, chunk_digests(cf), k, chunk_size);
}

// Dishonest-seller variant: corrupts one plaintext chunk before encryption
// while keeping the true digest list, so the commitment still binds to h1.
// Used by the malicious-cloud scenarios and the misbehavior-proof tests.
inline CommitResult seller_commit_corrupted(ByteView fprime, const SymKey& k,
                                            uint32_t chunk_size, size_t corrupt_index,
                                            uint8_t xor_mask = 0x01, size_t byte_offset = 0) {
    ChunkedFile cf = chunk_file(fprime, chunk_size);
    std::vector<Digest> phi = chunk_digests(cf);
    cf.chunks.at(corrupt_index)[byte_offset % chunk_size] ^= xor_mask;
    return commit_from_chunks(cf.chunks, cf.original_len, phi, k, chunk_size);
}

// Buyer-side check before locking coins: roots recompute from the delivered
// package, the commitment digest is consistent, and the digest list binds to
// the agreed on-chain file hash h1.
inline bool buyer_verify_commitment(const SellerPackage& pkg, const ExchangeCommitment& cm,
                                    const Digest& h1) {
    if (pkg.z.empty() || pkg.z.size() != pkg.phi.size()) return false;
    if (pkg.z.size() != cm.count) return false;
    size_t expect = pkg.file_len == 0 ? 1 : (pkg.file_len + cm.chunk_size - 1) / cm.chunk_size;
    if (pkg.z.size() != expect) return false;
    if (MerkleTree::build(z_leaves(pkg.z)).root() != cm.r_z) return false;
    if (MerkleTree::build(phi_leaves(pkg.phi)).root() != cm.r_phi) return false;
    if (commitment_digest(cm.r_z, cm.r_phi, cm.count, cm.chunk_size) != cm.c) return false;
    return file_digest_from_parts(pkg.file_len, pkg.phi) == h1;
}

struct MisbehaviorProof {
    uint32_t index = 0;
    Bytes z_i;
    MerklePath path_z;
    Digest expected_digest{};  // promised plaintext chunk digest phi_i
    MerklePath path_phi;
};

// After the key reveal the buyer either reconstructs f' or produces evidence
// for the first chunk whose decryption contradicts the committed digest. An
// AEAD failure counts as a mismatch.
inline std::variant<Bytes, MisbehaviorProof> buyer_open(const SellerPackage& pkg,
                                                        const ExchangeCommitment& cm,
                                                        const SymKey& k, const Digest& h1) {
    std::vector<Bytes> chunks;
    chunks.reserve(pkg.z.size());
    std::optional<uint32_t> bad;
    for (size_t i = 0; i < pkg.z.size(); ++i) {
        auto pt = sym_open(k, counter_nonce(i), pkg.z[i]);
        if (!pt || keccak256(*pt) != pkg.phi[i]) {
            bad = uint32_t(i);
            break;
        }
        chunks.push_back(std::move(*pt));
    }
    if (bad) {
        MerkleTree tz = MerkleTree::build(z_leaves(pkg.z));
        MerkleTree tp = MerkleTree::build(phi_leaves(pkg.phi));
        MisbehaviorProof proof;
        proof.index = *bad;
        proof.z_i = pkg.z[*bad];
        proof.path_z = tz.path(*bad);
        proof.expected_digest = pkg.phi[*bad];
        proof.path_phi = tp.path(*bad);
        return proof;
    }
    Bytes fprime = assemble_file(chunks, pkg.file_len);
    if (file_digest_from_parts(pkg.file_len, pkg.phi) != h1)
        throw CryptoError("opened file inconsistent with agreed digest");
    return fprime;
}

// Judge-side verification: both paths must authenticate under the committed
// roots and the revealed key must decrypt z_i to something that contradicts
// the promised digest.
inline bool judge_verify_proof(const ExchangeCommitment& cm, const SymKey& k,
                               const MisbehaviorProof& proof) {
    if (!merkle_verify(cm.r_z, proof.index, proof.z_i, proof.path_z)) return false;
    if (!merkle_verify(cm.r_phi, proof.index,
                       ByteView(proof.expected_digest.data(), proof.expected_digest.size()),
                       proof.path_phi))
        return false;
    auto pt = sym_open(k, counter_nonce(proof.index), proof.z_i);
    if (!pt) return true;  // decrypt failure is misbehavior
    return keccak256(*pt) != proof.expected_digest;
}

// ---- proof serialization (fixed field order, length-prefixed paths) -------

inline void ser_path(Bytes& out, const MerklePath& path) {
    append_u16(out, static_cast<uint16_t>(path.size()));
    for (const auto& n : path) {
        out.push_back(n.sibling_right ? 1 : 0);
        append(out, ByteView(n.sibling.data(), n.sibling.size()));
    }
}

inline MerklePath de_path(ByteView in, size_t& off) {
    if (off + 2 > in.size()) throw DecodeError("truncated merkle path");
    size_t n = read_u16(in, off);
    off += 2;
    MerklePath path;
    path.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        if (off + 33 > in.size()) throw DecodeError("truncated merkle path node");
        MerklePathNode node;
        node.sibling_right = in[off] != 0;
        std::memcpy(node.sibling.data(), in.data() + off + 1, 32);
        off += 33;
        path.push_back(node);
    }
    return path;
}

inline Bytes ser_proof(const MisbehaviorProof& proof) {
    Bytes out;
    append_u32(out, proof.index);
    append_u32(out, static_cast<uint32_t>(proof.z_i.size()));
    append(out, proof.z_i);
    ser_path(out, proof.path_z);
    append(out, ByteView(proof.expected_digest.data(), proof.expected_digest.size()));
    ser_path(out, proof.path_phi);
    return out;
}

inline MisbehaviorProof de_proof(ByteView in) {
    if (in.size() < 8) throw DecodeError("truncated proof");
    MisbehaviorProof proof;
    proof.index = read_u32(in, 0);
    size_t zlen = read_u32(in, 4);
    size_t off = 8;
    if (off + zlen > in.size()) throw DecodeError("truncated proof chunk");
    proof.z_i.assign(in.begin() + off, in.begin() + off + zlen);
    off += zlen;
    proof.path_z = de_path(in, off);
    if (off + 32 > in.size()) throw DecodeError("truncated proof digest");
    std::memcpy(proof.expected_digest.data(), in.data() + off, 32);
    off += 32;
    proof.path_phi = de_path(in, off);
    if (off != in.size()) throw DecodeError("trailing bytes in proof");
    return proof;
}

}  // namespace fairshare
