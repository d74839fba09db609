#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace causalkit {

// Variables are dense integer indices 0..|V|-1; graphs carry the name table.
// Sets of variables are bitmasks, which caps a model at 32 variables (the
// exhaustive subset searches below are only practical well under that).
class VarSet {
public:
    constexpr VarSet() = default;
    constexpr explicit VarSet(std::uint32_t bits) : bits_(bits) {}

    static constexpr VarSet all(int n) {
        return VarSet(n >= 32 ? ~0u : ((1u << n) - 1u));
    }
    static constexpr VarSet single(int v) { return VarSet(1u << v); }
    static VarSet of(std::initializer_list<int> vs) {
        VarSet s;
        for (int v : vs) s = s.with(v);
        return s;
    }

    constexpr std::uint32_t bits() const { return bits_; }
    constexpr bool contains(int v) const { return (bits_ >> v) & 1u; }
    constexpr VarSet with(int v) const { return VarSet(bits_ | (1u << v)); }
    constexpr VarSet without(int v) const { return VarSet(bits_ & ~(1u << v)); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr int size() const { return std::popcount(bits_); }
    constexpr bool subset_of(VarSet o) const { return (bits_ & ~o.bits_) == 0; }

    constexpr VarSet operator|(VarSet o) const { return VarSet(bits_ | o.bits_); }
    constexpr VarSet operator&(VarSet o) const { return VarSet(bits_ & o.bits_); }
    constexpr VarSet minus(VarSet o) const { return VarSet(bits_ & ~o.bits_); }
    constexpr bool operator==(const VarSet&) const = default;
    constexpr auto operator<=>(const VarSet&) const = default;

    // Iterates set members in increasing order.
    class iterator {
    public:
        explicit iterator(std::uint32_t bits) : bits_(bits) {}
        int operator*() const { return std::countr_zero(bits_); }
        iterator& operator++() {
            bits_ &= bits_ - 1;
            return *this;
        }
        bool operator!=(const iterator& o) const { return bits_ != o.bits_; }

    private:
        std::uint32_t bits_;
    };
    iterator begin() const { return iterator(bits_); }
    iterator end() const { return iterator(0); }

    std::vector<int> to_vector() const {
        std::vector<int> out;
        out.reserve(size());
        for (int v : *this) out.push_back(v);
        return out;
    }

private:
    std::uint32_t bits_ = 0;
};

// All subsets of `ground`, ordered by increasing size and lexicographically
// (smallest member first) within a size. The order is part of the trace
// contract for the discovery search.
std::vector<VarSet> subsets_sorted(VarSet ground);

// SplitMix64 step; used to derive independent seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based seed split: deterministic function of (base, a, b, c).
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t s = base;
    s ^= splitmix64(a);
    std::uint64_t t = s + 0x632be59bd9b4e019ull * (b + 1);
    s ^= splitmix64(t);
    std::uint64_t u = s + 0x9e3779b97f4a7c15ull * (c + 1);
    return splitmix64(u);
}

}  // namespace causalkit
