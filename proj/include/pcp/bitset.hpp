#ifndef PCP_BITSET_HPP
#define PCP_BITSET_HPP

#include <bit>
#include <cstdint>
#include <vector>

namespace pcp {

// Small runtime-sized bitset used for adjacency rows and independent-set
// search. Word count is fixed at construction.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(int nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0ULL) {}

    int size() const { return nbits_; }

    bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
    void set(int i) { words_[i >> 6] |= (1ULL << (i & 63)); }
    void reset(int i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }
    void clear() { for (auto& w : words_) w = 0ULL; }

    int count() const {
        int c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }

    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    bool intersects(const Bitset& o) const {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k] & o.words_[k]) return true;
        return false;
    }

    Bitset& operator|=(const Bitset& o) {
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= o.words_[k];
        return *this;
    }

    Bitset& operator&=(const Bitset& o) {
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= o.words_[k];
        return *this;
    }

    // this &= ~o
    Bitset& and_not(const Bitset& o) {
        for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~o.words_[k];
        return *this;
    }

    int lowest() const {
        for (std::size_t k = 0; k < words_.size(); ++k)
            if (words_[k]) return static_cast<int>(k) * 64 + std::countr_zero(words_[k]);
        return -1;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t k = 0; k < words_.size(); ++k) {
            std::uint64_t w = words_[k];
            while (w) {
                int b = std::countr_zero(w);
                fn(static_cast<int>(k) * 64 + b);
                w &= w - 1;
            }
        }
    }

    bool operator==(const Bitset& o) const { return nbits_ == o.nbits_ && words_ == o.words_; }

private:
    int nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace pcp

#endif
