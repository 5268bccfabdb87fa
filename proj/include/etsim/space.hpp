// space.hpp — Composite Hilbert-space bookkeeping: ordered factors and index arithmetic

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace etsim {

// One tensor factor of the composite space: a spin-1/2 qubit or a boson mode
// truncated at n_c levels (occupations 0 .. n_c-1).
struct Factor {
    enum class Kind { Qubit, Boson };

    Kind kind{Kind::Qubit};
    int levels{2};

    static Factor qubit() { return Factor{Kind::Qubit, 2}; }

    static Factor boson(int n_c) {
        if (n_c < 2) {
            throw std::invalid_argument("Factor::boson: cutoff n_c must be >= 2, got " +
                                        std::to_string(n_c));
        }
        return Factor{Kind::Boson, n_c};
    }

    int dim() const { return levels; }

    bool operator==(const Factor&) const = default;
};

// Ordered list of factors defining a composite space. Basis indices are
// mixed-radix with factor 0 most significant, matching the Kronecker-product
// convention A0 (x) A1 (x) ... used by all operator builders.
class SpaceSpec {
public:
    SpaceSpec() = default;

    explicit SpaceSpec(std::vector<Factor> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) {
            throw std::invalid_argument("SpaceSpec: at least one factor required");
        }
        dim_ = 1;
        for (const auto& f : factors_) {
            dim_ *= f.dim();
        }
    }

    int dim() const { return dim_; }
    int num_factors() const { return static_cast<int>(factors_.size()); }

    const Factor& factor(int i) const {
        check_index(i);
        return factors_[static_cast<std::size_t>(i)];
    }

    const std::vector<Factor>& factors() const { return factors_; }

    // Stride of factor i: product of dimensions of all later factors.
    int stride(int i) const {
        check_index(i);
        int s = 1;
        for (std::size_t k = static_cast<std::size_t>(i) + 1; k < factors_.size(); ++k) {
            s *= factors_[k].dim();
        }
        return s;
    }

    // Composite basis index from per-factor occupation indices.
    int pack(const std::vector<int>& idx) const {
        if (static_cast<int>(idx.size()) != num_factors()) {
            throw std::invalid_argument("SpaceSpec::pack: index count mismatch");
        }
        int out = 0;
        for (int i = 0; i < num_factors(); ++i) {
            const int d = factors_[static_cast<std::size_t>(i)].dim();
            if (idx[static_cast<std::size_t>(i)] < 0 || idx[static_cast<std::size_t>(i)] >= d) {
                throw std::out_of_range("SpaceSpec::pack: index out of range for factor " +
                                        std::to_string(i));
            }
            out = out * d + idx[static_cast<std::size_t>(i)];
        }
        return out;
    }

    std::vector<int> unpack(int index) const {
        std::vector<int> idx(static_cast<std::size_t>(num_factors()));
        for (int i = num_factors() - 1; i >= 0; --i) {
            const int d = factors_[static_cast<std::size_t>(i)].dim();
            idx[static_cast<std::size_t>(i)] = index % d;
            index /= d;
        }
        return idx;
    }

    bool operator==(const SpaceSpec&) const = default;

private:
    void check_index(int i) const {
        if (i < 0 || i >= num_factors()) {
            throw std::out_of_range("SpaceSpec: factor index " + std::to_string(i) +
                                    " out of range");
        }
    }

    std::vector<Factor> factors_;
    int dim_{0};
};

}  // namespace etsim
