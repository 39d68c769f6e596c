#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ttint {

// A multi-index addresses one element of a d-dimensional tensor,
// zero-based in every mode.
using MultiIndex = std::vector<std::size_t>;

struct TensorShape {
    std::vector<std::size_t> mode_sizes;

    TensorShape() = default;
    TensorShape(std::initializer_list<std::size_t> sizes) : mode_sizes(sizes) { validate(); }
    explicit TensorShape(std::vector<std::size_t> sizes) : mode_sizes(std::move(sizes)) { validate(); }

    std::size_t dims() const { return mode_sizes.size(); }
    std::size_t operator[](std::size_t k) const { return mode_sizes[k]; }

    // Total element count, saturating instead of overflowing.
    std::size_t element_count() const {
        std::size_t total = 1;
        for (std::size_t n : mode_sizes) {
            if (n != 0 && total > max_count() / n) return max_count();
            total *= n;
        }
        return total;
    }

    bool contains(const MultiIndex& idx) const {
        if (idx.size() != mode_sizes.size()) return false;
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (idx[k] >= mode_sizes[k]) return false;
        return true;
    }

    void require_valid_index(const MultiIndex& idx) const {
        if (idx.size() != mode_sizes.size())
            throw std::invalid_argument("multi-index addresses " + std::to_string(idx.size()) +
                                        " modes, tensor has " + std::to_string(mode_sizes.size()));
        for (std::size_t k = 0; k < idx.size(); ++k)
            if (idx[k] >= mode_sizes[k])
                throw std::out_of_range("index " + std::to_string(idx[k]) + " out of range for mode " +
                                        std::to_string(k) + " of size " + std::to_string(mode_sizes[k]));
    }

    TensorShape reversed() const {
        TensorShape s;
        s.mode_sizes.assign(mode_sizes.rbegin(), mode_sizes.rend());
        return s;
    }

    bool operator==(const TensorShape& o) const { return mode_sizes == o.mode_sizes; }
    bool operator!=(const TensorShape& o) const { return !(*this == o); }

    static constexpr std::size_t max_count() { return ~std::size_t{0}; }

private:
    void validate() const {
        if (mode_sizes.empty())
            throw std::invalid_argument("tensor shape must have at least one mode");
        for (std::size_t n : mode_sizes)
            if (n == 0) throw std::invalid_argument("tensor mode sizes must be positive");
    }
};

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& idx) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (std::size_t v : idx) {
            h ^= static_cast<std::uint64_t>(v);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Deterministic random source. All stochastic choices in the library flow
// through this type so a seed fully reproduces a run on any platform;
// helpers avoid std::uniform_*_distribution, whose streams are
// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("uniform_index: empty range");
        return static_cast<std::size_t>(gen_() % n);
    }

    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(i)]);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Lazily sampled d-dimensional black box with an exact evaluation counter.
// Entries are cached, so the counter reports unique evaluator pulls; the
// deterministic-evaluator contract makes a cache hit indistinguishable from
// a re-evaluation. Batches are handed to the evaluator as a single call.
class BlackBoxTensor {
public:
    // points arrive as a batch of multi-indices; write one value per index
    using Evaluator = std::function<void(const std::vector<MultiIndex>&, double*)>;

    BlackBoxTensor(TensorShape shape, Evaluator eval)
        : impl_(std::make_shared<Impl>(std::move(shape), std::move(eval))) {}

    const TensorShape& shape() const { return reversed_ ? reversed_shape_ : impl_->shape; }
    std::size_t evaluations() const { return impl_->count; }

    double element(const MultiIndex& idx) {
        double out;
        std::vector<MultiIndex> batch{idx};
        elements(batch, &out);
        return out;
    }

    void elements(const std::vector<MultiIndex>& batch, double* out) {
        std::vector<MultiIndex> canon;
        canon.reserve(batch.size());
        for (const auto& idx : batch) {
            MultiIndex c = reversed_ ? MultiIndex(idx.rbegin(), idx.rend()) : idx;
            impl_->shape.require_valid_index(c);
            canon.push_back(std::move(c));
        }
        std::vector<std::size_t> missing;
        std::vector<MultiIndex> to_eval;
        for (std::size_t p = 0; p < canon.size(); ++p) {
            auto it = impl_->cache.find(canon[p]);
            if (it != impl_->cache.end()) {
                out[p] = it->second;
            } else {
                missing.push_back(p);
                to_eval.push_back(canon[p]);
            }
        }
        if (to_eval.empty()) return;
        std::vector<double> fresh(to_eval.size());
        impl_->eval(to_eval, fresh.data());
        for (std::size_t q = 0; q < to_eval.size(); ++q) {
            // duplicate indices inside one batch collapse to one evaluation
            auto [it, inserted] = impl_->cache.emplace(to_eval[q], fresh[q]);
            if (inserted) ++impl_->count;
            out[missing[q]] = it->second;
        }
    }

    // Same storage viewed with mode order reversed; cache and counter are shared.
    BlackBoxTensor reversed() const {
        BlackBoxTensor r(*this);
        r.reversed_ = !reversed_;
        r.reversed_shape_ = impl_->shape.reversed();
        return r;
    }

private:
    struct Impl {
        TensorShape shape;
        Evaluator eval;
        std::unordered_map<MultiIndex, double, MultiIndexHash> cache;
        std::size_t count = 0;
        Impl(TensorShape s, Evaluator e) : shape(std::move(s)), eval(std::move(e)) {}
    };

    std::shared_ptr<Impl> impl_;
    bool reversed_ = false;
    TensorShape reversed_shape_;
};

}  // namespace ttint
