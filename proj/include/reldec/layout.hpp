/*
 * layout.hpp — tensor-factor structure of a composite Hilbert space.
 *
 * A SubsystemLayout is an ordered list of named factors. Flat indices are
 * row-major: the last factor varies fastest, so concatenating two layouts
 * matches the Kronecker product of their amplitude vectors.
 */
#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "reldec/common.hpp"

namespace reldec {

class SubsystemLayout {
public:
    SubsystemLayout(std::vector<int> dims, std::vector<std::string> labels)
        : dims_(std::move(dims)), labels_(std::move(labels)) {
        require(!dims_.empty(), "layout: at least one subsystem required");
        require(dims_.size() == labels_.size(),
                "layout: dims and labels must have equal length");
        long long total = 1;
        for (int d : dims_) {
            require(d >= 2, "layout: every factor dimension must be >= 2");
            total *= d;
            require(total <= max_total_dim,
                    "layout: total dimension exceeds the dense-representation cap of " +
                        std::to_string(max_total_dim));
        }
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            require(!labels_[i].empty(), "layout: empty subsystem label");
            for (std::size_t j = i + 1; j < labels_.size(); ++j)
                require(labels_[i] != labels_[j],
                        "layout: duplicate subsystem label '" + labels_[i] + "'");
        }
        total_ = static_cast<int>(total);
    }

    int factor_count() const { return static_cast<int>(dims_.size()); }
    int total_dim() const { return total_; }
    const std::vector<int>& dims() const { return dims_; }
    const std::vector<std::string>& labels() const { return labels_; }

    int dim(int factor) const { return dims_.at(static_cast<std::size_t>(factor)); }
    const std::string& label(int factor) const {
        return labels_.at(static_cast<std::size_t>(factor));
    }

    bool has_label(const std::string& label) const {
        return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
    }

    int index_of(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        require(it != labels_.end(), "layout: unknown subsystem label '" + label + "'");
        return static_cast<int>(it - labels_.begin());
    }

    // Row-major stride of a factor: product of the dimensions after it.
    int stride(int factor) const {
        int s = 1;
        for (int k = factor + 1; k < factor_count(); ++k) s *= dims_[static_cast<std::size_t>(k)];
        return s;
    }

    // Digit of a flat index at the given factor.
    int digit(int flat, int factor) const {
        return (flat / stride(factor)) % dims_[static_cast<std::size_t>(factor)];
    }

    // Sub-layout keeping the given factor positions, in layout order.
    SubsystemLayout sublayout(const std::vector<int>& factors) const {
        std::vector<int> d;
        std::vector<std::string> l;
        for (int f : factors) {
            d.push_back(dim(f));
            l.push_back(label(f));
        }
        return SubsystemLayout(std::move(d), std::move(l));
    }

    // Factor positions of a label set, in layout order. Throws on unknown labels.
    std::vector<int> factors_of(const std::vector<std::string>& labels_subset) const {
        std::vector<int> out;
        for (int f = 0; f < factor_count(); ++f)
            if (std::find(labels_subset.begin(), labels_subset.end(), labels_[static_cast<std::size_t>(f)]) !=
                labels_subset.end())
                out.push_back(f);
        for (const auto& l : labels_subset) index_of(l);  // reject unknown labels
        return out;
    }

    std::vector<std::string> complement(const std::vector<std::string>& labels_subset) const {
        std::vector<std::string> out;
        for (const auto& l : labels_)
            if (std::find(labels_subset.begin(), labels_subset.end(), l) == labels_subset.end())
                out.push_back(l);
        return out;
    }

    // The same label set re-ordered to layout order; rejects unknown labels.
    std::vector<std::string> ordered_subset(const std::vector<std::string>& labels_subset) const {
        for (const auto& l : labels_subset) index_of(l);
        std::vector<std::string> out;
        for (const auto& l : labels_)
            if (std::find(labels_subset.begin(), labels_subset.end(), l) != labels_subset.end())
                out.push_back(l);
        return out;
    }

    SubsystemLayout concat(const SubsystemLayout& other) const {
        std::vector<int> d = dims_;
        d.insert(d.end(), other.dims_.begin(), other.dims_.end());
        std::vector<std::string> l = labels_;
        l.insert(l.end(), other.labels_.begin(), other.labels_.end());
        return SubsystemLayout(std::move(d), std::move(l));
    }

    friend bool operator==(const SubsystemLayout& a, const SubsystemLayout& b) {
        return a.dims_ == b.dims_ && a.labels_ == b.labels_;
    }

private:
    std::vector<int> dims_;
    std::vector<std::string> labels_;
    int total_ = 0;
};

}  // namespace reldec
