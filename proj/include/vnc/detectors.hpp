// Detector index sets and per-detector efficiencies.
#ifndef VNC_DETECTORS_HPP
#define VNC_DETECTORS_HPP

#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace vnc {

/// Set of detector indices (0-based) stored as a bitmask.
class DetectorSet {
public:
    DetectorSet() = default;
    DetectorSet(std::initializer_list<int> indices)
    {
        for (int i : indices) {
            insert(i);
        }
    }

    static DetectorSet from_mask(std::uint32_t mask)
    {
        DetectorSet s;
        s.mask_ = mask;
        return s;
    }

    void insert(int index)
    {
        if (index < 0 || index >= 32) {
            throw std::out_of_range("detector index " + std::to_string(index) + " out of range");
        }
        mask_ |= std::uint32_t{1} << index;
    }

    bool contains(int index) const { return index >= 0 && index < 32 && ((mask_ >> index) & 1U) != 0; }
    bool empty() const { return mask_ == 0; }
    std::uint32_t mask() const { return mask_; }
    int size() const { return __builtin_popcount(mask_); }
    int max_index() const { return empty() ? -1 : 31 - __builtin_clz(mask_); }
    bool subset_of(DetectorSet other) const { return (mask_ & ~other.mask_) == 0; }

    std::vector<int> indices() const
    {
        std::vector<int> out;
        for (int i = 0; i < 32; ++i) {
            if (contains(i)) {
                out.push_back(i);
            }
        }
        return out;
    }

    friend bool operator==(DetectorSet, DetectorSet) = default;

private:
    std::uint32_t mask_ = 0;
};

/// Per-detector efficiencies nu_i in [0, 1].
struct DetectorModel {
    std::vector<double> efficiencies;

    static DetectorModel ideal(int detectors) { return DetectorModel{std::vector<double>(detectors, 1.0)}; }

    double efficiency(int detector) const
    {
        if (efficiencies.empty()) {
            return 1.0;
        }
        if (detector < 0 || detector >= static_cast<int>(efficiencies.size())) {
            throw std::out_of_range("no efficiency for detector " + std::to_string(detector));
        }
        return efficiencies[detector];
    }

    void validate() const
    {
        for (double nu : efficiencies) {
            if (!(nu >= 0.0 && nu <= 1.0)) {
                throw std::domain_error("detector efficiency must lie in [0, 1]");
            }
        }
    }
};

} // namespace vnc

#endif // VNC_DETECTORS_HPP
