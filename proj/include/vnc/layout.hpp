// Named detection layouts: network parameters, signal input ports and the
// detector patterns that define success and error events.
#ifndef VNC_LAYOUT_HPP
#define VNC_LAYOUT_HPP

#include "vnc/detectors.hpp"
#include "vnc/linear_network.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace vnc {

enum class LayoutKind {
    UnbalancedBS,   // one input, two detectors behind a variable beam splitter
    MachZehnder,    // one input, two detectors behind a Mach-Zehnder
    HomExtended,    // two inputs interfere at BS1, one BS1 output split by BS2
    TwoCopyVariant, // each input transmitted to its own detector, reflections mixed at BS2
};

struct LayoutSpec {
    LayoutKind kind = LayoutKind::UnbalancedBS;
    double t1 = 0.5;
    double t2 = 0.5;    // unused for UnbalancedBS
    double phase = 0.0; // Mach-Zehnder only; 2 pi omega d / c for the signal
    std::vector<int> input_ports;
    DetectorSet success;
    DetectorSet error;

    int modes() const;
    bool two_copy() const { return kind == LayoutKind::HomExtended || kind == LayoutKind::TwoCopyVariant; }
};

LayoutSpec make_unbalanced_bs(double t);
LayoutSpec make_mach_zehnder(double t1, double t2, double phase = 0.0);
LayoutSpec make_hom_extended(double t1, double t2);
LayoutSpec make_two_copy_variant(double t1, double t2);
LayoutSpec make_layout(LayoutKind kind, double t1, double t2, double phase = 0.0);

/// Transfer matrix of the layout with detector k fed by row k.
///
/// HomExtended: the three-mode network with the signals on ports (1, 2) and
/// its rows reordered so that detectors 1 and 2 are the two outputs of BS2.
/// TwoCopyVariant: the three-mode network at reflectivities (1-t1, 1-t2) with
/// the signals on ports (2, 3), so that t1 (t2) is the transmission of copy A
/// (B) onto detector 1 (2).
TransferMatrixd layout_transfer(const LayoutSpec& layout);

/// Same, with the Mach-Zehnder phase replaced.
TransferMatrixd layout_transfer(const LayoutSpec& layout, double mz_phase);

std::string_view to_string(LayoutKind kind);
std::optional<LayoutKind> parse_layout_kind(std::string_view name);

} // namespace vnc

#endif // VNC_LAYOUT_HPP
