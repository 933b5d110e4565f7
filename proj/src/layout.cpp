#include "vnc/layout.hpp"

#include <stdexcept>

namespace vnc {

int LayoutSpec::modes() const
{
    return two_copy() ? 3 : 2;
}

LayoutSpec make_unbalanced_bs(double t)
{
    detail::require_transmission(t, "t");
    LayoutSpec l;
    l.kind = LayoutKind::UnbalancedBS;
    l.t1 = t;
    l.t2 = t;
    l.input_ports = {0};
    l.success = {0};
    l.error = {0, 1};
    return l;
}

LayoutSpec make_mach_zehnder(double t1, double t2, double phase)
{
    detail::require_transmission(t1, "t1");
    detail::require_transmission(t2, "t2");
    LayoutSpec l;
    l.kind = LayoutKind::MachZehnder;
    l.t1 = t1;
    l.t2 = t2;
    l.phase = phase;
    l.input_ports = {0};
    l.success = {0};
    l.error = {0, 1};
    return l;
}

LayoutSpec make_hom_extended(double t1, double t2)
{
    detail::require_transmission(t1, "t1");
    detail::require_transmission(t2, "t2");
    LayoutSpec l;
    l.kind = LayoutKind::HomExtended;
    l.t1 = t1;
    l.t2 = t2;
    l.input_ports = {0, 1};
    l.success = {0, 1};
    l.error = {0, 1, 2};
    return l;
}

LayoutSpec make_two_copy_variant(double t1, double t2)
{
    detail::require_transmission(t1, "t1");
    detail::require_transmission(t2, "t2");
    LayoutSpec l;
    l.kind = LayoutKind::TwoCopyVariant;
    l.t1 = t1;
    l.t2 = t2;
    l.input_ports = {1, 2};
    l.success = {0, 1};
    l.error = {0, 1, 2};
    return l;
}

LayoutSpec make_layout(LayoutKind kind, double t1, double t2, double phase)
{
    switch (kind) {
    case LayoutKind::UnbalancedBS:
        return make_unbalanced_bs(t1);
    case LayoutKind::MachZehnder:
        return make_mach_zehnder(t1, t2, phase);
    case LayoutKind::HomExtended:
        return make_hom_extended(t1, t2);
    case LayoutKind::TwoCopyVariant:
        return make_two_copy_variant(t1, t2);
    }
    throw std::invalid_argument("unknown layout kind");
}

TransferMatrixd layout_transfer(const LayoutSpec& layout)
{
    return layout_transfer(layout, layout.phase);
}

TransferMatrixd layout_transfer(const LayoutSpec& layout, double mz_phase)
{
    switch (layout.kind) {
    case LayoutKind::UnbalancedBS:
        return bs_matrix(layout.t1);
    case LayoutKind::MachZehnder:
        return mz_matrix(layout.t1, layout.t2, mz_phase);
    case LayoutKind::HomExtended: {
        const TransferMatrixd a = three_mode_matrix(layout.t1, layout.t2);
        TransferMatrixd m(3, 3);
        m.row(0) = a.row(1);
        m.row(1) = a.row(2);
        m.row(2) = a.row(0);
        return m;
    }
    case LayoutKind::TwoCopyVariant:
        return three_mode_matrix(1.0 - layout.t1, 1.0 - layout.t2);
    }
    throw std::invalid_argument("unknown layout kind");
}

std::string_view to_string(LayoutKind kind)
{
    switch (kind) {
    case LayoutKind::UnbalancedBS:
        return "bs";
    case LayoutKind::MachZehnder:
        return "mz";
    case LayoutKind::HomExtended:
        return "hom";
    case LayoutKind::TwoCopyVariant:
        return "twocopy";
    }
    return "unknown";
}

std::optional<LayoutKind> parse_layout_kind(std::string_view name)
{
    if (name == "bs") {
        return LayoutKind::UnbalancedBS;
    }
    if (name == "mz") {
        return LayoutKind::MachZehnder;
    }
    if (name == "hom") {
        return LayoutKind::HomExtended;
    }
    if (name == "twocopy") {
        return LayoutKind::TwoCopyVariant;
    }
    return std::nullopt;
}

} // namespace vnc
