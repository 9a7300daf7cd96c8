#pragma once

#include <stdexcept>
#include <string>

namespace pdeform {

enum class Errc {
    WindowOverflow,
    ContextMismatch,
    ChartMismatch,
    ArityMismatch,
    NoInverse,
    NotInSpace,
    TransportFailure,
    WindowInsufficient,
    NotACocycle,
    WrongRing,
    InvalidDatum,
    ExtensionMismatch,
    CompositionMismatch,
    HypothesisFailed,
    InvalidSubmanifold,
    SyntaxError,
    UnresolvedReference,
    Internal,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::WindowOverflow: return "WindowOverflow";
        case Errc::ContextMismatch: return "ContextMismatch";
        case Errc::ChartMismatch: return "ChartMismatch";
        case Errc::ArityMismatch: return "ArityMismatch";
        case Errc::NoInverse: return "NoInverse";
        case Errc::NotInSpace: return "NotInSpace";
        case Errc::TransportFailure: return "TransportFailure";
        case Errc::WindowInsufficient: return "WindowInsufficient";
        case Errc::NotACocycle: return "NotACocycle";
        case Errc::WrongRing: return "WrongRing";
        case Errc::InvalidDatum: return "InvalidDatum";
        case Errc::ExtensionMismatch: return "ExtensionMismatch";
        case Errc::CompositionMismatch: return "CompositionMismatch";
        case Errc::HypothesisFailed: return "HypothesisFailed";
        case Errc::InvalidSubmanifold: return "InvalidSubmanifold";
        case Errc::SyntaxError: return "SyntaxError";
        case Errc::UnresolvedReference: return "UnresolvedReference";
        case Errc::Internal: return "Internal";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace pdeform
