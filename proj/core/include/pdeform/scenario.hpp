#pragma once

#include "pdeform/deformation.hpp"
#include "pdeform/normal_cmp.hpp"

namespace pdeform {

// ---------------------------------------------------------------------------
// Scenario files: a line-oriented description of atlases, maps, submanifolds,
// parameter rings, deformation data and factorization problems, in the shared
// polynomial / multivector grammar. Sections are headed by `[kind name]`; the
// body is `key ... = value` lines. parse -> serialize is the identity on
// serializer output (bundled scenarios are stored in canonical form).
// ---------------------------------------------------------------------------

struct Scenario {
    std::string description; // optional free-form label
    int window = 4;          // default window for commands

    std::vector<std::pair<std::string, ParamRing>> rings;
    std::vector<std::pair<std::string, PoissonAtlas>> atlases;

    struct MapEntry {
        std::string name, source, target;
        PoissonMapData data;
    };
    struct SubEntry {
        std::string name, ambient;
        SubmanifoldData data;
    };
    struct DefEntry {
        std::string name, map, ring;
        std::string lift;  // optional: name of the ring to climb to
        bool check = true; // run theorem hypothesis checks in lifting commands
        DeformationDatum data;
    };
    struct FactorEntry {
        std::string name, upsilon, phi, g;
        bool check = true;
    };
    std::vector<MapEntry> maps;
    std::vector<SubEntry> submanifolds;
    std::vector<DefEntry> deformations;
    std::vector<FactorEntry> factors;

    // Lookups by name; throw UnresolvedReference when absent.
    const ParamRing& ring(const std::string& name) const;
    const PoissonAtlas& atlas(const std::string& name) const;
    const MapEntry& map(const std::string& name) const;
    const SubEntry& submanifold(const std::string& name) const;
    const DefEntry& deformation(const std::string& name) const;
    const FactorEntry& factor(const std::string& name) const;
};

// Parses a scenario; throws SyntaxError (with the line number) on malformed
// input and UnresolvedReference when a named object is missing. Structural
// arities are checked here; the geometric identities are the `validate`
// command's job.
Scenario parse_scenario(const std::string& text);

// Canonical serialization; parse(serialize(s)) reproduces s byte-identically.
std::string serialize_scenario(const Scenario& s);

// ---------------------------------------------------------------------------
// Command dispatch.

struct RunOptions {
    int window = 0;    // 0: use the scenario default
    int order = 0;     // 0: use the ring declarations; else override lift order
    unsigned seed = 0; // lift-choice seed
    bool json = false; // machine-readable mirror of the text report
};

struct RunResult {
    int exit_code = 0; // 0 ok; 2 hypothesis failed / obstruction nonzero
    std::string output;
};

// Commands: validate | cohomology | pd | pd1 | audit-exactness | first-order |
// obstruct | lift | stability | costability | factor | normal-compare.
// Module errors propagate as pdeform::Error.
RunResult run_command(const std::string& command, const Scenario& sc, const RunOptions& opt);

} // namespace pdeform
