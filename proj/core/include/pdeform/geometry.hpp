#pragma once

#include "pdeform/multivector.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pdeform {

struct CheckEntry {
    std::string name;
    std::vector<int> charts;
    bool pass = false;
    std::string residual; // first offending polynomial, empty on pass
};

struct ValidationReport {
    std::vector<CheckEntry> entries;
    bool ok() const;
    void add(std::string name, std::vector<int> charts, bool pass, std::string residual = "");
    // one line per identity: "CHECK <name> [i,j] PASS|FAIL residual=<poly>"
    std::string to_string() const;
};

struct Chart {
    std::string id;
    Ctx ctx; // chart variables over the atlas parameter ring, window [-D, D]
    int window = 0;
};

// Atlas of charts with transition maps phi_ij : (chart j coords) -> (chart i coords)
// on overlaps, and one degree-2 multivector per chart.
struct PoissonAtlas {
    ParamRing ring;
    std::vector<Chart> charts;
    std::map<std::pair<int, int>, ChartMap> transitions; // key (i, j) holds phi_ij
    std::vector<Multivector> bivectors;

    int nchart() const { return static_cast<int>(charts.size()); }
    bool overlap(int i, int j) const;
    const ChartMap& transition(int i, int j) const; // phi_ij, requires overlap
    int chart_index(const std::string& id) const;   // -1 if absent

    // Chart variables of i0 that are invertible on the overlap of the given charts:
    // those appearing with a negative exponent in some transition out of i0 to
    // another member of the tuple. Determines the honest section ring on overlaps.
    std::vector<bool> overlap_units(const std::vector<int>& tuple) const;

    // Largest |exponent| appearing in any transition component or bivector
    // coefficient; used to derive window enlargements for cochain operators.
    int data_exponent_bound() const;
};

// Map of atlases: source chart i lands in target chart assignment[i]; components
// give the target coordinates of the map as polynomials in source chart i.
struct PoissonMapData {
    PoissonAtlas source;
    PoissonAtlas target;
    std::vector<int> assignment;
    std::vector<std::vector<LaurentPoly>> components;

    // The map on chart i as a ChartMap (source chart i -> target chart assignment[i]).
    ChartMap chart_map(int i) const;
};

// Poisson submanifold in adapted coordinates: per chart, the indices of the
// defining variables w^1..w^r (their vanishing cuts the submanifold).
struct SubmanifoldData {
    PoissonAtlas ambient;
    std::vector<std::vector<int>> defining;

    int codim() const { return defining.empty() ? 0 : static_cast<int>(defining[0].size()); }
};

ValidationReport validate_atlas(const PoissonAtlas& a);
ValidationReport validate_map(const PoissonMapData& f);

// Tangential coefficients: [Lambda_i, w_i^alpha] = sum_beta w_i^beta T^beta_{i alpha},
// T[i][alpha][beta] a vector field on chart i. Filled on pass.
struct SubmanifoldValidation {
    ValidationReport report;
    std::vector<std::vector<std::vector<Multivector>>> T;
};
SubmanifoldValidation validate_submanifold(const SubmanifoldData& s);

// Writes p = sum_beta w^beta q_beta with the w's the given variable indices,
// dividing greedily by the smallest index first. Returns false if a remainder
// is left (p is not in the ideal); the quotients land in `out`.
bool ideal_divide(const LaurentPoly& p, const std::vector<int>& wvars,
                  std::vector<LaurentPoly>& out);

// Frame transition data of a submanifold: on the overlap (i, k),
// w_i^alpha o phi_ik = sum_beta w_k^beta F^alpha_{ik beta}, functions of z_k.
// Result [alpha][beta], each in (a scratch context of) chart k.
std::vector<std::vector<LaurentPoly>> frame_transition(const SubmanifoldData& s, int i, int k);

} // namespace pdeform
