#pragma once

#include "pdeform/complexes.hpp"
#include "pdeform/geometry.hpp"
#include "pdeform/matrix.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace pdeform {

// Which column of the double complex a cochain lives in.
enum class SlotKind {
    TangentX,  // wedge^q T_X, coefficients and axes in source charts
    PullbackY, // wedge^q f*T_Y, coefficients in source charts, axes in target charts
};

struct CechSlot {
    SlotKind kind;
    int c = 0; // Cech degree
    int q = 1; // multivector degree (1 = tangent sheaf)
    bool operator==(const CechSlot& o) const { return kind == o.kind && c == o.c && q == o.q; }
    bool operator<(const CechSlot& o) const {
        return std::tie(kind, c, q) < std::tie(o.kind, o.c, o.q);
    }
    std::string to_string() const;
};

// One component of a cochain: values on strictly increasing chart tuples, each
// expressed in the coordinates of the lowest chart of the tuple.
struct Cochain {
    CechSlot slot;
    std::map<std::vector<int>, Multivector> values;

    bool is_zero() const;
    void add(const std::vector<int>& tuple, const Multivector& v);
    std::string to_string() const;
};

using CochainList = std::vector<Cochain>;

// Bundles the geometric data the Cech operators need. `f` may be null for
// atlas-only computations; PullbackY slots and pi require it. Cohomology is
// computed over Q: the atlas parameter ring must be trivial.
struct CechContext {
    const PoissonAtlas* X = nullptr;
    const PoissonMapData* f = nullptr;

    const PoissonAtlas& atlas() const { return f ? f->source : *X; }
    void check() const;
    int axis_dim(SlotKind k) const;
};

// All strictly increasing (c+1)-tuples of pairwise overlapping charts.
std::vector<std::vector<int>> nerve_tuples(const PoissonAtlas& a, int c);

// Coefficient context on a tuple: polynomial window [0, W] in each variable of the
// lead chart, extended to [-W, W] in the variables inverted on the overlap.
Ctx tuple_ctx(const PoissonAtlas& a, const std::vector<int>& tuple, int window);

// Transport of a value from lead chart j to lead chart i on their overlap.
Multivector transport(const CechContext& ctx, SlotKind kind, const Multivector& v, int i,
                      int j);

// (delta c)_{i0..i_{c+1}} = sum_k (-1)^k (c at the tuple without i_k), transported
// into chart i0 coordinates.
Cochain cech_delta(const CechContext& ctx, const Cochain& c);

// Column differential: [Lambda_{i0}, -] on TangentX slots, pi on PullbackY slots.
Cochain sheaf_d(const CechContext& ctx, const Cochain& c);

// F applied tuple-wise (TangentX -> PullbackY, same (c, q)).
Cochain apply_F(const CechContext& ctx, const Cochain& c);

// ---------------------------------------------------------------------------
// Finite-dimensional windowed cochain spaces and exact linear algebra on them.

struct ComponentBasis {
    CechSlot slot;
    std::vector<std::vector<int>> tuples;
    std::vector<Ctx> ctxs;                    // per tuple
    std::vector<std::vector<int>> axes_list;  // increasing q-tuples of axes
    std::vector<std::vector<Mono>> monos;     // per tuple
    std::vector<std::map<Mono, int, MonoLess>> mono_index; // per tuple
    std::vector<int> tuple_offset;            // into the component block
    int axis_dim = 0;
    int offset = 0;                           // into the whole space
    int dim = 0;
};

struct Space {
    std::vector<ComponentBasis> comps;
    int dim = 0;

    // single-monomial cochain for global basis index k
    Cochain basis_element(int k) const;
    // strict: throws NotInSpace when a value has support outside the window
    SRow vectorize(const CochainList& vals) const;
    CochainList devectorize(const SRow& v) const;
};

Space make_space(const CechContext& ctx, const std::vector<CechSlot>& slots, int window);

// Key identifying one exact coordinate (slot, tuple, axes, monomial); used to embed
// windowed spaces into the unbounded coordinate lattice.
using CoordKey = std::tuple<int, int, int, std::vector<int>, std::vector<int>, Mono>;

struct KeyIndex {
    std::map<CoordKey, int> idx;
    std::vector<CoordKey> keys;
    int intern(const CoordKey& k);
    int dim() const { return static_cast<int>(keys.size()); }
};

// Exact vectorization of labeled cochains into a growing key index.
SRow vectorize_exact(KeyIndex& ki, const CochainList& vals);
// The keys of a windowed space, in basis order (seeds a KeyIndex).
void seed_keys(KeyIndex& ki, const Space& s);

using Op = std::function<CochainList(const Cochain&)>;

// ker(T on dom) / (im(S from predom) intersect ker), all arithmetic exact; S may
// be null (empty image). Representatives are canonical (RREF after reduction).
struct SubquotientResult {
    int dim = 0;
    int ker_dim = 0;
    int im_cap_ker_dim = 0;
    std::vector<SRow> reps;  // canonical representatives in dom coordinates
    Rref im_reducer;         // RREF of im cap ker (dom coordinates)
    std::vector<SRow> rep_span; // RREF rows spanning the canonical complement

    // quotient coordinates of a cocycle (dom coords); nullopt if not in ker-span
    std::optional<std::vector<Rational>> class_coords(const SRow& v) const;
};

SubquotientResult ker_mod_im(const Space& dom, const Op& T, const Space* predom,
                             const Op& S);

// Core of ker_mod_im on explicit data: Tcols[k] is the image of domain coordinate k
// (codomain coordinates arbitrary but consistent), im_vecs span the image inside the
// embedding space whose first coordinates agree with the domain coordinates.
SubquotientResult subquotient_core(const std::vector<SRow>& Tcols,
                                   const std::vector<SRow>& im_vecs, int emb_dim);

// span(ker_vecs) / (span(im_vecs) intersect span(ker_vecs)), with explicit kernel.
SubquotientResult span_mod_im(const std::vector<SRow>& ker_vecs,
                              const std::vector<SRow>& im_vecs, int emb_dim);

// ---------------------------------------------------------------------------
// Total complexes and hypercohomology.

// Sign on the Cech differential for a component at (Cech degree c, sheaf degree q),
// pinned by the printed cocycle/coboundary relations of PD and PD^1; the column
// differential always enters with +1.
int tot_eps(int c, int q);

// Components of Tot^n = (+) C^c(sheaf^q), c + q - 1 = n, for the chosen column.
std::vector<CechSlot> tot_slots(const CechContext& ctx, SlotKind kind, int n);

// The total differential (reads each input's slot).
Op tot_op(const CechContext& ctx);

struct HyperOptions {
    int window = 4;
    int bump = -1;        // enlargement of the image-side window; -1: derive from data
    bool audit = true;    // recompute at window+2 and compare
    bool throw_on_audit = true;
};

struct CohomologyReport {
    int degree = 0;
    int dim = 0;
    int window = 0;
    bool audit_ok = true;
    int dim_enlarged = -1; // audit dimension (window+2), -1 if audit off
    std::vector<CochainList> basis;
    SubquotientResult detail;
    Space dom; // domain space at `window` (for mapping cocycles to class coordinates)
    std::string summary() const; // "H^k dim=<n>" + basis dump
};

// Hypercohomology H^degree of Tot(Cech x column complex).
CohomologyReport tot_cohomology(const CechContext& ctx, SlotKind kind, int degree,
                                const HyperOptions& opt);

// Ordinary sheaf cohomology H^degree(X, wedge^p T_X) (zero column differential).
CohomologyReport sheaf_cohomology(const PoissonAtlas& a, int p, int degree,
                                  const HyperOptions& opt);

int default_bump(const PoissonAtlas& a);

} // namespace pdeform
