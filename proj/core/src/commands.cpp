#include "pdeform/scenario.hpp"

#include "json.hpp"

#include <sstream>

namespace pdeform {

namespace {

struct Report {
    std::string command;
    int window = 0;
    std::vector<std::pair<std::string, std::string>> sections;
    int exit_code = 0;

    void add(const std::string& name, std::string text) {
        if (text.empty() || text.back() != '\n') text += '\n';
        sections.emplace_back(name, std::move(text));
    }
};

std::string render(const Report& r, bool json) {
    if (json) {
        nlohmann::json j;
        j["command"] = r.command;
        j["window"] = r.window;
        j["sections"] = nlohmann::json::array();
        for (const auto& [name, text] : r.sections)
            j["sections"].push_back({{"name", name}, {"report", text}});
        j["exit"] = r.exit_code;
        return j.dump(2) + "\n";
    }
    std::ostringstream os;
    os << "pdeform " << r.command << " window=" << r.window << "\n";
    for (const auto& [name, text] : r.sections) os << "== " << name << " ==\n" << text;
    return os.str();
}

bool same_ring(const ParamRing& a, const ParamRing& b) {
    return a.params == b.params && a.monomials() == b.monomials();
}

std::string pmono_str(const std::vector<int>& m, const ParamRing& ring) {
    std::string out;
    for (int i = 0; i < ring.r(); ++i) {
        if (!m[i]) continue;
        if (!out.empty()) out += "*";
        out += ring.params[i];
        if (m[i] != 1) out += "^" + std::to_string(m[i]);
    }
    return out.empty() ? "1" : out;
}

// Aligns the datum with the extension chain of `target`: returns the chain and
// the index of the first step extending d.ring, normalizing d to the chain's
// representation of that quotient.
std::vector<SmallExtension> align_chain(DeformationDatum& d, const ParamRing& target,
                                        size_t& start) {
    std::vector<SmallExtension> chain = extension_chain(target);
    for (start = 0; start < chain.size(); ++start)
        if (same_ring(chain[start].quotient, d.ring)) {
            d = truncate_deformation(d, chain[start].quotient);
            return chain;
        }
    fail(Errc::ExtensionMismatch,
         "the lift ring does not extend the datum ring by small extensions");
}

ParamRing lift_target(const Scenario& sc, const Scenario::DefEntry& e, const RunOptions& opt) {
    if (opt.order > 0) return ParamRing{e.data.ring.params, opt.order, {}};
    if (e.lift.empty())
        fail(Errc::UnresolvedReference,
             "deformation '" + e.name + "' declares no lift ring (use `lift = ...` or --order)");
    return sc.ring(e.lift);
}

void cmd_validate(const Scenario& sc, const HyperOptions&, Report& rep) {
    bool ok = true;
    auto put = [&](const std::string& kind, const std::string& name,
                   const ValidationReport& vr) {
        rep.add(kind + " " + name, vr.to_string());
        ok = ok && vr.ok();
    };
    for (const auto& [name, a] : sc.atlases) put("atlas", name, validate_atlas(a));
    for (const auto& m : sc.maps) put("map", m.name, validate_map(m.data));
    for (const auto& s : sc.submanifolds)
        put("submanifold", s.name, validate_submanifold(s.data).report);
    for (const auto& d : sc.deformations)
        put("deformation", d.name, validate_deformation(d.data));
    if (!ok) rep.exit_code = 1;
}

void cmd_cohomology(const Scenario& sc, const HyperOptions& opt, Report& rep) {
    for (const auto& [name, a] : sc.atlases) {
        CechContext cx{&a, nullptr};
        std::ostringstream os;
        for (int n = 0; n <= 1; ++n) {
            CohomologyReport h = tot_cohomology(cx, SlotKind::TangentX, n, opt);
            os << h.summary() << "audit_ok=" << (h.audit_ok ? "yes" : "no")
               << " dim_enlarged=" << h.dim_enlarged << "\n";
        }
        rep.add("atlas " + name, os.str());
    }
}

void cmd_pd(const Scenario& sc, const HyperOptions& opt, Report& rep, bool first) {
    for (const auto& m : sc.maps) {
        PDReport r = first ? pd_space(m.data, opt) : pd1_space(m.data, opt);
        rep.add("map " + m.name, r.summary());
    }
}

void cmd_audit_exactness(const Scenario& sc, const HyperOptions& opt, Report& rep) {
    bool ok = true;
    for (const auto& m : sc.maps) {
        ExactnessReport r = exactness_audit(m.data, opt);
        rep.add("map " + m.name, r.to_string());
        ok = ok && r.ok();
    }
    if (!ok) rep.exit_code = 1;
}

void cmd_first_order(const Scenario& sc, const HyperOptions& opt, Report& rep) {
    for (const auto& e : sc.deformations) {
        ParamRing eps{e.data.ring.params, std::min(e.data.ring.order, 1),
                      e.data.ring.ideal_gens};
        DeformationDatum d = truncate_deformation(e.data, eps);
        rep.add("deformation " + e.name, first_order_class(d, opt).summary());
    }
}

void cmd_obstruct(const Scenario& sc, const HyperOptions& opt, const RunOptions& ro,
                  Report& rep) {
    for (const auto& e : sc.deformations) {
        DeformationDatum d = e.data;
        size_t k = 0;
        std::vector<SmallExtension> chain = align_chain(d, lift_target(sc, e, ro), k);
        const SmallExtension& step = chain[k];
        ObstructionClass obs = obstruction_class(d, step, ro.seed, opt);
        std::ostringstream os;
        os << "extension +" << pmono_str(step.tau, step.total) << "\n" << obs.summary();
        rep.add("deformation " + e.name, os.str());
        if (!obs.is_zero()) rep.exit_code = 2;
    }
}

void cmd_lift(const Scenario& sc, const HyperOptions& opt, const RunOptions& ro, Report& rep) {
    for (const auto& e : sc.deformations) {
        DeformationDatum d = e.data;
        size_t k = 0;
        std::vector<SmallExtension> chain = align_chain(d, lift_target(sc, e, ro), k);
        std::ostringstream os;
        bool obstructed = false;
        for (; k < chain.size(); ++k) {
            LiftOutcome out = lift_step(d, chain[k], opt, ro.seed);
            os << "step +" << pmono_str(chain[k].tau, chain[k].total) << ": ";
            if (auto* cert = std::get_if<LiftCertificate>(&out)) {
                bool ok = cert->residuals.ok();
                os << (ok ? "lifted, residuals verified" : "lifted, RESIDUAL FAILURE") << "\n";
                if (!ok) rep.exit_code = 1;
                d = std::move(cert->datum);
            } else {
                os << "obstructed\n" << std::get<ObstructionClass>(out).summary();
                obstructed = true;
                break;
            }
        }
        if (!obstructed) os << "lifted to order " << d.ring.order << "\n";
        rep.add("deformation " + e.name, os.str());
        if (obstructed) rep.exit_code = 2;
    }
}

void cmd_stability(const Scenario& sc, const HyperOptions& opt, Report& rep, bool co) {
    DefMode want = co ? DefMode::FixedTarget : DefMode::FixedSource;
    bool any = false;
    for (const auto& e : sc.deformations) {
        if (e.data.mode != want) continue;
        any = true;
        const PoissonMapData& f = sc.map(e.map).data;
        LiftCertificate cert = co ? costability_lift(f, e.data, e.check, opt)
                                  : stability_lift(f, e.data, e.check, opt);
        std::ostringstream os;
        os << (e.check ? "hypothesis ranks verified\n" : "hypothesis check skipped\n");
        os << "residuals " << (cert.residuals.ok() ? "verified" : "FAILED") << "\n";
        os << cert.residuals.to_string();
        rep.add("deformation " + e.name, os.str());
        if (!cert.residuals.ok()) rep.exit_code = 1;
    }
    if (!any)
        rep.add("note", std::string("no ") + defmode_name(want) + " deformation in scenario\n");
}

void cmd_factor(const Scenario& sc, const HyperOptions& opt, Report& rep) {
    for (const auto& fe : sc.factors) {
        FamilyMapLift lift =
            factor_through_family(sc.deformation(fe.upsilon).data,
                                  sc.deformation(fe.phi).data, sc.map(fe.g).data, fe.check, opt);
        const PoissonMapData& g = sc.map(fe.g).data;
        std::ostringstream os;
        for (size_t i = 0; i < lift.psi.size(); ++i) {
            os << "psi " << g.source.charts[i].id << " = ";
            for (size_t l = 0; l < lift.psi[i].size(); ++l)
                os << (l ? ", " : "") << lift.psi[i][l].to_string();
            os << "\n";
        }
        os << "residuals " << (lift.residuals.ok() ? "verified" : "FAILED") << "\n";
        os << lift.residuals.to_string();
        rep.add("factor " + fe.name, os.str());
        if (!lift.residuals.ok()) rep.exit_code = 1;
    }
    if (sc.factors.empty()) rep.add("note", "no factorization problem in scenario\n");
}

void cmd_normal_compare(const Scenario& sc, const HyperOptions& opt, Report& rep) {
    for (const auto& s : sc.submanifolds) {
        NormalComparisonReport r =
            compare_normal_cohomology(s.data, inclusion_map(s.data), opt);
        rep.add("submanifold " + s.name, r.to_string());
        if (!r.ok()) rep.exit_code = 2;
    }
}

} // namespace

RunResult run_command(const std::string& command, const Scenario& sc, const RunOptions& ro) {
    HyperOptions opt;
    opt.window = ro.window > 0 ? ro.window : sc.window;
    Report rep;
    rep.command = command;
    rep.window = opt.window;
    if (command == "validate")
        cmd_validate(sc, opt, rep);
    else if (command == "cohomology")
        cmd_cohomology(sc, opt, rep);
    else if (command == "pd")
        cmd_pd(sc, opt, rep, true);
    else if (command == "pd1")
        cmd_pd(sc, opt, rep, false);
    else if (command == "audit-exactness")
        cmd_audit_exactness(sc, opt, rep);
    else if (command == "first-order")
        cmd_first_order(sc, opt, rep);
    else if (command == "obstruct")
        cmd_obstruct(sc, opt, ro, rep);
    else if (command == "lift")
        cmd_lift(sc, opt, ro, rep);
    else if (command == "stability")
        cmd_stability(sc, opt, rep, false);
    else if (command == "costability")
        cmd_stability(sc, opt, rep, true);
    else if (command == "factor")
        cmd_factor(sc, opt, rep);
    else if (command == "normal-compare")
        cmd_normal_compare(sc, opt, rep);
    else
        fail(Errc::SyntaxError, "unknown command '" + command + "'");
    return RunResult{rep.exit_code, render(rep, ro.json)};
}

} // namespace pdeform
