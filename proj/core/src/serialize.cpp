#include "pdms/serialize.hpp"

#include "pdms/render.hpp"

namespace pdms {

using nlohmann::json;

json to_json(const LossReport& report) {
    json matches = json::array();
    for (const auto& m : report.matches) {
        json backs = json::array();
        for (const auto& b : m.backs) {
            json extra = json::array();
            for (const auto& p : b.extra) extra.push_back(to_string(p));
            backs.push_back({{"disjunct", b.back_disjunct}, {"extraPredicates", extra}});
        }
        matches.push_back({{"query", m.query_disjunct}, {"back", backs}});
    }
    json dropped = json::array();
    for (const auto& d : report.dropped) {
        dropped.push_back({{"disjunct", d.disjunct}, {"reason", d.reason}});
    }
    json disc;
    if (report.discriminator) {
        disc = {{"position", report.discriminator->position},
                {"variable", report.discriminator->variable},
                {"excluded", report.discriminator->excluded}};
    } else {
        disc = nullptr;
    }
    return {{"empty", report.empty},
            {"matches", matches},
            {"lostDisjuncts", report.lost_disjuncts},
            {"dropped", dropped},
            {"discriminator", disc}};
}

json to_json(const ComplementSpec& spec) {
    return {{"relation", {{"name", spec.relation.name}, {"attributes", spec.relation.attributes}}},
            {"hostPeer", spec.host_peer},
            {"definitionRule", render_rule(spec.definition_rule)},
            {"contributionRule", render_rule(spec.contribution_rule)}};
}

json to_json(const NeighborOutcome& outcome) {
    json match;
    if (outcome.match) {
        json corr = json::array();
        for (const auto& c : outcome.match->correspondences) {
            corr.push_back({{"source", c.source_attr},
                            {"candidate", c.candidate_attr},
                            {"provenance",
                             c.provenance == AttributeCorrespondence::Provenance::shared_variable
                                 ? "shared-variable"
                                 : "name-similarity"}});
        }
        match = {{"relation", outcome.match->relation.name},
                 {"score", outcome.match->score},
                 {"correspondences", corr}};
    } else {
        match = nullptr;
    }
    return {{"neighbor", outcome.neighbor},
            {"candidates", outcome.candidates},
            {"match", match},
            {"rule", outcome.rule ? json(render_rule(*outcome.rule)) : json(nullptr)},
            {"verified", outcome.verified},
            {"reason", outcome.reason.empty() ? json(nullptr) : json(outcome.reason)}};
}

json to_json(const PropagationTrace& trace, const PeerNetwork& net) {
    json hops = json::array();
    for (const auto& h : trace.hops) {
        json hop;
        hop["peer"] = h.peer;
        if (h.error.empty()) {
            const PeerSchema* peer = net.find_peer(h.peer);
            std::string rendered;
            try {
                rendered = render_query_sql(h.query, *peer);
            } catch (const PdmsError&) {
                rendered = render_query_datalog(h.query);
            }
            hop["query"] = rendered;
        } else {
            hop["query"] = nullptr;
        }
        hop["loss"] = h.loss ? to_json(*h.loss) : json(nullptr);
        hop["recovered"] = h.recovered;
        hop["answers"] = h.answers;
        hop["error"] = h.error.empty() ? json(nullptr) : json(h.error);
        hops.push_back(std::move(hop));
    }
    return {{"path", trace.path}, {"hops", hops}, {"answers", trace.origin_answers}};
}

json to_json(const Metrics& metrics) {
    return {{"countA", metrics.count_a},
            {"countB", metrics.count_b},
            {"gained", metrics.gained},
            {"lost", metrics.lost},
            {"recall", metrics.recall ? json(*metrics.recall) : json(nullptr)}};
}

json to_json(const Diagnostic& diagnostic) {
    return {{"code", diagnostic.code}, {"message", diagnostic.message}};
}

}  // namespace pdms
