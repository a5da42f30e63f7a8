#include "pdms_cli/cli.hpp"

#include "pdms/canonical.hpp"
#include "pdms/loss.hpp"
#include "pdms/parser.hpp"
#include "pdms/propagation.hpp"
#include "pdms/render.hpp"
#include "pdms/rewrite.hpp"
#include "pdms/serialize.hpp"
#include "pdms/simulator.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <deque>
#include <fstream>
#include <sstream>

namespace pdms::cli {

namespace {

using nlohmann::json;

struct Options {
    std::string format = "text";
    bool quiet = false;

    std::string scenario_path;
    std::string query_name;
    std::string to_peer;
    std::string via_peer;
    std::string emit_path;

    std::uint64_t seed = 1;
    std::size_t rows = 10;
    bool with_recovery = false;
    bool without_recovery = false;
    bool both = false;
    std::string oracle_name;
    std::vector<std::string> pool_specs;
    std::vector<std::string> key_attrs{"SID", "PID", "PhID", "vid"};
    bool use_scenario_data = false;

    bool is_json() const { return format == "json"; }
};

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PdmsError("cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

const Scenario::NamedQuery& need_query(const Scenario& sc, const std::string& name) {
    const auto* q = sc.find_query(name);
    if (!q) throw PdmsError("scenario has no query named " + name);
    return *q;
}

std::string render_for(const Scenario& sc, const Query& q, const std::string& peer) {
    const PeerSchema* ps = sc.network.find_peer(peer);
    try {
        return render_query_sql(q, *ps);
    } catch (const PdmsError&) {
        return render_query_datalog(q);
    }
}

void print_query(std::ostringstream& out, const Scenario& sc, const std::string& label,
                 const Query& q, const std::string& peer) {
    out << label << " (at " << peer << "):\n";
    std::istringstream lines(render_for(sc, q, peer));
    std::string line;
    while (std::getline(lines, line)) out << "  " << line << "\n";
}

void print_report(std::ostringstream& out, const LossReport& rep) {
    if (rep.empty) {
        out << "no semantic loss detected\n";
        return;
    }
    out << "semantic loss detected:\n";
    for (const auto& m : rep.matches) {
        for (const auto& b : m.backs) {
            if (b.extra.empty()) continue;
            out << "  disjunct " << m.query_disjunct << " came back with extra restrictions:";
            for (const auto& p : b.extra) out << " " << to_string(p);
            out << "\n";
        }
    }
    for (auto i : rep.lost_disjuncts) {
        out << "  disjunct " << i << " has no counterpart in the translated-back query\n";
    }
    for (const auto& d : rep.dropped) {
        out << "  forward disjunct " << d.disjunct << " could not be translated back: " << d.reason
            << "\n";
    }
    if (rep.discriminator) {
        out << "  discriminator: head position " << rep.discriminator->position << " excluded {";
        for (std::size_t i = 0; i < rep.discriminator->excluded.size(); ++i) {
            if (i) out << ", ";
            out << '"' << rep.discriminator->excluded[i] << '"';
        }
        out << "}\n";
    }
}

std::vector<std::string> shortest_path(const PeerNetwork& net, const std::string& from,
                                       const std::string& to) {
    std::map<std::string, std::string> parent;
    std::deque<std::string> frontier{from};
    std::set<std::string> seen{from};
    while (!frontier.empty()) {
        std::string cur = frontier.front();
        frontier.pop_front();
        if (cur == to) break;
        for (const auto& n : net.neighbors(cur)) {
            if (seen.insert(n).second) {
                parent[n] = cur;
                frontier.push_back(n);
            }
        }
    }
    if (!seen.count(to)) {
        throw PdmsError("no mapping path from " + from + " to " + to);
    }
    std::vector<std::string> path{to};
    while (path.back() != from) path.push_back(parent.at(path.back()));
    std::reverse(path.begin(), path.end());
    return path;
}

GeneratorConfig make_config(const Options& opt) {
    GeneratorConfig cfg;
    cfg.seed = opt.seed;
    cfg.rows_per_relation = opt.rows;
    cfg.value_pools["class"] = {"Doctor", "EMT", "Nurse", "Paramedic"};
    cfg.value_pools["skill"] = {"Doctor", "EMT", "Nurse", "Paramedic"};
    for (const auto& spec : opt.pool_specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) {
            throw PdmsError("--pool expects attr=v1,v2,... got '" + spec + "'");
        }
        std::vector<std::string> values;
        std::stringstream ss(spec.substr(eq + 1));
        std::string v;
        while (std::getline(ss, v, ',')) values.push_back(v);
        if (values.empty()) throw PdmsError("--pool needs at least one value");
        cfg.value_pools[spec.substr(0, eq)] = std::move(values);
    }
    for (const auto& k : opt.key_attrs) cfg.key_attributes.insert(k);
    return cfg;
}

// ---- subcommands ----

int cmd_reformulate(const Options& opt, std::ostringstream& out) {
    Scenario sc = load_scenario(opt.scenario_path);
    const auto& nq = need_query(sc, opt.query_name);
    if (!sc.network.find_peer(opt.to_peer)) throw PdmsError("unknown peer " + opt.to_peer);
    auto path = shortest_path(sc.network, nq.peer, opt.to_peer);

    std::vector<std::pair<std::string, Query>> hops{{nq.peer, canonicalize(nq.query)}};
    for (std::size_t i = 1; i < path.size(); ++i) {
        const Mapping* m = sc.network.find_mapping(path[i - 1], path[i]);
        hops.push_back({path[i], unfold_forward(hops.back().second, *m, path[i])});
    }
    if (opt.is_json()) {
        json queries = json::array();
        for (const auto& [peer, q] : hops) {
            queries.push_back({{"peer", peer}, {"query", render_for(sc, q, peer)}});
        }
        out << json{{"path", path}, {"queries", queries}}.dump(2) << "\n";
    } else {
        for (const auto& [peer, q] : hops) {
            if (opt.quiet && peer != opt.to_peer) continue;
            print_query(out, sc, peer == nq.peer ? "query" : "reformulated", q, peer);
        }
    }
    return 0;
}

int cmd_roundtrip(const Options& opt, std::ostringstream& out) {
    Scenario sc = load_scenario(opt.scenario_path);
    const auto& nq = need_query(sc, opt.query_name);
    const Mapping* m = sc.network.find_mapping(nq.peer, opt.via_peer);
    if (!m) throw PdmsError("no mapping between " + nq.peer + " and " + opt.via_peer);
    RoundTrip rt = roundtrip(nq.query, *m);
    if (opt.is_json()) {
        json dropped = json::array();
        for (const auto& d : rt.dropped) {
            dropped.push_back({{"disjunct", d.disjunct}, {"reason", d.reason}});
        }
        out << json{{"original", render_for(sc, rt.original, nq.peer)},
                    {"forward", render_for(sc, rt.forward, opt.via_peer)},
                    {"back", render_for(sc, rt.back, nq.peer)},
                    {"dropped", dropped}}
                   .dump(2)
            << "\n";
    } else {
        print_query(out, sc, "original", rt.original, nq.peer);
        print_query(out, sc, "forward", rt.forward, opt.via_peer);
        print_query(out, sc, "back", rt.back, nq.peer);
        for (const auto& d : rt.dropped) {
            out << "dropped forward disjunct " << d.disjunct << ": " << d.reason << "\n";
        }
    }
    return 0;
}

int cmd_detect_loss(const Options& opt, std::ostringstream& out) {
    Scenario sc = load_scenario(opt.scenario_path);
    const auto& nq = need_query(sc, opt.query_name);
    const Mapping* m = sc.network.find_mapping(nq.peer, opt.via_peer);
    if (!m) throw PdmsError("no mapping between " + nq.peer + " and " + opt.via_peer);
    RoundTrip rt = roundtrip(nq.query, *m);
    LossReport rep = detect_loss(rt.original, rt.back, rt.dropped);
    if (opt.is_json()) {
        out << to_json(rep).dump(2) << "\n";
    } else {
        if (!opt.quiet) {
            print_query(out, sc, "original", rt.original, nq.peer);
            print_query(out, sc, "back", rt.back, nq.peer);
        }
        print_report(out, rep);
    }
    return 0;
}

int cmd_recover(const Options& opt, std::ostringstream& out) {
    Scenario sc = load_scenario(opt.scenario_path);
    const auto& nq = need_query(sc, opt.query_name);
    RecoveryResult rec = track_and_replace(nq.query, sc.network, nq.peer, opt.via_peer);

    const bool repaired = rec.spec.has_value();
    if (opt.is_json()) {
        json doc{{"report", to_json(rec.report)},
                 {"spec", repaired ? to_json(*rec.spec) : json(nullptr)},
                 {"recovered", repaired}};
        if (repaired && !opt.emit_path.empty()) doc["emitted"] = opt.emit_path;
        out << doc.dump(2) << "\n";
    } else {
        print_report(out, rec.report);
        if (repaired) {
            out << "complement relation: " << rec.spec->relation.name << " at " << rec.spec->host_peer
                << " (virtual)\n";
            out << "definition: " << render_rule(rec.spec->definition_rule) << "\n";
            out << "contribution: " << render_rule(rec.spec->contribution_rule) << "\n";
            out << "recovery verified: the round trip now reports no loss\n";
        } else if (!rec.report.empty) {
            out << "loss has no complement-shaped repair; network left unchanged\n";
        } else {
            out << "no emitted changes\n";
        }
    }
    if (repaired && !opt.emit_path.empty()) {
        Scenario augmented = sc;
        augmented.network = rec.network;
        std::ofstream file(opt.emit_path);
        if (!file) throw PdmsError("cannot write " + opt.emit_path);
        file << render_scenario(augmented);
    }
    return rec.report.empty || repaired ? 0 : 1;
}

int cmd_propagate(const Options& opt, std::ostringstream& out) {
    Scenario sc = load_scenario(opt.scenario_path);
    const auto& nq = need_query(sc, opt.query_name);
    RecoveryResult rec = track_and_replace(nq.query, sc.network, nq.peer, opt.via_peer);
    if (!rec.spec) {
        if (opt.is_json()) {
            out << json{{"report", to_json(rec.report)}, {"spec", nullptr}, {"outcomes", json::array()}}
                       .dump(2)
                << "\n";
        } else {
            print_report(out, rec.report);
            out << (rec.report.empty ? "nothing to propagate\n"
                                     : "loss has no complement-shaped repair; nothing to propagate\n");
        }
        return rec.report.empty ? 0 : 1;
    }
    auto [net, outcomes] = propagate_complement(rec.network, *rec.spec, opt.via_peer, nq.query);
    if (opt.is_json()) {
        json ocs = json::array();
        for (const auto& oc : outcomes) ocs.push_back(to_json(oc));
        out << json{{"report", to_json(rec.report)}, {"spec", to_json(*rec.spec)}, {"outcomes", ocs}}
                   .dump(2)
            << "\n";
    } else {
        if (!opt.quiet) print_report(out, rec.report);
        out << "complement " << rec.spec->relation.name << " applied at " << rec.spec->host_peer
            << "\n";
        for (const auto& oc : outcomes) {
            out << "neighbor " << oc.neighbor << ": ";
            if (oc.rule && oc.verified) {
                out << "rule added, verified\n  " << render_rule(*oc.rule) << "\n";
            } else if (!oc.reason.empty()) {
                out << oc.reason << "\n";
            } else {
                out << "not verified\n";
            }
        }
    }
    return 0;
}

int cmd_simulate(const Options& opt, std::ostringstream& out) {
    Scenario sc = load_scenario(opt.scenario_path);
    const auto& nq = need_query(sc, opt.query_name);
    GeneratorConfig cfg = make_config(opt);
    Instance data = opt.use_scenario_data ? sc.instance : generate_data(sc.network, cfg);

    std::optional<TupleSet> oracle;
    if (!opt.oracle_name.empty()) {
        const auto& oq = need_query(sc, opt.oracle_name);
        oracle = evaluate(oq.query, data, sc.network);
    }

    const bool run_without = opt.both || opt.without_recovery || !opt.with_recovery;
    const bool run_with = opt.both || opt.with_recovery;

    std::optional<PropagationTrace> without, with;
    if (run_without) {
        without = propagate_query(sc.network, nq.peer, nq.query, data, {.recover = false});
    }
    if (run_with) {
        with = propagate_query(sc.network, nq.peer, nq.query, data, {.recover = true});
    }

    if (opt.is_json()) {
        json doc;
        if (without) doc["without"] = to_json(*without, sc.network);
        if (with) doc["with"] = to_json(*with, sc.network);
        if (without && with) doc["metrics"] = to_json(compare_runs(*without, *with, oracle));
        if (oracle) doc["oracleAnswers"] = *oracle;
        out << doc.dump(2) << "\n";
    } else {
        auto show = [&](const char* label, const PropagationTrace& t) {
            out << label << ": visited";
            for (const auto& p : t.path) out << " " << p;
            out << "; " << t.origin_answers.size() << " answers\n";
            if (!opt.quiet) {
                for (const auto& h : t.hops) {
                    if (!h.error.empty()) {
                        out << "  " << h.peer << ": dead hop (" << h.error << ")\n";
                    } else {
                        out << "  " << h.peer << ": " << h.answers.size() << " answers"
                            << (h.recovered ? " (recovered)" : "") << "\n";
                    }
                }
            }
        };
        if (without) show("without recovery", *without);
        if (with) show("with recovery", *with);
        if (without && with) {
            Metrics m = compare_runs(*without, *with, oracle);
            out << "gained " << m.gained.size() << ", lost " << m.lost.size();
            if (m.recall) out << ", recall " << *m.recall;
            out << "\n";
        }
    }
    return 0;
}

}  // namespace

CommandResult run(const std::vector<std::string>& args) {
    Options opt;
    CLI::App app{"Query reformulation, semantic-loss recovery, and propagation for peer networks",
                 "pdms"};
    app.require_subcommand(1);
    app.add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    app.add_flag("--quiet", opt.quiet, "Suppress per-hop detail");

    auto add_scenario = [&](CLI::App* cmd) {
        cmd->fallthrough();  // global flags may follow the subcommand
        cmd->add_option("--scenario", opt.scenario_path, "Scenario file (.pdms)")->required();
        cmd->add_option("--query", opt.query_name, "Named query from the scenario")->required();
    };

    CLI::App* reformulate = app.add_subcommand("reformulate", "Unfold a query along the shortest mapping path");
    add_scenario(reformulate);
    reformulate->add_option("--to", opt.to_peer, "Target peer")->required();

    CLI::App* rt = app.add_subcommand("roundtrip", "Reformulate across one edge and back");
    add_scenario(rt);
    rt->add_option("--via", opt.via_peer, "The peer the query is reformulated onto")->required();

    CLI::App* dl = app.add_subcommand("detect-loss", "Report the semantic loss of a round trip");
    add_scenario(dl);
    dl->add_option("--via", opt.via_peer, "The peer the query is reformulated onto")->required();

    CLI::App* rec = app.add_subcommand("recover", "Synthesize and apply a complement view");
    add_scenario(rec);
    rec->add_option("--via", opt.via_peer, "The peer causing the loss")->required();
    rec->add_option("--emit", opt.emit_path, "Write the augmented scenario to this file");

    CLI::App* prop = app.add_subcommand("propagate", "Recover, then link the complement to the host's neighbors");
    add_scenario(prop);
    prop->add_option("--via", opt.via_peer, "The peer causing the loss")->required();

    CLI::App* sim = app.add_subcommand("simulate", "Propagate a query over synthetic data and compare runs");
    add_scenario(sim);
    sim->add_option("--seed", opt.seed, "Generator seed")->capture_default_str();
    sim->add_option("--rows", opt.rows, "Rows per relation")->capture_default_str();
    auto* w = sim->add_flag("--with-recovery", opt.with_recovery, "Run with recovery only");
    auto* wo = sim->add_flag("--without-recovery", opt.without_recovery, "Run without recovery only");
    sim->add_flag("--both", opt.both, "Run both and compare (default)")->excludes(w)->excludes(wo);
    w->excludes(wo);
    sim->add_option("--oracle", opt.oracle_name, "Named query whose answers define recall");
    sim->add_option("--pool", opt.pool_specs, "Value pool attr=v1,v2,... (repeatable)");
    sim->add_option("--key", opt.key_attrs, "Key attribute generated as unique ids (repeatable)")
        ->capture_default_str();
    sim->add_flag("--scenario-data", opt.use_scenario_data,
                  "Evaluate on the scenario's data blocks instead of generated data");

    std::vector<std::string> argv_vec = args;
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>("pdms"));
    for (auto& a : argv_vec) argv.push_back(a.data());

    CommandResult result;
    std::ostringstream out, err;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        result.out = app.help();
        result.exit_code = 0;
        return result;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        result.err = err.str();
        result.exit_code = 2;
        return result;
    }

    try {
        if (app.got_subcommand("reformulate")) {
            result.exit_code = cmd_reformulate(opt, out);
        } else if (app.got_subcommand("roundtrip")) {
            result.exit_code = cmd_roundtrip(opt, out);
        } else if (app.got_subcommand("detect-loss")) {
            result.exit_code = cmd_detect_loss(opt, out);
        } else if (app.got_subcommand("recover")) {
            result.exit_code = cmd_recover(opt, out);
        } else if (app.got_subcommand("propagate")) {
            result.exit_code = cmd_propagate(opt, out);
        } else if (app.got_subcommand("simulate")) {
            result.exit_code = cmd_simulate(opt, out);
        }
    } catch (const PdmsError& e) {
        if (opt.is_json()) {
            out.str("");
            out << json{{"error", e.what()}}.dump(2) << "\n";
        }
        err << "error: " << e.what() << "\n";
        result.exit_code = 1;
    }
    result.out = out.str();
    result.err = err.str();
    return result;
}

}  // namespace pdms::cli
