#include "wexch/serialize.hpp"

#include <charconv>
#include <sstream>

namespace wexch {

std::string fmt_double(double v) {
    char buf[64];
    const std::to_chars_result res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& payload) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : payload) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        buf[i] = hex[h & 0xf];
        h >>= 4;
    }
    return std::string(buf, 16);
}

ordered_json to_json(const Dist& d) {
    ordered_json arr = ordered_json::array();
    for (double v : d.linear()) arr.push_back(v);
    return arr;
}

ordered_json to_json(const Measure& m) {
    ordered_json arr = ordered_json::array();
    for (double v : m.linear()) arr.push_back(v);
    return arr;
}

ordered_json to_json(const JointDist& q) {
    ordered_json out;
    out["n"] = q.n();
    out["k"] = q.k();
    ordered_json arr = ordered_json::array();
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) arr.push_back(q.at(idx).linear());
    out["table"] = std::move(arr);
    return out;
}

ordered_json to_json(const CheckReport& r) {
    ordered_json out;
    out["pass"] = r.pass;
    out["max_violation"] = r.max_violation;
    out["tolerance"] = r.tolerance;
    if (r.witness_tuple) {
        out["witness_tuple"] = *r.witness_tuple;
        out["witness_swap"] = {r.witness_swap->first, r.witness_swap->second};
    } else {
        out["witness_tuple"] = nullptr;
        out["witness_swap"] = nullptr;
    }
    out["detail"] = r.detail;
    return out;
}

ordered_json to_json(const TailClass& t) {
    ordered_json out;
    out["verdict"] = to_string(t.verdict);
    out["evidence"] = t.evidence;
    out["partial_sums"] = {{"n_1e2", t.partial_sum_1e2},
                           {"n_1e4", t.partial_sum_1e4},
                           {"n_1e6", t.partial_sum_1e6}};
    return out;
}

ordered_json to_json(const GraphGS& g, const Alphabet& alphabet) {
    ordered_json out;
    ordered_json s = ordered_json::array();
    for (int x : g.subset) s.push_back(alphabet.label(x));
    out["S"] = std::move(s);
    out["connected"] = g.connected_proven;
    out["disconnected_proven"] = g.disconnected_proven;
    out["has_unknown"] = g.has_unknown;
    ordered_json edges = ordered_json::array();
    for (const GraphGS::Pair& p : g.pairs) {
        ordered_json e;
        e["x0"] = alphabet.label(p.x0);
        e["x1"] = alphabet.label(p.x1);
        e["tail"] = to_json(p.evidence);
        edges.push_back(std::move(e));
    }
    out["edges"] = std::move(edges);
    return out;
}

ordered_json to_json(const ConditionReport& r, const Alphabet& alphabet) {
    ordered_json out;
    out["family"] = r.family;
    ordered_json cands = ordered_json::array();
    ordered_json suff = ordered_json::array();
    for (const SufficientEntry& e : r.sufficient) {
        cands.push_back(e.candidate);
        ordered_json one;
        one["candidate"] = e.candidate;
        one["tail"] = to_json(e.tail);
        suff.push_back(std::move(one));
    }
    out["candidates"] = std::move(cands);
    out["sufficient"] = std::move(suff);
    out["binary"] = r.binary ? to_json(*r.binary) : ordered_json(nullptr);
    ordered_json subsets = ordered_json::array();
    for (const NecessaryReport::Subset& s : r.necessary.subsets) {
        ordered_json one = to_json(s.graph, alphabet);
        one["verdict"] = to_string(s.verdict);
        subsets.push_back(std::move(one));
    }
    out["subsets"] = std::move(subsets);
    out["necessary_verdict"] = to_string(r.necessary.verdict);
    ordered_json conclusion;
    conclusion["de_finetti"] = to_string(r.in_de_finetti);
    conclusion["zero_one"] = to_string(r.in_zero_one);
    conclusion["lln"] = to_string(r.in_lln);
    conclusion["basis"] = r.basis;
    out["conclusion"] = std::move(conclusion);
    return out;
}

ordered_json to_json(const EdgeEstimate& e, const Alphabet& alphabet) {
    ordered_json out;
    out["x0"] = alphabet.label(e.x0);
    out["x1"] = alphabet.label(e.x1);
    out["defined"] = e.defined;
    out["ratio"] = e.ratio;
    out["effective_sample_size"] = e.effective_sample_size;
    out["support_count"] = e.support_count;
    return out;
}

ordered_json to_json(const ReconstructedComponent& rc, const Alphabet& alphabet) {
    ordered_json out;
    ordered_json s = ordered_json::array();
    for (int x : rc.support) s.push_back(alphabet.label(x));
    out["support"] = std::move(s);
    out["root"] = alphabet.label(rc.root);
    ordered_json tree = ordered_json::array();
    for (const EdgeEstimate& e : rc.tree) tree.push_back(to_json(e, alphabet));
    out["tree"] = std::move(tree);
    out["tilde_p"] = to_json(rc.tilde_p);
    out["tilde_p_star"] = to_json(rc.tilde_p_star);
    out["used_complete_graph"] = rc.used_complete_graph;
    return out;
}

std::string write_sample_run(const SampleRun& run, const Alphabet& alphabet,
                             const std::string& spec_hash) {
    ordered_json header;
    header["seed"] = run.seed;
    header["spec_hash"] = spec_hash;
    header["n"] = run.symbols.size();
    header["drawn_component"] =
        run.drawn_component ? ordered_json(*run.drawn_component) : ordered_json(nullptr);
    std::ostringstream out;
    out << header.dump() << "\n";
    for (int x : run.symbols) out << alphabet.label(x) << "\n";
    return out.str();
}

SampleRun read_sample_run(const std::string& text, const Alphabet& alphabet) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw invalid_argument_error("read_sample_run: empty input");
    const ordered_json header = ordered_json::parse(line);
    SampleRun run;
    run.seed = header.at("seed").get<std::uint64_t>();
    if (!header.at("drawn_component").is_null())
        run.drawn_component = header.at("drawn_component").get<int>();
    const std::size_t n = header.at("n").get<std::size_t>();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        int found = -1;
        for (int x = 0; x < alphabet.size(); ++x)
            if (alphabet.label(x) == line) {
                found = x;
                break;
            }
        if (found < 0) throw invalid_argument_error("read_sample_run: unknown symbol label");
        run.symbols.push_back(found);
    }
    if (run.symbols.size() != n)
        throw invalid_argument_error("read_sample_run: symbol count mismatch");
    return run;
}

}  // namespace wexch
