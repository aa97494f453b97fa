#include "sqlab/serialize.hpp"

namespace sqlab {

namespace {

Json edge_state(EdgeState e) { return Json::array({e.first, e.second}); }

}  // namespace

Json to_json(const Fraction& f) { return {{"num", f.num}, {"den", f.den}, {"value", f.value()}}; }

Json to_json(const SquarePath& p) { return {{"kind", "path"}, {"length", p.size()}, {"vertices", p.vertices()}}; }

Json to_json(const SquareCycle& c) { return {{"kind", "cycle"}, {"length", c.size()}, {"vertices", c.vertices()}}; }

Json to_json(const RegularityReport& r) {
    Json j;
    j["mode"] = r.mode == RegularityMode::two_sided ? "two-sided" : "lower";
    j["left"] = r.pair.left;
    j["right"] = r.pair.right;
    j["density"] = to_json(r.density);
    j["reference_p"] = r.reference_p;
    j["epsilon"] = r.epsilon;
    j["verdict"] = to_string(r.verdict);
    j["samples_evaluated"] = r.samples_evaluated;
    if (r.witness) {
        j["witness"] = {{"left", r.witness->left},
                        {"right", r.witness->right},
                        {"density", to_json(r.witness->density)},
                        {"deviation", r.witness->deviation},
                        {"sample_index", r.witness->sample_index}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

Json to_json(const AttackResult& a, const AdversarySpec& spec) {
    Json j;
    j["kind"] = std::string(to_string(spec.kind));
    if (spec.r) j["r"] = *spec.r;
    if (spec.c) j["c"] = *spec.c;
    if (spec.target) j["target"] = *spec.target;
    if (spec.m) j["m"] = *spec.m;
    j["seed"] = spec.seed;
    j["n"] = a.graph.n();
    j["edges_after"] = a.graph.edge_count();
    j["edges_removed"] = a.edges_removed;
    j["min_degree_before"] = a.min_degree_before;
    j["min_degree_after"] = a.min_degree_after;
    j["max_deleted_fraction"] = a.max_deleted_fraction;
    j["blocked"] = a.blocked;
    return j;
}

Json to_json(const PruneResult& p) {
    Json pairs = Json::array();
    for (const auto& r : p.pairs)
        pairs.push_back({{"pair", r.pair},
                         {"schedule_index", r.schedule_index},
                         {"initial_edges", r.initial_edges},
                         {"removed", r.removed},
                         {"fraction", r.fraction},
                         {"limit", r.limit},
                         {"exceeds_limit", r.exceeds_limit}});
    return {{"threshold", p.threshold},
            {"total_removed", p.total_removed},
            {"eps_cor_modelled", p.eps_cor_modelled},
            {"pairs", std::move(pairs)}};
}

Json to_json(const GtildeIIReport& r) {
    Json classes = Json::array();
    for (const auto& c : r.classes)
        classes.push_back({{"class", c.cls},
                           {"window_failures", c.window_failures},
                           {"regularity_failures", c.regularity_failures},
                           {"exceptions", c.exceptions},
                           {"budget", c.budget},
                           {"within_budget", c.within_budget}});
    return {{"within_budget", r.within_budget}, {"classes", std::move(classes)}};
}

Json to_json(const EmbeddingTrace& t) {
    Json windows = Json::array();
    for (const auto& w : t.windows)
        windows.push_back({{"index", w.index},
                           {"classes", w.classes},
                           {"pool", w.pool},
                           {"good_fraction", w.good_fraction},
                           {"sampled", w.sampled},
                           {"chosen", edge_state(w.chosen)},
                           {"chosen_fraction", w.chosen_fraction},
                           {"chosen_good", w.chosen_good},
                           {"path_length", w.path_length}});
    Json j;
    j["mode"] = to_string(t.mode);
    j["class_order"] = t.class_order;
    j["class_size"] = t.class_size;
    j["reserve_size"] = t.reserve_size;
    j["start"] = edge_state(t.start);
    j["start_backward_fraction"] = t.start_backward_fraction;
    j["windows"] = std::move(windows);
    j["window_phase_length"] = t.window_phase_length;
    j["closing"] = to_string(t.closing);
    j["closing_truncations"] = t.closing_truncations;
    j["closing_nodes"] = t.closing_nodes;
    j["final"] = t.cycle ? to_json(*t.cycle) : to_json(t.path);
    j["notes"] = t.notes;
    return j;
}

Json to_json(const PartitionResult& p) {
    Json j;
    j["r"] = p.partition.classes.size();
    j["class_size"] = p.partition.class_size();
    j["exceptional"] = p.partition.exceptional.size();
    j["violated_pairs"] = p.violated_pairs;
    j["rounds_used"] = p.rounds_used;
    j["min_degree_ok"] = p.min_degree_ok;
    j["reduced_degree"] = p.reduced_degree;
    j["warnings"] = p.warnings;
    return j;
}

std::vector<Vertex> vertices_from_json(const Json& j) { return j.at("vertices").get<std::vector<Vertex>>(); }

}  // namespace sqlab
