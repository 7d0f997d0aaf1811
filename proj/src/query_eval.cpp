#include "cpg/query.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <tuple>

namespace cpg {

namespace {

std::string fold(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

using Binding = std::variant<std::size_t, PathMatch>;  // node index or path
using Row = std::map<std::string, Binding>;

[[noreturn]] void too_many_rows(std::size_t cap) {
    throw QueryError(QueryErrc::ResultLimitExceeded, 0, "more than " + std::to_string(cap) + " intermediate rows");
}

// Enumerates all bindings of one path pattern that extend `base`. Trails only:
// an edge appears at most once per path.
class PatternMatcher {
public:
    PatternMatcher(const GuidelineGraph& g, const PathPattern& p,
                   const std::multimap<std::string, const ContainsFilter*>& filters, std::vector<Row>& out,
                   std::size_t cap)
        : g_(g), p_(p), filters_(filters), out_(out), cap_(cap), used_(g.edge_count(), 0) {}

    void run(const Row& base) {
        local_ = base;
        const auto& first = p_.nodes.front();
        if (first.variable) {
            if (auto it = base.find(*first.variable); it != base.end()) {
                start(std::get<std::size_t>(it->second));
                return;
            }
        }
        for (std::size_t n = 0; n < g_.node_count(); ++n) start(n);
    }

private:
    void start(std::size_t node) {
        path_.nodes.assign(1, node);
        path_.edges.clear();
        at_node(0, node);
    }

    bool node_ok(const NodePattern& np, std::size_t node) const {
        const auto& gn = g_.nodes()[node];
        if (np.label && gn.category != np.label) return false;
        if (!np.variable) return true;
        if (auto it = local_.find(*np.variable); it != local_.end()) {
            const auto* bound = std::get_if<std::size_t>(&it->second);
            if (!bound || *bound != node) return false;
        }
        auto [lo, hi] = filters_.equal_range(*np.variable);
        for (auto it = lo; it != hi; ++it)
            if (!filter_matches(*it->second, gn)) return false;
        return true;
    }

    void at_node(std::size_t i, std::size_t node) {
        const auto& np = p_.nodes[i];
        if (!node_ok(np, node)) return;
        bool fresh = np.variable && !local_.count(*np.variable);
        if (fresh) local_.emplace(*np.variable, node);
        if (i == p_.hops.size())
            emit();
        else
            walk(i, node, 0);
        if (fresh) local_.erase(*np.variable);
    }

    void walk(std::size_t hop, std::size_t cur, int depth) {
        const auto& h = p_.hops[hop];
        if (depth >= h.min_length()) at_node(hop + 1, cur);
        if (depth >= h.max_length()) return;
        for (auto e : g_.out_edges(cur)) {
            if (used_[e]) continue;
            used_[e] = 1;
            auto next = g_.edge_target_index(e);
            path_.edges.push_back(e);
            path_.nodes.push_back(next);
            walk(hop, next, depth + 1);
            path_.nodes.pop_back();
            path_.edges.pop_back();
            used_[e] = 0;
        }
    }

    void emit() {
        Row row = local_;
        if (p_.path_variable) row[*p_.path_variable] = path_;
        out_.push_back(std::move(row));
        if (out_.size() > cap_) too_many_rows(cap_);
    }

    const GuidelineGraph& g_;
    const PathPattern& p_;
    const std::multimap<std::string, const ContainsFilter*>& filters_;
    std::vector<Row>& out_;
    std::size_t cap_;
    std::vector<char> used_;
    Row local_;
    PathMatch path_;
};

ResultValue project(const ReturnItem& item, const Row& row, const GuidelineGraph& g) {
    const auto& b = row.at(item.variable);
    switch (item.kind) {
        case ReturnItem::Kind::Variable:
            if (const auto* n = std::get_if<std::size_t>(&b)) return NodeValue{*n};
            return std::get<PathMatch>(b);
        case ReturnItem::Kind::Nodes:
            return NodeListValue{std::get<PathMatch>(b).nodes};
        case ReturnItem::Kind::Property: {
            auto n = std::get<std::size_t>(b);
            const auto& node = g.nodes()[n];
            PropertyValue v{n, item.property, std::nullopt};
            v.text = item.property == NodeProperty::Content ? std::optional<std::string>(node.content) : node.context;
            return v;
        }
    }
    return NodeValue{0};
}

// Total order key: (path length, node-id sequence, edge sequence, property texts).
struct RowKey {
    std::size_t length = 0;
    std::vector<std::string_view> ids;
    std::vector<std::size_t> edges;
    std::vector<std::optional<std::string_view>> texts;

    friend auto operator<=>(const RowKey&, const RowKey&) = default;
    friend bool operator==(const RowKey&, const RowKey&) = default;
};

RowKey key_of(const ResultRow& row, const GuidelineGraph& g) {
    RowKey k;
    auto id = [&](std::size_t n) { return std::string_view(g.nodes()[n].id); };
    for (const auto& v : row) {
        if (const auto* p = std::get_if<PathMatch>(&v)) {
            k.length += p->length();
            for (auto n : p->nodes) k.ids.push_back(id(n));
            k.edges.insert(k.edges.end(), p->edges.begin(), p->edges.end());
        } else if (const auto* l = std::get_if<NodeListValue>(&v)) {
            for (auto n : l->nodes) k.ids.push_back(id(n));
        } else if (const auto* n = std::get_if<NodeValue>(&v)) {
            k.ids.push_back(id(n->node));
        } else if (const auto* pr = std::get_if<PropertyValue>(&v)) {
            const auto& node = g.nodes()[pr->node];
            k.ids.push_back(node.id);
            if (pr->property == NodeProperty::Content)
                k.texts.emplace_back(node.content);
            else
                k.texts.push_back(node.context ? std::optional<std::string_view>(*node.context) : std::nullopt);
        }
    }
    return k;
}

}  // namespace

bool filter_matches(const ContainsFilter& filter, const GuidelineNode& node) {
    const std::string* subject = nullptr;
    if (filter.property == NodeProperty::Content)
        subject = &node.content;
    else if (node.context)
        subject = &*node.context;
    if (!subject) return false;
    if (!filter.case_folded) return subject->find(filter.needle) != std::string::npos;
    return fold(*subject).find(fold(filter.needle)) != std::string::npos;
}

ResultSet evaluate(const QueryAst& ast, const GuidelineGraph& graph, const EvalOptions& options) {
    std::vector<Row> rows(1);

    for (std::size_t ci = 0; ci < ast.clauses.size(); ++ci) {
        const auto& clause = ast.clauses[ci];
        if (const auto* m = std::get_if<MatchClause>(&clause)) {
            // WHERE clauses that directly follow prune during matching; they are
            // re-applied as ordinary filters afterwards.
            std::multimap<std::string, const ContainsFilter*> pushdown;
            for (std::size_t j = ci + 1; j < ast.clauses.size(); ++j) {
                const auto* w = std::get_if<WhereClause>(&ast.clauses[j]);
                if (!w) break;
                for (const auto& f : w->filters) pushdown.emplace(f.variable, &f);
            }
            for (const auto& pattern : m->patterns) {
                std::vector<Row> next;
                PatternMatcher matcher(graph, pattern, pushdown, next, options.row_cap);
                for (const auto& row : rows) matcher.run(row);
                rows = std::move(next);
                if (rows.empty()) break;
            }
        } else if (const auto* w = std::get_if<WhereClause>(&clause)) {
            std::erase_if(rows, [&](const Row& row) {
                for (const auto& f : w->filters)
                    if (!filter_matches(f, graph.nodes()[std::get<std::size_t>(row.at(f.variable))])) return true;
                return false;
            });
        } else if (const auto* with = std::get_if<WithClause>(&clause)) {
            std::set<Row> projected;
            for (const auto& row : rows) {
                Row r;
                for (const auto& v : with->variables) r.emplace(v, row.at(v));
                projected.insert(std::move(r));
            }
            rows.assign(projected.begin(), projected.end());
        }
        if (rows.empty()) break;
    }

    ResultSet result;
    for (const auto& item : ast.returns) result.columns.push_back(item.column_name());

    std::vector<std::pair<RowKey, ResultRow>> keyed;
    keyed.reserve(rows.size());
    for (const auto& row : rows) {
        ResultRow out;
        out.reserve(ast.returns.size());
        for (const auto& item : ast.returns) out.push_back(project(item, row, graph));
        auto k = key_of(out, graph);
        keyed.emplace_back(std::move(k), std::move(out));
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    keyed.erase(std::unique(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
                keyed.end());
    result.rows.reserve(keyed.size());
    for (auto& [k, row] : keyed) result.rows.push_back(std::move(row));
    return result;
}

}  // namespace cpg
