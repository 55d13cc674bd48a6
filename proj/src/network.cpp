#include "pipenet/network.h"

#include "pipenet/io.h"
#include "pipenet/units.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <sstream>
#include <unordered_set>

namespace pipenet {

namespace {

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

Material::Material(std::string_view name) : name_(name)
{
    const std::string lower = to_lower(name);
    if (lower == "mscl") {
        kind_ = MaterialKind::MSCL;
        name_ = "MSCL";
    } else if (lower == "dicl") {
        kind_ = MaterialKind::DICL;
        name_ = "DICL";
    } else if (lower == "grp") {
        kind_ = MaterialKind::GRP;
        name_ = "GRP";
    } else if (lower == "mpvc") {
        kind_ = MaterialKind::mPVC;
        name_ = "mPVC";
    }
}

double Pipe::area() const { return units::circle_area(diameter); }

NetworkError::NetworkError(Kind kind, std::string message, std::size_t line, std::size_t column,
                           std::string subject)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " +
                                        std::to_string(column) + ": " + message
                                  : message),
      kind_(kind),
      line_(line),
      column_(column),
      subject_(std::move(subject))
{
}

Incidence build_incidence(const std::vector<Node>& nodes, const std::vector<Pipe>& pipes)
{
    std::vector<std::size_t> junction_col(nodes.size(), Network::npos);
    std::vector<std::size_t> fixed_col(nodes.size(), Network::npos);
    std::size_t n_junction = 0;
    std::size_t n_fixed = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].kind == NodeKind::Junction) {
            junction_col[i] = n_junction++;
        } else {
            fixed_col[i] = n_fixed++;
        }
    }

    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> t1;
    std::vector<Triplet> t2;
    t1.reserve(2 * pipes.size());
    t2.reserve(2 * pipes.size());
    for (std::size_t i = 0; i < pipes.size(); ++i) {
        const auto row = static_cast<int>(i);
        const auto place = [&](std::size_t node, double sign) {
            if (node >= nodes.size()) {
                throw std::invalid_argument("build_incidence: pipe endpoint out of range");
            }
            if (junction_col[node] != Network::npos) {
                t1.emplace_back(row, static_cast<int>(junction_col[node]), sign);
            } else {
                t2.emplace_back(row, static_cast<int>(fixed_col[node]), sign);
            }
        };
        place(pipes[i].to, +1.0);
        place(pipes[i].from, -1.0);
    }

    Incidence inc;
    inc.a1.resize(static_cast<int>(pipes.size()), static_cast<int>(n_junction));
    inc.a2.resize(static_cast<int>(pipes.size()), static_cast<int>(n_fixed));
    inc.a1.setFromTriplets(t1.begin(), t1.end());
    inc.a2.setFromTriplets(t2.begin(), t2.end());
    inc.a1.makeCompressed();
    inc.a2.makeCompressed();
    return inc;
}

Network::Network(std::vector<Node> nodes, std::vector<Pipe> pipes,
                 std::unordered_map<std::string, Source> sources,
                 std::unordered_map<std::string, OutletCoefficients> outlet_coefficients)
    : nodes_(std::move(nodes)),
      pipes_(std::move(pipes)),
      outlet_coefficients_(std::move(outlet_coefficients))
{
    using Kind = NetworkError::Kind;

    column_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        Node& n = nodes_[i];
        if (n.outlet_class) {
            n.is_outlet = true;
        } else if (n.is_outlet) {
            n.outlet_class = "DN150";
        }
        if (!node_lookup_.emplace(n.id, i).second) {
            throw NetworkError(Kind::DuplicateId, "duplicate node id '" + n.id + "'", 0, 0, n.id);
        }
        if (!std::isfinite(n.elevation)) {
            throw NetworkError(Kind::InvalidValue, "node '" + n.id + "' has non-finite elevation",
                               0, 0, n.id);
        }
        if (n.kind == NodeKind::Junction) {
            column_[i].junction = junctions_.size();
            junctions_.push_back(i);
        } else {
            if (n.demand_ref) {
                throw NetworkError(Kind::InvalidValue,
                                   "fixed-head node '" + n.id + "' cannot carry a demand", 0, 0,
                                   n.id);
            }
            if (n.is_outlet) {
                throw NetworkError(Kind::InvalidValue,
                                   "outlet '" + n.id + "' must be a junction", 0, 0, n.id);
            }
            column_[i].fixed = fixed_.size();
            fixed_.push_back(i);
        }
    }

    for (std::size_t i = 0; i < pipes_.size(); ++i) {
        const Pipe& p = pipes_[i];
        if (!pipe_lookup_.emplace(p.id, i).second) {
            throw NetworkError(Kind::DuplicateId, "duplicate pipe id '" + p.id + "'", 0, 0, p.id);
        }
        if (p.from >= nodes_.size() || p.to >= nodes_.size()) {
            throw NetworkError(Kind::DanglingReference,
                               "pipe '" + p.id + "' references a missing node", 0, 0, p.id);
        }
        if (p.from == p.to) {
            throw NetworkError(Kind::InvalidValue, "pipe '" + p.id + "' connects a node to itself",
                               0, 0, p.id);
        }
        if (!(p.length > 0.0) || !(p.diameter > 0.0) || !(p.roughness_mm >= 0.0) ||
            !std::isfinite(p.length) || !std::isfinite(p.diameter) ||
            !std::isfinite(p.roughness_mm)) {
            throw NetworkError(Kind::InvalidValue, "pipe '" + p.id + "' has invalid geometry", 0, 0,
                               p.id);
        }
        if (p.material.name().empty()) {
            throw NetworkError(Kind::InvalidValue, "pipe '" + p.id + "' has no material", 0, 0,
                               p.id);
        }
    }

    for (const auto& [id, src] : sources) {
        const auto it = node_lookup_.find(id);
        if (it == node_lookup_.end()) {
            throw NetworkError(Kind::DanglingReference, "source references missing node '" + id + "'",
                               0, 0, id);
        }
        if (nodes_[it->second].kind != NodeKind::FixedHead) {
            throw NetworkError(Kind::InvalidValue, "source '" + id + "' is not a fixed-head node", 0,
                               0, id);
        }
        if (!std::isfinite(src.head)) {
            throw NetworkError(Kind::InvalidValue, "source '" + id + "' has non-finite head", 0, 0,
                               id);
        }
    }
    sources_.resize(fixed_.size());
    for (std::size_t c = 0; c < fixed_.size(); ++c) {
        const Node& n = nodes_[fixed_[c]];
        const auto it = sources.find(n.id);
        sources_[c] = it != sources.end() ? it->second : Source{n.elevation, SourceRole::Reservoir};
    }

    for (const auto& [id, coef] : outlet_coefficients_) {
        const auto it = node_lookup_.find(id);
        if (it == node_lookup_.end()) {
            throw NetworkError(Kind::DanglingReference, "outlet references missing node '" + id + "'",
                               0, 0, id);
        }
        if (!nodes_[it->second].is_outlet) {
            throw NetworkError(Kind::InvalidValue, "node '" + id + "' has coefficients but is not an outlet",
                               0, 0, id);
        }
        if (!std::isfinite(coef.a0) || !std::isfinite(coef.a1) || !std::isfinite(coef.a2)) {
            throw NetworkError(Kind::InvalidValue, "outlet '" + id + "' has non-finite coefficients",
                               0, 0, id);
        }
    }

    // Every junction must be reachable from some fixed-head node. Fixed-head
    // nodes themselves may sit in separate components (e.g. two rising mains
    // leaving one pump station).
    if (fixed_.empty() && !junctions_.empty()) {
        throw NetworkError(Kind::Disconnected, "network has no fixed-head node", 0, 0,
                           nodes_[junctions_.front()].id);
    }
    std::vector<std::vector<std::size_t>> adjacency(nodes_.size());
    for (const Pipe& p : pipes_) {
        adjacency[p.from].push_back(p.to);
        adjacency[p.to].push_back(p.from);
    }
    std::vector<char> seen(nodes_.size(), 0);
    std::deque<std::size_t> frontier(fixed_.begin(), fixed_.end());
    for (std::size_t f : fixed_) {
        seen[f] = 1;
    }
    while (!frontier.empty()) {
        const std::size_t n = frontier.front();
        frontier.pop_front();
        for (std::size_t m : adjacency[n]) {
            if (!seen[m]) {
                seen[m] = 1;
                frontier.push_back(m);
            }
        }
    }
    for (std::size_t j : junctions_) {
        if (!seen[j]) {
            throw NetworkError(Kind::Disconnected,
                               "junction '" + nodes_[j].id + "' is not connected to any fixed-head node",
                               0, 0, nodes_[j].id);
        }
    }

    incidence_ = build_incidence(nodes_, pipes_);
}

std::optional<std::size_t> Network::find_node(std::string_view id) const
{
    const auto it = node_lookup_.find(std::string(id));
    if (it == node_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::size_t> Network::find_pipe(std::string_view id) const
{
    const auto it = pipe_lookup_.find(std::string(id));
    if (it == pipe_lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t Network::node_index(std::string_view id) const
{
    if (auto idx = find_node(id)) {
        return *idx;
    }
    throw NetworkError(NetworkError::Kind::DanglingReference,
                       "unknown node '" + std::string(id) + "'", 0, 0, std::string(id));
}

std::vector<double> Network::default_boundary_heads() const
{
    std::vector<double> heads(sources_.size());
    std::transform(sources_.begin(), sources_.end(), heads.begin(),
                   [](const Source& s) { return s.head; });
    return heads;
}

std::vector<std::size_t> Network::pump_columns() const
{
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < sources_.size(); ++c) {
        if (sources_[c].role == SourceRole::Pump) {
            cols.push_back(c);
        }
    }
    return cols;
}

std::vector<std::string> Network::materials() const
{
    std::vector<std::string> out;
    for (const Pipe& p : pipes_) {
        if (std::find(out.begin(), out.end(), p.material.name()) == out.end()) {
            out.push_back(p.material.name());
        }
    }
    return out;
}

bool Network::operator==(const Network& other) const
{
    return nodes_ == other.nodes_ && pipes_ == other.pipes_ && sources_ == other.sources_ &&
           outlet_coefficients_ == other.outlet_coefficients_;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Section { None, Nodes, Pipes, Sources, Outlets, Unknown };

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line)
{
    std::vector<Token> out;
    for (std::string_view tok : split_whitespace(line)) {
        out.push_back({tok, static_cast<std::size_t>(tok.data() - line.data()) + 1});
    }
    return out;
}

struct PendingPipe {
    std::string id;
    Token from;
    Token to;
    double length;
    double diameter_mm;
    std::string material;
    double roughness;
    std::size_t line;
};

class Parser {
public:
    Parser(std::string_view text, std::vector<ParseWarning>* warnings)
        : text_(text), warnings_(warnings)
    {
    }

    Network run()
    {
        std::size_t pos = 0;
        std::size_t line_no = 0;
        while (pos <= text_.size()) {
            std::size_t end = text_.find('\n', pos);
            if (end == std::string_view::npos) {
                end = text_.size();
            }
            ++line_no;
            std::string_view line = text_.substr(pos, end - pos);
            if (const auto hash = line.find('#'); hash != std::string_view::npos) {
                line = line.substr(0, hash);
            }
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            handle_line(line, line_no);
            pos = end + 1;
        }
        return finish();
    }

private:
    using Kind = NetworkError::Kind;

    [[noreturn]] void fail(Kind kind, const std::string& msg, std::size_t line, std::size_t col,
                           std::string subject = {})
    {
        throw NetworkError(kind, msg, line, col, std::move(subject));
    }

    double number(const Token& tok, std::size_t line, const char* what)
    {
        double v = 0.0;
        if (!parse_double(tok.text, v)) {
            fail(Kind::Syntax, std::string("expected a number for ") + what + ", got '" +
                                   std::string(tok.text) + "'",
                 line, tok.column);
        }
        return v;
    }

    void handle_line(std::string_view line, std::size_t line_no)
    {
        const auto tokens = tokenize(line);
        if (tokens.empty()) {
            return;
        }
        if (tokens[0].text.front() == '[') {
            if (tokens.size() != 1 || tokens[0].text.back() != ']' || tokens[0].text.size() < 3) {
                fail(Kind::Syntax, "malformed section header", line_no, tokens[0].column);
            }
            const std::string name = to_lower(tokens[0].text.substr(1, tokens[0].text.size() - 2));
            if (name == "nodes") {
                section_ = Section::Nodes;
            } else if (name == "pipes") {
                section_ = Section::Pipes;
            } else if (name == "sources") {
                section_ = Section::Sources;
            } else if (name == "outlets") {
                section_ = Section::Outlets;
            } else {
                section_ = Section::Unknown;
                if (warnings_) {
                    warnings_->push_back({line_no, "ignoring unknown section " +
                                                       std::string(tokens[0].text)});
                }
            }
            return;
        }

        switch (section_) {
        case Section::None:
            fail(Kind::Syntax, "data before any section header", line_no, tokens[0].column);
        case Section::Unknown:
            return;
        case Section::Nodes:
            return node_line(tokens, line_no);
        case Section::Pipes:
            return pipe_line(tokens, line_no);
        case Section::Sources:
            return source_line(tokens, line_no);
        case Section::Outlets:
            return outlet_line(tokens, line_no);
        }
    }

    void node_line(const std::vector<Token>& t, std::size_t line)
    {
        if (t.size() < 3 || t.size() > 5) {
            fail(Kind::Syntax, "node line needs 3 to 5 fields: id elevation kind [demand] [class]",
                 line, t.front().column);
        }
        Node n;
        n.id = std::string(t[0].text);
        n.elevation = number(t[1], line, "elevation");
        const std::string kind = to_lower(t[2].text);
        if (kind == "junction") {
            n.kind = NodeKind::Junction;
        } else if (kind == "fixed" || kind == "fixed_head" || kind == "reservoir") {
            n.kind = NodeKind::FixedHead;
        } else {
            fail(Kind::Syntax, "unknown node kind '" + std::string(t[2].text) + "'", line,
                 t[2].column);
        }
        if (t.size() >= 4 && t[3].text != "-") {
            if (n.kind == NodeKind::FixedHead) {
                fail(Kind::InvalidValue, "fixed-head node cannot carry a demand", line, t[3].column,
                     n.id);
            }
            n.demand_ref = std::string(t[3].text);
        }
        if (t.size() == 5 && t[4].text != "-") {
            if (n.kind == NodeKind::FixedHead) {
                fail(Kind::InvalidValue, "outlet must be a junction", line, t[4].column, n.id);
            }
            n.is_outlet = true;
            n.outlet_class = std::string(t[4].text);
        }
        if (!node_lines_.emplace(n.id, line).second) {
            fail(Kind::DuplicateId, "duplicate node id '" + n.id + "'", line, t[0].column, n.id);
        }
        nodes_.push_back(std::move(n));
    }

    void pipe_line(const std::vector<Token>& t, std::size_t line)
    {
        if (t.size() != 7) {
            fail(Kind::Syntax,
                 "pipe line needs 7 fields: id from to length diameter_mm material roughness_mm",
                 line, t.front().column);
        }
        PendingPipe p{std::string(t[0].text), t[1], t[2], 0.0, 0.0, std::string(t[5].text), 0.0,
                      line};
        p.length = number(t[3], line, "length");
        p.diameter_mm = number(t[4], line, "diameter");
        p.roughness = number(t[6], line, "roughness");
        if (p.length <= 0.0) {
            fail(Kind::InvalidValue, "pipe length must be positive", line, t[3].column, p.id);
        }
        if (p.diameter_mm <= 0.0) {
            fail(Kind::InvalidValue, "pipe diameter must be positive", line, t[4].column, p.id);
        }
        if (p.roughness < 0.0) {
            fail(Kind::InvalidValue, "pipe roughness must be non-negative", line, t[6].column, p.id);
        }
        if (!pipe_ids_.insert(p.id).second) {
            fail(Kind::DuplicateId, "duplicate pipe id '" + p.id + "'", line, t[0].column, p.id);
        }
        pipes_.push_back(std::move(p));
    }

    void source_line(const std::vector<Token>& t, std::size_t line)
    {
        if (t.size() < 2 || t.size() > 3) {
            fail(Kind::Syntax, "source line needs 2 or 3 fields: id head [reservoir|pump]", line,
                 t.front().column);
        }
        Source s;
        s.head = number(t[1], line, "head");
        if (t.size() == 3) {
            const std::string role = to_lower(t[2].text);
            if (role == "pump") {
                s.role = SourceRole::Pump;
            } else if (role == "reservoir") {
                s.role = SourceRole::Reservoir;
            } else {
                fail(Kind::Syntax, "unknown source role '" + std::string(t[2].text) + "'", line,
                     t[2].column);
            }
        }
        const std::string id(t[0].text);
        if (!sources_.emplace(id, s).second) {
            fail(Kind::DuplicateId, "duplicate source '" + id + "'", line, t[0].column, id);
        }
        source_refs_.push_back({t[0], line, {}});
    }

    void outlet_line(const std::vector<Token>& t, std::size_t line)
    {
        if (t.size() != 2 && t.size() != 5 && t.size() != 6) {
            fail(Kind::Syntax, "outlet line needs: id class [a0 a1 a2 [q_max]]", line,
                 t.front().column);
        }
        const std::string id(t[0].text);
        if (!outlet_ids_.insert(id).second) {
            fail(Kind::DuplicateId, "duplicate outlet '" + id + "'", line, t[0].column, id);
        }
        outlet_refs_.push_back({t[0], line, std::string(t[1].text)});
        if (t.size() >= 5) {
            OutletCoefficients c;
            c.a0 = number(t[2], line, "a0");
            c.a1 = number(t[3], line, "a1");
            c.a2 = number(t[4], line, "a2");
            if (t.size() == 6) {
                c.q_max_lps = number(t[5], line, "q_max");
            }
            coefficients_.emplace(id, c);
        }
    }

    std::size_t resolve(const Token& tok, std::size_t line)
    {
        const std::string id(tok.text);
        const auto it = index_.find(id);
        if (it == index_.end()) {
            fail(Kind::DanglingReference, "reference to missing node '" + id + "'", line, tok.column,
                 id);
        }
        return it->second;
    }

    Network finish()
    {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            index_.emplace(nodes_[i].id, i);
        }
        for (const auto& ref : source_refs_) {
            const std::size_t n = resolve(ref.token, ref.line);
            if (nodes_[n].kind != NodeKind::FixedHead) {
                fail(Kind::InvalidValue, "source '" + nodes_[n].id + "' is not a fixed-head node",
                     ref.line, ref.token.column, nodes_[n].id);
            }
        }
        for (const auto& ref : outlet_refs_) {
            const std::size_t n = resolve(ref.token, ref.line);
            if (nodes_[n].kind != NodeKind::Junction) {
                fail(Kind::InvalidValue, "outlet '" + nodes_[n].id + "' must be a junction",
                     ref.line, ref.token.column, nodes_[n].id);
            }
            nodes_[n].is_outlet = true;
            nodes_[n].outlet_class = ref.cls;
        }

        std::vector<Pipe> pipes;
        pipes.reserve(pipes_.size());
        for (const PendingPipe& pp : pipes_) {
            Pipe p;
            p.id = pp.id;
            p.from = resolve(pp.from, pp.line);
            p.to = resolve(pp.to, pp.line);
            if (p.from == p.to) {
                fail(Kind::InvalidValue, "pipe '" + p.id + "' connects a node to itself", pp.line,
                     pp.from.column, p.id);
            }
            p.length = pp.length;
            p.diameter = units::mm_to_m(pp.diameter_mm);
            p.material = Material(pp.material);
            p.roughness_mm = pp.roughness;
            pipes.push_back(std::move(p));
        }
        return Network(std::move(nodes_), std::move(pipes), std::move(sources_),
                       std::move(coefficients_));
    }

    struct Ref {
        Token token;
        std::size_t line;
        std::string cls;
    };

    std::string_view text_;
    std::vector<ParseWarning>* warnings_;
    Section section_ = Section::None;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, std::size_t> node_lines_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<PendingPipe> pipes_;
    std::unordered_set<std::string> pipe_ids_;
    std::unordered_map<std::string, Source> sources_;
    std::vector<Ref> source_refs_;
    std::unordered_set<std::string> outlet_ids_;
    std::vector<Ref> outlet_refs_;
    std::unordered_map<std::string, OutletCoefficients> coefficients_;
};

// Millimetre token whose parsed value divided by 1000 reproduces `metres`.
std::string diameter_token(double metres)
{
    double mm = units::m_to_mm(metres);
    for (int i = 0; i < 8 && units::mm_to_m(mm) != metres; ++i) {
        mm = std::nextafter(mm, units::mm_to_m(mm) < metres ? HUGE_VAL : -HUGE_VAL);
    }
    return format_exact(mm);
}

}  // namespace

Network parse_network(std::string_view text, std::vector<ParseWarning>* warnings)
{
    return Parser(text, warnings).run();
}

std::string serialize_network(const Network& net)
{
    std::ostringstream out;
    out << "[NODES]\n";
    for (const Node& n : net.nodes()) {
        out << n.id << ' ' << format_exact(n.elevation) << ' '
            << (n.kind == NodeKind::Junction ? "junction" : "fixed") << ' '
            << (n.demand_ref ? *n.demand_ref : "-") << ' '
            << (n.is_outlet ? n.outlet_class.value_or("DN150") : "-") << '\n';
    }
    out << "\n[PIPES]\n";
    for (const Pipe& p : net.pipes()) {
        out << p.id << ' ' << net.nodes()[p.from].id << ' ' << net.nodes()[p.to].id << ' '
            << format_exact(p.length) << ' ' << diameter_token(p.diameter) << ' '
            << p.material.name() << ' ' << format_exact(p.roughness_mm) << '\n';
    }
    out << "\n[SOURCES]\n";
    for (std::size_t c = 0; c < net.fixed_count(); ++c) {
        const Source& s = net.source(c);
        out << net.nodes()[net.fixed_nodes()[c]].id << ' ' << format_exact(s.head) << ' '
            << (s.role == SourceRole::Pump ? "pump" : "reservoir") << '\n';
    }
    out << "\n[OUTLETS]\n";
    for (const Node& n : net.nodes()) {
        const auto it = net.outlet_coefficients().find(n.id);
        if (it == net.outlet_coefficients().end()) {
            continue;
        }
        const OutletCoefficients& c = it->second;
        out << n.id << ' ' << n.outlet_class.value_or("DN150") << ' ' << format_exact(c.a0) << ' '
            << format_exact(c.a1) << ' ' << format_exact(c.a2);
        if (c.q_max_lps) {
            out << ' ' << format_exact(*c.q_max_lps);
        }
        out << '\n';
    }
    return out.str();
}

Network load_network(const std::string& path, std::vector<ParseWarning>* warnings)
{
    return parse_network(read_text_file(path), warnings);
}

}  // namespace pipenet
