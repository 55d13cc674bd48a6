#pragma once

// Pipe network topology, the sectioned network file format and the
// pipe/node incidence matrices.
//
// File grammar (whitespace delimited, '#' starts a comment):
//
//   [NODES]    id elevation_m kind [demand_col|-] [outlet_class|-]
//   [PIPES]    id from to length_m diameter_mm material roughness_mm
//   [SOURCES]  id head_m [reservoir|pump]
//   [OUTLETS]  id class [a0 a1 a2 [q_max_lps]]
//
// kind is one of junction, fixed. Flow is positive from `from` to `to`.

#include <Eigen/SparseCore>

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pipenet {

enum class NodeKind { Junction, FixedHead };

struct Node {
    std::string id;
    double elevation = 0.0;  // m
    NodeKind kind = NodeKind::Junction;
    std::optional<std::string> demand_ref;  // column key in a demand table
    bool is_outlet = false;
    std::optional<std::string> outlet_class;  // e.g. "DN150"

    bool operator==(const Node&) const = default;
};

enum class MaterialKind { MSCL, DICL, GRP, mPVC, Other };

class Material {
public:
    Material() = default;
    explicit Material(std::string_view name);

    MaterialKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    bool operator==(const Material&) const = default;

private:
    MaterialKind kind_ = MaterialKind::Other;
    std::string name_;
};

struct Pipe {
    std::string id;
    std::size_t from = 0;  // node index
    std::size_t to = 0;    // node index
    double length = 0.0;        // m
    double diameter = 0.0;      // m
    Material material;
    double roughness_mm = 0.0;  // mm

    double area() const;

    bool operator==(const Pipe&) const = default;
};

enum class SourceRole { Reservoir, Pump };

// Default boundary condition of a fixed-head node.
struct Source {
    double head = 0.0;  // HGL, m
    SourceRole role = SourceRole::Reservoir;

    bool operator==(const Source&) const = default;
};

// Optional per-outlet head loss coefficients from the [OUTLETS] section.
struct OutletCoefficients {
    double a0 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    std::optional<double> q_max_lps;

    bool operator==(const OutletCoefficients&) const = default;
};

class NetworkError : public std::runtime_error {
public:
    enum class Kind { Syntax, InvalidValue, DanglingReference, DuplicateId, Disconnected };

    NetworkError(Kind kind, std::string message, std::size_t line = 0, std::size_t column = 0,
                 std::string subject = {});

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }
    // The offending id for reference/duplicate/connectivity errors.
    const std::string& subject() const { return subject_; }

private:
    Kind kind_;
    std::size_t line_;
    std::size_t column_;
    std::string subject_;
};

// Signed incidence matrices. Row i has +1 in the column of pipe i's
// `to` node and -1 in the column of its `from` node; the columns are split
// between junctions (a1) and fixed-head nodes (a2).
struct Incidence {
    Eigen::SparseMatrix<double> a1;  // P x N_junction
    Eigen::SparseMatrix<double> a2;  // P x N_fixed
};

Incidence build_incidence(const std::vector<Node>& nodes, const std::vector<Pipe>& pipes);

// Immutable after construction. Validates every invariant in the
// constructor; throws NetworkError on violation.
class Network {
public:
    Network(std::vector<Node> nodes, std::vector<Pipe> pipes,
            std::unordered_map<std::string, Source> sources = {},
            std::unordered_map<std::string, OutletCoefficients> outlet_coefficients = {});

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<Pipe>& pipes() const { return pipes_; }
    const Incidence& incidence() const { return incidence_; }

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t pipe_count() const { return pipes_.size(); }
    std::size_t junction_count() const { return junctions_.size(); }
    std::size_t fixed_count() const { return fixed_.size(); }

    // Node indices in junction / fixed-head column order.
    const std::vector<std::size_t>& junctions() const { return junctions_; }
    const std::vector<std::size_t>& fixed_nodes() const { return fixed_; }

    // Column of a node within a1 (junction) or a2 (fixed); npos if the node
    // is of the other kind.
    std::size_t junction_column(std::size_t node) const { return column_[node].junction; }
    std::size_t fixed_column(std::size_t node) const { return column_[node].fixed; }

    std::optional<std::size_t> find_node(std::string_view id) const;
    std::optional<std::size_t> find_pipe(std::string_view id) const;
    std::size_t node_index(std::string_view id) const;  // throws DanglingReference

    // Boundary settings per fixed-head node, in fixed column order.
    const Source& source(std::size_t fixed_col) const { return sources_[fixed_col]; }
    std::vector<double> default_boundary_heads() const;
    // Fixed columns of pump-station nodes.
    std::vector<std::size_t> pump_columns() const;

    const std::unordered_map<std::string, OutletCoefficients>& outlet_coefficients() const
    {
        return outlet_coefficients_;
    }

    // Distinct materials in order of first appearance.
    std::vector<std::string> materials() const;

    bool operator==(const Network& other) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct Columns {
        std::size_t junction = npos;
        std::size_t fixed = npos;
    };

    std::vector<Node> nodes_;
    std::vector<Pipe> pipes_;
    std::vector<std::size_t> junctions_;
    std::vector<std::size_t> fixed_;
    std::vector<Columns> column_;
    std::vector<Source> sources_;
    std::unordered_map<std::string, OutletCoefficients> outlet_coefficients_;
    std::unordered_map<std::string, std::size_t> node_lookup_;
    std::unordered_map<std::string, std::size_t> pipe_lookup_;
    Incidence incidence_;
};

struct ParseWarning {
    std::size_t line = 0;
    std::string message;
};

Network parse_network(std::string_view text, std::vector<ParseWarning>* warnings = nullptr);

// Canonical text form; parse_network(serialize_network(n)) == n.
std::string serialize_network(const Network& net);

Network load_network(const std::string& path, std::vector<ParseWarning>* warnings = nullptr);

}  // namespace pipenet
