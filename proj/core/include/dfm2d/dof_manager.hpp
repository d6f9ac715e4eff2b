#pragma once

#include <map>
#include <string>
#include <vector>

#include "dfm2d/mdgraph.hpp"

namespace dfm {

/// Identifies a graph entity: a subdomain node or an interface edge.
struct Entity {
    enum Kind { Node, Edge } kind;
    int id;
    auto operator<=>(const Entity&) const = default;
};

inline Entity on_node(int id) { return {Entity::Node, id}; }
inline Entity on_edge(int id) { return {Entity::Edge, id}; }

/// Global degree-of-freedom manager realizing the double block structure:
/// the outer blocks run over graph entities in registration order, the inner
/// blocks over the variables registered on each entity.
class DofManager {
public:
    explicit DofManager(const MixedDimGraph& g) : graph_(&g) {}

    /// Register `dofs_per_cell` unknowns per cell (grid cells for nodes,
    /// mortar cells for edges) under `var` on the entity.
    void add_variable(Entity e, const std::string& var, int dofs_per_cell);

    void finalize();
    bool finalized() const { return finalized_; }

    int size() const { return total_; }
    /// Global offset of (entity, var); the range spans cells * dofs_per_cell.
    int offset(Entity e, const std::string& var) const;
    int block_size(Entity e, const std::string& var) const;
    bool has(Entity e, const std::string& var) const;

    /// Global index of a specific dof.
    int index(Entity e, const std::string& var, int cell, int comp = 0) const;

    struct Block {
        Entity entity;
        std::string var;
        int offset;
        int size;
        int dofs_per_cell;
    };
    const std::vector<Block>& blocks() const { return blocks_; }

    int entity_cells(Entity e) const;

private:
    const MixedDimGraph* graph_;
    std::vector<Block> blocks_;
    std::map<std::pair<Entity, std::string>, int> lookup_;
    int total_ = 0;
    bool finalized_ = false;
};

}  // namespace dfm
