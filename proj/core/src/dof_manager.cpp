#include "dfm2d/dof_manager.hpp"

#include "dfm2d/errors.hpp"

namespace dfm {

int DofManager::entity_cells(Entity e) const
{
    if (e.kind == Entity::Node) return graph_->nodes.at(e.id).grid.num_cells();
    return graph_->edges.at(e.id).mortar.num_cells();
}

void DofManager::add_variable(Entity e, const std::string& var, int dofs_per_cell)
{
    if (finalized_) throw Error("dof manager already finalized");
    if (lookup_.count({e, var}))
        throw Error("variable '" + var + "' registered twice on the same entity");
    if (dofs_per_cell <= 0) throw Error("dofs_per_cell must be positive");
    Block b;
    b.entity = e;
    b.var = var;
    b.dofs_per_cell = dofs_per_cell;
    b.size = dofs_per_cell * entity_cells(e);
    b.offset = -1;
    blocks_.push_back(b);
    lookup_[{e, var}] = static_cast<int>(blocks_.size()) - 1;
}

void DofManager::finalize()
{
    total_ = 0;
    for (auto& b : blocks_) {
        b.offset = total_;
        total_ += b.size;
    }
    finalized_ = true;
}

int DofManager::offset(Entity e, const std::string& var) const
{
    auto it = lookup_.find({e, var});
    if (it == lookup_.end() || !finalized_)
        throw Error("unknown dof block '" + var + "'");
    return blocks_[it->second].offset;
}

int DofManager::block_size(Entity e, const std::string& var) const
{
    auto it = lookup_.find({e, var});
    if (it == lookup_.end()) throw Error("unknown dof block '" + var + "'");
    return blocks_[it->second].size;
}

bool DofManager::has(Entity e, const std::string& var) const
{
    return lookup_.count({e, var}) > 0;
}

int DofManager::index(Entity e, const std::string& var, int cell, int comp) const
{
    auto it = lookup_.find({e, var});
    if (it == lookup_.end() || !finalized_)
        throw Error("unknown dof block '" + var + "'");
    const Block& b = blocks_[it->second];
    if (cell < 0 || cell * b.dofs_per_cell + comp >= b.size)
        throw Error("dof index out of range for '" + var + "'");
    return b.offset + cell * b.dofs_per_cell + comp;
}

}  // namespace dfm
