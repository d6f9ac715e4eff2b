#include "dfm2d/io.hpp"

#include <fstream>
#include <sstream>

#include "dfm2d/errors.hpp"

namespace dfm {

void write_vtk(const Grid& g, const std::string& path,
               const std::map<std::string, Eigen::VectorXd>& cell_fields)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot open output file: " + path);
    out.precision(15);
    out << "# vtk DataFile Version 3.0\n";
    out << (g.name.empty() ? "dfm2d grid" : g.name) << " dim " << g.dim << "\n";
    out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << g.num_nodes() << " double\n";
    for (int n = 0; n < g.num_nodes(); ++n)
        out << g.nodes(0, n) << " " << g.nodes(1, n) << " 0\n";

    const int nc = g.num_cells();
    if (g.dim == 2) {
        out << "CELLS " << nc << " " << 4 * nc << "\n";
        for (int c = 0; c < nc; ++c) {
            std::vector<int> corners;
            for (int f : g.cell_face_list(c))
                for (int n : g.face_nodes[f])
                    if (std::find(corners.begin(), corners.end(), n) == corners.end())
                        corners.push_back(n);
            out << "3 " << corners[0] << " " << corners[1] << " " << corners[2] << "\n";
        }
        out << "CELL_TYPES " << nc << "\n";
        for (int c = 0; c < nc; ++c) out << "5\n";
    } else if (g.dim == 1) {
        out << "CELLS " << nc << " " << 3 * nc << "\n";
        for (int c = 0; c < nc; ++c) {
            const auto faces = g.cell_face_list(c);
            out << "2 " << g.face_nodes[faces[0]][0] << " " << g.face_nodes[faces[1]][0] << "\n";
        }
        out << "CELL_TYPES " << nc << "\n";
        for (int c = 0; c < nc; ++c) out << "3\n";
    } else {
        out << "CELLS 1 2\n1 0\n";
        out << "CELL_TYPES 1\n1\n";
    }

    if (!cell_fields.empty()) {
        out << "CELL_DATA " << nc << "\n";
        for (const auto& [name, vals] : cell_fields) {
            if (vals.size() == nc) {
                out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
                for (int c = 0; c < nc; ++c) out << vals(c) << "\n";
            } else if (vals.size() == 2 * nc) {
                out << "VECTORS " << name << " double\n";
                for (int c = 0; c < nc; ++c)
                    out << vals(2 * c) << " " << vals(2 * c + 1) << " 0\n";
            } else {
                throw Error("field " + name + ": size does not match cell count");
            }
        }
    }
}

namespace {

struct MshLine {
    std::string text;
    int number;
};

class MshReader {
public:
    explicit MshReader(const std::string& text)
    {
        std::istringstream in(text);
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            lines_.push_back({line, ++n});
        }
    }
    bool done() const { return pos_ >= lines_.size(); }
    const MshLine& next()
    {
        if (done()) throw MeshError("msh: unexpected end of file");
        return lines_[pos_++];
    }
    [[noreturn]] void fail(const MshLine& l, const std::string& what) const
    {
        throw MeshError("msh line " + std::to_string(l.number) + ": " + what);
    }

private:
    std::vector<MshLine> lines_;
    std::size_t pos_ = 0;
};

}  // namespace

Grid import_msh(const std::string& text)
{
    MshReader rd(text);

    Eigen::Matrix2Xd nodes;
    std::vector<int> node_id_map;  // msh id -> our index (msh ids are 1-based, may be sparse)
    std::vector<std::array<int, 3>> tris;
    std::vector<std::array<int, 3>> tri_tags;
    struct TaggedLine {
        int n0, n1, frac;
    };
    std::vector<TaggedLine> frac_lines;

    bool saw_nodes = false, saw_elements = false;
    while (!rd.done()) {
        const MshLine section = rd.next();
        if (section.text.empty()) continue;
        if (section.text == "$MeshFormat") {
            const MshLine l = rd.next();
            std::istringstream ss(l.text);
            double version = 0;
            ss >> version;
            if (!(version >= 2.0 && version < 3.0))
                rd.fail(l, "unsupported MSH version (need 2.x ASCII)");
            const MshLine end = rd.next();
            if (end.text != "$EndMeshFormat") rd.fail(end, "expected $EndMeshFormat");
        } else if (section.text == "$Nodes") {
            saw_nodes = true;
            const MshLine l = rd.next();
            int nn = -1;
            std::istringstream ss(l.text);
            if (!(ss >> nn) || nn < 0) rd.fail(l, "bad node count");
            nodes.resize(2, nn);
            for (int i = 0; i < nn; ++i) {
                const MshLine nl = rd.next();
                std::istringstream ns(nl.text);
                int id;
                double x, y, z;
                if (!(ns >> id >> x >> y >> z)) rd.fail(nl, "bad node line");
                if (id >= static_cast<int>(node_id_map.size())) node_id_map.resize(id + 1, -1);
                node_id_map[id] = i;
                nodes.col(i) = Vec2(x, y);
            }
            const MshLine end = rd.next();
            if (end.text != "$EndNodes") rd.fail(end, "expected $EndNodes");
        } else if (section.text == "$Elements") {
            saw_elements = true;
            const MshLine l = rd.next();
            int ne = -1;
            std::istringstream ss(l.text);
            if (!(ss >> ne) || ne < 0) rd.fail(l, "bad element count");
            auto map_node = [&](const MshLine& el, int id) {
                if (id < 0 || id >= static_cast<int>(node_id_map.size()) || node_id_map[id] < 0)
                    rd.fail(el, "element references unknown node " + std::to_string(id));
                return node_id_map[id];
            };
            for (int i = 0; i < ne; ++i) {
                const MshLine el = rd.next();
                std::istringstream es(el.text);
                int id, type, ntags;
                if (!(es >> id >> type >> ntags)) rd.fail(el, "bad element line");
                std::vector<int> tags(ntags);
                for (int t = 0; t < ntags; ++t)
                    if (!(es >> tags[t])) rd.fail(el, "bad element tags");
                if (type == 2) {
                    int a, b, c;
                    if (!(es >> a >> b >> c)) rd.fail(el, "bad triangle");
                    tris.push_back({map_node(el, a), map_node(el, b), map_node(el, c)});
                    tri_tags.push_back({-1, -1, -1});
                } else if (type == 1) {
                    int a, b;
                    if (!(es >> a >> b)) rd.fail(el, "bad line element");
                    const int phys = ntags > 0 ? tags[0] : 0;
                    if (phys > 0)
                        frac_lines.push_back({map_node(el, a), map_node(el, b), phys - 1});
                } else if (type == 15) {
                    // point element, ignored
                } else {
                    rd.fail(el, "unsupported element type " + std::to_string(type));
                }
            }
            const MshLine end = rd.next();
            if (end.text != "$EndElements") rd.fail(end, "expected $EndElements");
        } else if (section.text.rfind("$", 0) == 0) {
            // Skip unknown sections.
            const std::string terminator = "$End" + section.text.substr(1);
            while (true) {
                const MshLine l = rd.next();
                if (l.text == terminator) break;
            }
        }
    }
    if (!saw_nodes || !saw_elements) throw MeshError("msh: missing $Nodes or $Elements section");

    // Attach fracture tags to the triangle edges they coincide with.
    std::map<std::pair<int, int>, int> edge_frac;
    for (const auto& fl : frac_lines) edge_frac[std::minmax(fl.n0, fl.n1)] = fl.frac;
    for (std::size_t t = 0; t < tris.size(); ++t) {
        for (int k = 0; k < 3; ++k) {
            const auto key = std::minmax(tris[t][k], tris[t][(k + 1) % 3]);
            auto it = edge_frac.find(key);
            if (it != edge_frac.end()) tri_tags[t][k] = it->second;
        }
    }
    Grid g = make_triangle_grid(nodes, tris, tri_tags);
    g.name = "imported";
    return g;
}

Grid import_msh_file(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw MeshError("cannot open msh file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return import_msh(ss.str());
}

std::string export_msh(const Grid& g)
{
    if (g.dim != 2) throw Error("export_msh: only 2d grids");
    std::ostringstream out;
    out.precision(16);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$Nodes\n" << g.num_nodes() << "\n";
    for (int n = 0; n < g.num_nodes(); ++n)
        out << n + 1 << " " << g.nodes(0, n) << " " << g.nodes(1, n) << " 0\n";
    out << "$EndNodes\n";

    std::vector<int> tagged;
    for (int f = 0; f < g.num_faces(); ++f)
        if (g.face_fracture[f] >= 0) tagged.push_back(f);

    out << "$Elements\n" << tagged.size() + g.num_cells() << "\n";
    int id = 1;
    for (int f : tagged) {
        out << id++ << " 1 2 " << g.face_fracture[f] + 1 << " " << g.face_fracture[f] + 1 << " "
            << g.face_nodes[f][0] + 1 << " " << g.face_nodes[f][1] + 1 << "\n";
    }
    for (int c = 0; c < g.num_cells(); ++c) {
        std::vector<int> corners;
        for (int f : g.cell_face_list(c))
            for (int n : g.face_nodes[f])
                if (std::find(corners.begin(), corners.end(), n) == corners.end())
                    corners.push_back(n);
        out << id++ << " 2 2 1 1 " << corners[0] + 1 << " " << corners[1] + 1 << " "
            << corners[2] + 1 << "\n";
    }
    out << "$EndElements\n";
    return out.str();
}

}  // namespace dfm
