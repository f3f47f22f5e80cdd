#pragma once

#include <filesystem>

#include "bodyfit/mesh.hpp"

namespace bodyfit {

// OBJ: v/f/vn records with 1-based (or negative relative) indices; polygons
// are fan-triangulated. PLY: ascii and binary_little_endian with a "vertex"
// element (x, y, z) and a "face" element (vertex_indices list).
TriMesh load_mesh(const std::filesystem::path& path);
TriMesh load_obj(const std::filesystem::path& path);
TriMesh load_ply(const std::filesystem::path& path);

// Positions are written with 17 significant digits so a reload is bit-exact.
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);
void save_ply(const TriMesh& mesh, const std::filesystem::path& path, bool binary = true);
void save_mesh(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace bodyfit
