#include "gvr/scene_io.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>
#include <sstream>

namespace gvr {

namespace {

using nlohmann::json;

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

void check_version(const json& j, const std::filesystem::path& path) {
    if (j.contains("version") && j.at("version").get<int>() != 1) {
        throw ValidationError("unsupported format version in " + path.string());
    }
}

}  // namespace

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ValidationError("cannot write file: " + tmp.string());
        }
        out << content;
        if (!out) {
            throw ValidationError("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

GaussianScene load_scene_json(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    check_version(j, path);
    GaussianScene scene;
    scene.tau = j.value("tau", 1.0);
    for (const auto& jk : j.at("kernels")) {
        GaussianKernel k;
        const auto center = jk.at("center").get<std::vector<double>>();
        const auto inv_cov = jk.at("inv_cov").get<std::vector<double>>();
        const auto attr = jk.at("attr").get<std::vector<double>>();
        if (center.size() != 3 || inv_cov.size() != 9) {
            throw ValidationError("bad kernel entry in " + path.string());
        }
        k.center = Vec3(center[0], center[1], center[2]);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) k.inv_cov(r, c) = inv_cov[r * 3 + c];
        k.attr = Eigen::Map<const VecX>(attr.data(), static_cast<Eigen::Index>(attr.size()));
        scene.kernels.push_back(std::move(k));
    }
    scene.validate();
    return scene;
}

void save_scene_json(const GaussianScene& scene, const std::filesystem::path& path) {
    json j;
    j["version"] = 1;
    j["tau"] = scene.tau;
    j["kernels"] = json::array();
    for (const auto& k : scene.kernels) {
        json jk;
        jk["center"] = {k.center.x(), k.center.y(), k.center.z()};
        std::vector<double> inv_cov(9);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) inv_cov[r * 3 + c] = k.inv_cov(r, c);
        jk["inv_cov"] = inv_cov;
        jk["attr"] = std::vector<double>(k.attr.data(), k.attr.data() + k.attr.size());
        j["kernels"].push_back(std::move(jk));
    }
    atomic_write_text(path, j.dump(2) + "\n");
}

Camera load_camera_json(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    check_version(j, path);
    Camera cam;
    const auto r = j.at("R").get<std::vector<double>>();
    const auto t = j.at("T").get<std::vector<double>>();
    if (r.size() != 9 || t.size() != 3) {
        throw ValidationError("bad camera extrinsics in " + path.string());
    }
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) cam.rotation(i, c) = r[i * 3 + c];
    cam.translation = Vec3(t[0], t[1], t[2]);
    cam.focal = j.at("F").get<double>();
    cam.ox = j.at("Ox").get<double>();
    cam.oy = j.at("Oy").get<double>();
    cam.height = j.at("H").get<int>();
    cam.width = j.at("W").get<int>();
    cam.validate();
    return cam;
}

void save_camera_json(const Camera& camera, const std::filesystem::path& path) {
    json j;
    j["version"] = 1;
    std::vector<double> r(9);
    for (int i = 0; i < 3; ++i)
        for (int c = 0; c < 3; ++c) r[i * 3 + c] = camera.rotation(i, c);
    j["R"] = r;
    j["T"] = {camera.translation.x(), camera.translation.y(), camera.translation.z()};
    j["F"] = camera.focal;
    j["Ox"] = camera.ox;
    j["Oy"] = camera.oy;
    j["H"] = camera.height;
    j["W"] = camera.width;
    atomic_write_text(path, j.dump(2) + "\n");
}

SampledAttributes load_attrs_json(const std::filesystem::path& path) {
    const json j = load_json_file(path);
    check_version(j, path);
    SampledAttributes out;
    for (const auto& ja : j.at("attrs")) {
        const auto vals = ja.get<std::vector<double>>();
        out.attrs.push_back(Eigen::Map<const VecX>(vals.data(), static_cast<Eigen::Index>(vals.size())));
    }
    out.support = j.at("support").get<std::vector<double>>();
    for (const auto& jm : j.at("masked")) out.masked.push_back(jm.get<bool>());
    if (out.support.size() != out.attrs.size() || out.masked.size() != out.attrs.size()) {
        throw ValidationError("inconsistent attrs file: " + path.string());
    }
    return out;
}

void save_attrs_json(const SampledAttributes& attrs, const std::filesystem::path& path) {
    json j;
    j["version"] = 1;
    j["attrs"] = json::array();
    for (const auto& a : attrs.attrs) {
        j["attrs"].push_back(std::vector<double>(a.data(), a.data() + a.size()));
    }
    j["support"] = attrs.support;
    j["masked"] = json::array();
    for (bool m : attrs.masked) j["masked"].push_back(m);
    atomic_write_text(path, j.dump(2) + "\n");
}

TriangleMesh load_obj(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    TriangleMesh mesh;
    bool any_color = false;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            double x, y, z;
            if (!(ss >> x >> y >> z)) {
                throw ValidationError("bad vertex line in " + path.string());
            }
            mesh.vertices.emplace_back(x, y, z);
            double r, g, b;
            if (ss >> r >> g >> b) {
                mesh.colors.resize(mesh.vertices.size(), VecX::Zero(3));
                mesh.colors.back() = (VecX(3) << r, g, b).finished();
                any_color = true;
            } else if (any_color) {
                mesh.colors.resize(mesh.vertices.size(), VecX::Zero(3));
            }
        } else if (tag == "f") {
            std::vector<int> poly;
            std::string token;
            while (ss >> token) {
                // "i", "i/t", "i/t/n", "i//n"; obj indices are 1-based.
                const int idx = std::stoi(token.substr(0, token.find('/')));
                poly.push_back(idx > 0 ? idx - 1 : static_cast<int>(mesh.vertices.size()) + idx);
            }
            if (poly.size() < 3) {
                throw ValidationError("face with fewer than 3 vertices in " + path.string());
            }
            for (size_t v = 1; v + 1 < poly.size(); ++v) {
                mesh.faces.push_back({poly[0], poly[v], poly[v + 1]});
            }
        }
    }
    mesh.validate();
    return mesh;
}

namespace {

struct PlyProperty {
    std::string name;
    std::string type;
    int size = 0;
};

int ply_type_size(const std::string& type) {
    if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
    if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
    if (type == "int" || type == "uint" || type == "int32" || type == "uint32" || type == "float" ||
        type == "float32") {
        return 4;
    }
    if (type == "double" || type == "float64") return 8;
    throw ValidationError("unsupported PLY property type: " + type);
}

double ply_read_binary(const char* bytes, const std::string& type) {
    auto as = [&]<typename T>() {
        T v;
        std::memcpy(&v, bytes, sizeof(T));
        return static_cast<double>(v);
    };
    if (type == "char" || type == "int8") return as.operator()<int8_t>();
    if (type == "uchar" || type == "uint8") return as.operator()<uint8_t>();
    if (type == "short" || type == "int16") return as.operator()<int16_t>();
    if (type == "ushort" || type == "uint16") return as.operator()<uint16_t>();
    if (type == "int" || type == "int32") return as.operator()<int32_t>();
    if (type == "uint" || type == "uint32") return as.operator()<uint32_t>();
    if (type == "float" || type == "float32") return as.operator()<float>();
    return as.operator()<double>();
}

}  // namespace

PointCloud load_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open file: " + path.string());
    }
    std::string line;
    std::getline(in, line);
    if (line.rfind("ply", 0) != 0) {
        throw ValidationError("not a PLY file: " + path.string());
    }

    bool binary = false;
    long vertex_count = -1;
    std::vector<PlyProperty> props;
    bool in_vertex_element = false;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "format") {
            std::string fmt;
            ss >> fmt;
            if (fmt == "ascii") {
                binary = false;
            } else if (fmt == "binary_little_endian") {
                binary = true;
            } else {
                throw ValidationError("unsupported PLY format: " + fmt);
            }
        } else if (tag == "element") {
            std::string name;
            long count;
            ss >> name >> count;
            in_vertex_element = (name == "vertex");
            if (in_vertex_element) vertex_count = count;
        } else if (tag == "property" && in_vertex_element) {
            PlyProperty p;
            ss >> p.type;
            if (p.type == "list") {
                throw ValidationError("list properties are not supported on vertices");
            }
            ss >> p.name;
            p.size = ply_type_size(p.type);
            props.push_back(p);
        } else if (tag == "end_header") {
            break;
        }
    }
    if (vertex_count < 0) {
        throw ValidationError("PLY file has no vertex element: " + path.string());
    }

    int ix = -1, iy = -1, iz = -1, ir = -1, ig = -1, ib = -1;
    for (size_t p = 0; p < props.size(); ++p) {
        if (props[p].name == "x") ix = static_cast<int>(p);
        if (props[p].name == "y") iy = static_cast<int>(p);
        if (props[p].name == "z") iz = static_cast<int>(p);
        if (props[p].name == "red" || props[p].name == "r") ir = static_cast<int>(p);
        if (props[p].name == "green" || props[p].name == "g") ig = static_cast<int>(p);
        if (props[p].name == "blue" || props[p].name == "b") ib = static_cast<int>(p);
    }
    if (ix < 0 || iy < 0 || iz < 0) {
        throw ValidationError("PLY vertex element lacks x/y/z: " + path.string());
    }
    const bool has_color = ir >= 0 && ig >= 0 && ib >= 0;

    PointCloud cloud;
    cloud.points.reserve(vertex_count);
    std::vector<double> row(props.size());
    if (binary) {
        size_t stride = 0;
        for (const auto& p : props) stride += p.size;
        std::vector<char> buf(stride);
        for (long v = 0; v < vertex_count; ++v) {
            if (!in.read(buf.data(), static_cast<std::streamsize>(stride))) {
                throw ValidationError("truncated PLY data: " + path.string());
            }
            size_t off = 0;
            for (size_t p = 0; p < props.size(); ++p) {
                row[p] = ply_read_binary(buf.data() + off, props[p].type);
                off += props[p].size;
            }
            cloud.points.emplace_back(row[ix], row[iy], row[iz]);
            if (has_color) {
                const double scale = props[ir].size == 1 ? 1.0 / 255.0 : 1.0;
                cloud.colors.push_back(
                    (VecX(3) << row[ir] * scale, row[ig] * scale, row[ib] * scale).finished());
            }
        }
    } else {
        for (long v = 0; v < vertex_count; ++v) {
            for (size_t p = 0; p < props.size(); ++p) {
                if (!(in >> row[p])) {
                    throw ValidationError("truncated PLY data: " + path.string());
                }
            }
            cloud.points.emplace_back(row[ix], row[iy], row[iz]);
            if (has_color) {
                const double scale = props[ir].size == 1 ? 1.0 / 255.0 : 1.0;
                cloud.colors.push_back(
                    (VecX(3) << row[ir] * scale, row[ig] * scale, row[ib] * scale).finished());
            }
        }
    }
    return cloud;
}

}  // namespace gvr
