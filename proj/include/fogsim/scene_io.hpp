#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json_fields.hpp"
#include "scene.hpp"

namespace fogsim {

namespace detail {

inline void parse_camera(FieldReader r, Scene &scene) {
    CameraPose cam;
    cam.position = r.vec3("position");
    cam.look_at = r.vec3("look_at");
    cam.up = r.vec3("up", Vec3{0, 1, 0});
    if (length(cam.up) <= 0.0) throw ValidationError(r.field("up"), "must be non-zero");
    cam.up = normalize(cam.up);
    cam.vertical_fov = r.number("vertical_fov");
    const auto res = r.numbers("resolution");
    if (res.size() != 2 || res[0] != std::floor(res[0]) || res[1] != std::floor(res[1]))
        throw ValidationError(r.field("resolution"), "expected [width, height] in pixels");
    cam.width = static_cast<int>(res[0]);
    cam.height = static_cast<int>(res[1]);
    r.finish();
    try {
        cam.validate();
    } catch (const ValidationError &e) {
        throw ValidationError(e.field(), std::string(e.what()).substr(e.field().size() + 2));
    }
    scene.camera = cam;
}

inline void parse_medium(FieldReader r, Scene &scene) {
    Medium m;
    m.sigma_s = r.number("sigma_s", 0.0);
    m.sigma_a = r.number("sigma_a", 0.0);
    m.g = r.number("g", 0.87);
    if (r.has("bounds")) {
        FieldReader b = r.object("bounds");
        m.bounds = Aabb{b.vec3("min"), b.vec3("max")};
        b.finish();
    }
    r.finish();
    try {
        m.validate();
    } catch (const ValidationError &e) {
        throw ValidationError(r.field(e.field()), std::string(e.what()).substr(e.field().size() + 2));
    }
    scene.medium = m;
}

inline Material parse_material(FieldReader r, const std::string &name) {
    Material mat;
    mat.name = name;
    const std::string type = r.string("type");
    if (type == "lambertian") {
        Lambertian l{r.spectrum("albedo")};
        if (l.albedo.max_value() > 1.0) throw ValidationError(r.field("albedo"), "reflectance must be in [0, 1]");
        mat.kind = l;
    } else if (type == "emissive") {
        mat.kind = Emissive{r.spectrum("radiance")};
    } else {
        throw ValidationError(r.field("type"), "unknown material type '" + type + "'");
    }
    r.finish();
    return mat;
}

inline Quad parse_quad(FieldReader &r) {
    Quad q{r.vec3("origin"), r.vec3("edge_u"), r.vec3("edge_v")};
    if (length(cross(q.edge_u, q.edge_v)) <= 1e-12 * std::max(1.0, length(q.edge_u) * length(q.edge_v)))
        throw ValidationError(r.field("edge_v"), "quad edges must be non-parallel and non-zero");
    return q;
}

inline Primitive parse_primitive(FieldReader r, const std::map<std::string, std::size_t> &materials) {
    Primitive prim;
    const std::string type = r.string("type");
    if (type == "sphere") {
        Sphere s{r.vec3("center"), r.number("radius")};
        if (!(s.radius > 0.0)) throw ValidationError(r.field("radius"), "radius must be > 0");
        prim.shape = s;
    } else if (type == "quad") {
        prim.shape = parse_quad(r);
    } else if (type == "mesh") {
        TriangleMesh mesh;
        const Json &verts = r.raw("vertices");
        if (!verts.is_array() || verts.empty()) throw ValidationError(r.field("vertices"), "expected a list of [x, y, z]");
        for (const auto &v : verts) {
            if (!v.is_array() || v.size() != 3) throw ValidationError(r.field("vertices"), "expected [x, y, z] entries");
            mesh.vertices.push_back({v[0].get<double>(), v[1].get<double>(), v[2].get<double>()});
        }
        const Json &idx = r.raw("indices");
        if (!idx.is_array() || idx.empty()) throw ValidationError(r.field("indices"), "expected a list of [i, j, k]");
        for (const auto &t : idx) {
            if (!t.is_array() || t.size() != 3) throw ValidationError(r.field("indices"), "expected [i, j, k] entries");
            std::array<std::uint32_t, 3> tri{};
            for (int k = 0; k < 3; ++k) {
                if (!t[k].is_number_integer() || t[k].get<long long>() < 0 ||
                    t[k].get<long long>() >= static_cast<long long>(mesh.vertices.size()))
                    throw ValidationError(r.field("indices"), "vertex index out of range");
                tri[k] = t[k].get<std::uint32_t>();
            }
            mesh.indices.push_back(tri);
        }
        prim.shape = std::move(mesh);
    } else {
        throw ValidationError(r.field("type"), "unknown primitive type '" + type + "'");
    }
    const std::string mat = r.string("material");
    const auto it = materials.find(mat);
    if (it == materials.end()) throw ValidationError(r.field("material"), "unknown material '" + mat + "'");
    prim.material_id = it->second;
    r.finish();
    return prim;
}

inline Light parse_light(FieldReader r, std::size_t index) {
    Light light;
    const std::string type = r.string("type");
    light.name = r.string("name", type + std::to_string(index));
    LightRole default_role = LightRole::active;
    if (type == "point") {
        light.kind = PointLight{r.vec3("position"), r.spectrum("intensity")};
    } else if (type == "area") {
        AreaLight a;
        a.quad = parse_quad(r);
        a.radiance = r.spectrum("radiance");
        light.kind = a;
    } else if (type == "environment") {
        EnvironmentLight env{r.spectrum("radiance"), std::nullopt};
        if (r.has("map")) {
            FieldReader m = r.object("map");
            LatLongMap map;
            map.width = static_cast<int>(m.integer("width"));
            map.height = static_cast<int>(m.integer("height"));
            if (map.width < 1 || map.height < 1) throw ValidationError(m.field("width"), "map must be at least 1x1");
            map.values = m.numbers("values");
            if (map.values.size() != static_cast<std::size_t>(map.width) * map.height)
                throw ValidationError(m.field("values"), "expected width*height values");
            for (double v : map.values)
                if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(m.field("values"), "values must be finite and >= 0");
            m.finish();
            env.map = std::move(map);
        }
        light.kind = std::move(env);
        default_role = LightRole::sky;
    } else {
        throw ValidationError(r.field("type"), "unknown light type '" + type + "'");
    }
    const std::string role = r.string("role", default_role == LightRole::sky ? "sky" : "active");
    if (role == "sky") light.role = LightRole::sky;
    else if (role == "active") light.role = LightRole::active;
    else throw ValidationError(r.field("role"), "role must be 'sky' or 'active'");
    r.finish();
    return light;
}

} // namespace detail

/// Builds a validated Scene from scene-file text. `source` is used in diagnostics.
inline Scene parse_scene_text(const std::string &text, const std::string &source = "<scene>") {
    const Json root = parse_json_text(text, source);
    FieldReader r(root, "");
    Scene scene;
    if (r.has("name")) scene.name = r.string("name");
    if (r.has("camera")) detail::parse_camera(r.object("camera"), scene);
    if (r.has("medium")) detail::parse_medium(r.object("medium"), scene);

    std::map<std::string, std::size_t> material_ids;
    FieldReader mats = r.object("materials");
    for (const auto &[name, value] : r.raw("materials").items()) {
        (void)mats.has(name);
        material_ids[name] = scene.materials.size();
        scene.materials.push_back(detail::parse_material(FieldReader(value, mats.field(name)), name));
    }

    const Json &prims = r.raw("primitives");
    if (!prims.is_array()) throw ValidationError("primitives", "expected a list");
    for (std::size_t i = 0; i < prims.size(); ++i)
        scene.primitives.push_back(
            detail::parse_primitive(FieldReader(prims[i], "primitives[" + std::to_string(i) + "]"), material_ids));

    if (r.has("lights")) {
        const Json &lights = r.raw("lights");
        if (!lights.is_array()) throw ValidationError("lights", "expected a list");
        for (std::size_t i = 0; i < lights.size(); ++i)
            scene.lights.push_back(detail::parse_light(FieldReader(lights[i], "lights[" + std::to_string(i) + "]"), i));
    }
    r.finish();
    return scene;
}

/// Reads and validates a scene file. The scene name defaults to the file stem.
inline Scene parse_scene(const std::string &path) {
    const std::string text = read_text_file(path);
    Scene scene = parse_scene_text(text, path);
    if (scene.name == "scene") scene.name = std::filesystem::path(path).stem().string();
    return scene;
}

} // namespace fogsim
