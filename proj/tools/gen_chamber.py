#!/usr/bin/env python3
"""Writes scenes/chamber.scene: a 6x4 reflectance chart in a bounded fog box.

Geometry is scaled so the tier densities 0.005-0.02 1/m give optical depths
of 0.2-0.8 between camera and chart. Four lamp bars sit just in front of the
camera, out of view, and light the chart; a dim uniform sky supplies the
airlight.
"""
import json
import math
import re
import sys

BANDS = [400 + 10 * i for i in range(31)]


def bump(center, width):
    return [math.exp(-0.5 * ((w - center) / width) ** 2) for w in BANDS]


RED, GREEN, BLUE = bump(620, 45), bump(540, 40), bump(450, 35)


def reflectance(r, g, b):
    vals = [0.02 + r * x + g * y + b * z for x, y, z in zip(RED, GREEN, BLUE)]
    return [round(min(v, 0.95), 4) for v in vals]


# Rows top to bottom; the last row is the neutral ramp.
CHART = [
    [(0.40, 0.25, 0.18), (0.75, 0.55, 0.45), (0.20, 0.30, 0.55), (0.25, 0.40, 0.15), (0.35, 0.35, 0.70), (0.20, 0.70, 0.60)],
    [(0.85, 0.45, 0.05), (0.15, 0.20, 0.65), (0.75, 0.20, 0.25), (0.25, 0.10, 0.35), (0.55, 0.75, 0.10), (0.90, 0.65, 0.05)],
    [(0.05, 0.10, 0.55), (0.15, 0.55, 0.15), (0.70, 0.08, 0.08), (0.90, 0.85, 0.05), (0.75, 0.20, 0.55), (0.05, 0.45, 0.65)],
]
NEUTRAL = [0.9, 0.59, 0.36, 0.19, 0.09, 0.03]

PATCH, GAP, Z = 2.0, 0.4, -40.0


def patch_origin(row, col):
    x0 = -(6 * PATCH + 5 * GAP) / 2 + col * (PATCH + GAP)
    y_top = (4 * PATCH + 3 * GAP) / 2 - row * (PATCH + GAP)
    return [x0, y_top - PATCH, Z]


def main(path):
    materials = {"backdrop": {"type": "lambertian", "albedo": "flat 0.05"}}
    prims = [{"type": "quad", "origin": [-10, -10, Z - 0.05], "edge_u": [20, 0, 0], "edge_v": [0, 20, 0],
              "material": "backdrop"}]
    for row in range(4):
        for col in range(6):
            name = f"patch_{row}_{col}"
            if row == 3:
                albedo = f"flat {NEUTRAL[col]}"
            else:
                albedo = reflectance(*CHART[row][col])
            materials[name] = {"type": "lambertian", "albedo": albedo}
            prims.append({"type": "quad", "origin": patch_origin(row, col), "edge_u": [PATCH, 0, 0],
                          "edge_v": [0, PATCH, 0], "material": name})
    # Bars face -z (normal = edge_u x edge_v).
    bars = [
        ("lamp_top", [-5, 4, -2], [0, 0.5, 0], [10, 0, 0]),
        ("lamp_bottom", [-5, -4.5, -2], [0, 0.5, 0], [10, 0, 0]),
        ("lamp_left", [-4.5, -3, -2], [0, 6, 0], [0.5, 0, 0]),
        ("lamp_right", [4, -3, -2], [0, 6, 0], [0.5, 0, 0]),
    ]
    lights = [{"type": "environment", "name": "sky", "radiance": "flat 0.002", "role": "sky"}]
    for name, o, u, v in bars:
        lights.append({"type": "area", "name": name, "origin": o, "edge_u": u, "edge_v": v,
                       "radiance": "flat 0.5", "role": "active"})
    scene = {
        "name": "chamber",
        "camera": {"position": [0, 0, 0], "look_at": [0, 0, -1], "up": [0, 1, 0], "vertical_fov": 22,
                   "resolution": [256, 256]},
        "medium": {"sigma_s": 0.0, "sigma_a": 0.0, "g": 0.87, "bounds": {"min": [-30, -30, -41], "max": [30, 30, 1]}},
        "materials": materials,
        "primitives": prims,
        "lights": lights,
    }
    with open(path, "w") as f:
        f.write("// Fog chamber reflectance chart. Generated by tools/gen_chamber.py.\n")
        text = json.dumps(scene, indent=2)
        # Keep numeric lists on one line.
        text = re.sub(r"\[\s*([-0-9.,\s]+?)\s*\]", lambda m: "[" + re.sub(r"\s*,\s*", ", ", m.group(1)) + "]", text)
        f.write(text)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "scenes/chamber.scene")
