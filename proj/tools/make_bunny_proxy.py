#!/usr/bin/env python3
"""Build data/bunny.ply, a stand-in for the Stanford Bunny scan (bun_zipper.ply).

Input is the low-poly bunny mesh shipped by the public-domain npm package
`bunny` (`npm pack bunny`, then unpack; the mesh lives in package/index.js).
The mesh is scaled uniformly so its height matches bun_zipper, shifted onto
bun_zipper's bounding box, and sampled area-uniformly to the same point count
(35947). Output is binary_little_endian float32 x/y/z.

    python3 tools/make_bunny_proxy.py package/index.js data/bunny.ply
"""

import json
import re
import struct
import sys

import numpy as np

N_POINTS = 35947
SEED = 20240531
# bun_zipper.ply bounding box (metres)
BBOX_MIN = np.array([-0.094689, 0.032987, -0.061874])
BBOX_MAX = np.array([0.061009, 0.187321, 0.058800])


def load_mesh(path):
    src = open(path).read()
    pos = json.loads(re.search(r"exports\.positions\s*=\s*(\[.*?\]\])", src, re.S).group(1))
    cells = json.loads(re.search(r"exports\.cells\s*=\s*(\[.*?\]\])", src, re.S).group(1))
    return np.asarray(pos, dtype=np.float64), np.asarray(cells, dtype=np.int64)


def main():
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    verts, faces = load_mesh(sys.argv[1])
    lo, hi = verts.min(0), verts.max(0)
    scale = (BBOX_MAX[1] - BBOX_MIN[1]) / (hi[1] - lo[1])
    verts = (verts - lo) * scale + BBOX_MIN

    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    rng = np.random.default_rng(SEED)
    tri = rng.choice(len(faces), size=N_POINTS, p=area / area.sum())
    u, v = rng.random(N_POINTS), rng.random(N_POINTS)
    flip = u + v > 1.0
    u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]
    pts = a[tri] + u[:, None] * (b[tri] - a[tri]) + v[:, None] * (c[tri] - a[tri])

    header = (
        "ply\nformat binary_little_endian 1.0\n"
        "comment proxy for bun_zipper.ply, see tools/make_bunny_proxy.py\n"
        f"element vertex {N_POINTS}\n"
        "property float x\nproperty float y\nproperty float z\nend_header\n"
    )
    with open(sys.argv[2], "wb") as f:
        f.write(header.encode("ascii"))
        f.write(pts.astype("<f4").tobytes())


if __name__ == "__main__":
    main()
