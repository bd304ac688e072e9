"""Regenerate the triangulation fixtures shipped in src/packrig/data.

The genus-2 complex is the connected sum of two 7-vertex tori followed by
edge contractions that respect the link condition, down to 10 vertices.
Among many random contraction runs we keep one with the largest
orientation-preserving automorphism group.  The Fuchsian packing of that
complex is shipped as genus2_packing.json.
"""
import json
import random
from pathlib import Path

from packrig.packing_engine import save_packing, solve_fuchsian
from packrig.surface_complex import (
    automorphisms, euler_stats, from_triples, is_simplicial, parse_complex,
    validate_quasi_simplicial,
)

DATA = Path(__file__).resolve().parents[1] / "src" / "packrig" / "data"


def torus7(offset=0):
    return [tuple((i + a) % 7 + offset for a in p) for i in range(7) for p in ((0, 1, 3), (0, 3, 2))]


def connected_sum():
    a = torus7()
    b = torus7(7)
    a.remove((0, 1, 3))
    hole = (7, 8, 10)
    b.remove(hole)
    # glue the hole of b onto the reversed hole of a
    relabel = {7: 0, 8: 3, 10: 1}
    b = [tuple(relabel.get(v, v) for v in t) for t in b]
    used = sorted({v for t in a + b for v in t})
    idx = {v: i for i, v in enumerate(used)}
    return [tuple(idx[v] for v in t) for t in a + b]


def link(tris, v):
    out = set()
    for t in tris:
        if v in t:
            out.update(t)
    out.discard(v)
    return out


def contract(tris, a, b):
    opposite = [set(t) - {a, b} for t in tris if a in t and b in t]
    if len(opposite) != 2:
        return None
    if link(tris, a) & link(tris, b) != set().union(*opposite):
        return None
    new = [tuple(a if v == b else v for v in t) for t in tris if not (a in t and b in t)]
    if len({frozenset(t) for t in new}) != len(new):
        return None
    if any(len(link(new, v)) < 3 for t in new for v in t):
        return None
    return new


def relabel(tris):
    used = sorted({v for t in tris for v in t})
    idx = {v: i for i, v in enumerate(used)}
    return len(used), [tuple(idx[v] for v in t) for t in tris]


def flip(tris, a, b):
    pair = [t for t in tris if a in t and b in t]
    if len(pair) != 2:
        return None
    c = (set(pair[0]) - {a, b}).pop()
    d = (set(pair[1]) - {a, b}).pop()
    if d in link(tris, c):
        return None
    # keep orientation: rotate each triangle so the shared edge is a->b or b->a
    t0 = pair[0]
    i = t0.index(a)
    if t0[(i + 1) % 3] != b:
        c, d = d, c
    # now (a, b, c) and (b, a, d) are the oriented triangles
    new = [t for t in tris if t not in pair] + [(c, a, d), (d, b, c)]
    if any(len(link(new, v)) < 3 for v in (a, b)):
        return None
    return new


def edges_of(tris):
    return sorted({tuple(sorted((t[i], t[(i + 1) % 3]))) for t in tris for i in range(3)})


def shrink(tris, target, rng, max_steps=2000):
    for _ in range(max_steps):
        n = len({v for t in tris for v in t})
        if n == target:
            return tris
        edges = edges_of(tris)
        rng.shuffle(edges)
        for a, b in edges:
            new = contract(tris, a, b)
            if new is not None:
                tris = new
                break
        else:
            for a, b in edges:
                new = flip(tris, a, b)
                if new is not None:
                    tris = new
                    break
    return None


def genus2(seed=0, runs=400):
    rng = random.Random(seed)
    best = None
    for _ in range(runs):
        tris = shrink(connected_sum(), 10, rng)
        if tris is None:
            continue
        n, tris = relabel(tris)
        sc = from_triples(n, tris)
        if not is_simplicial(sc):
            continue
        k = len(automorphisms(sc))
        if best is None or k > best[0]:
            best = (k, tris)
    return best


def bigon_sphere():
    # two bigon disks bounded by the parallel edges N-S, each filled by a
    # vertex pair; corners listed counterclockwise
    N, S, c, d, c2, d2 = range(6)
    vertex_of = [
        [N, S, c], [N, c, d], [S, d, c], [S, N, d],
        [S, N, c2], [S, c2, d2], [N, d2, c2], [N, S, d2],
    ]
    return _glue(6, vertex_of, {(0, 0): (4, 0), (3, 0): (7, 0)})


def _glue(n, vertex_of, forced):
    """Glue sides with matching reversed endpoints; ``forced`` pins ambiguous pairs."""
    gluing = dict(forced)
    gluing.update({v: k for k, v in forced.items()})
    free = {}
    for t, tri in enumerate(vertex_of):
        for s in range(3):
            if (t, s) in gluing:
                continue
            free.setdefault((tri[s], tri[(s + 1) % 3]), []).append((t, s))
    for (a, b), sides in free.items():
        if a < b:
            other = free[(b, a)]
            assert len(sides) == len(other) == 1, (a, b)
            gluing[sides[0]] = other[0]
            gluing[other[0]] = sides[0]
    return {
        "vertices": n,
        "triangles": len(vertex_of),
        "vertex_of": vertex_of,
        "gluing": [[list(k), list(v)] for k, v in sorted(gluing.items()) if k < v],
    }


def one_vertex_torus():
    return {
        "vertices": 1, "triangles": 2,
        "vertex_of": [[0, 0, 0], [0, 0, 0]],
        "gluing": [[[0, 0], [1, 0]], [[0, 1], [1, 1]], [[0, 2], [1, 2]]],
    }


def octahedron():
    tris = [(0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4), (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5)]
    return {"vertices": 6, "triangles": [list(t) for t in tris]}


def tetrahedron():
    return {"vertices": 4, "triangles": [[0, 1, 2], [0, 2, 3], [0, 3, 1], [1, 3, 2]]}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    docs = {
        "octahedron.json": octahedron(),
        "tetrahedron.json": tetrahedron(),
        "torus7.json": {"vertices": 7, "triangles": [list(t) for t in torus7()]},
        "bigon_sphere.json": bigon_sphere(),
        "one_vertex_torus.json": one_vertex_torus(),
    }
    k, tris = genus2()
    print("genus-2 automorphism group order", k)
    docs["genus2.json"] = {"vertices": 10, "triangles": [list(t) for t in tris]}
    for name, doc in docs.items():
        sc = parse_complex(doc)
        print(name, euler_stats(sc), validate_quasi_simplicial(sc))
        (DATA / name).write_text(json.dumps(doc) + "\n")
    save_packing(solve_fuchsian(parse_complex(docs["genus2.json"])), DATA / "genus2_packing.json")


if __name__ == "__main__":
    main()
