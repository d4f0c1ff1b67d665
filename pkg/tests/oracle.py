'''
    Slow reference implementations the library is checked against.
'''


from itertools import combinations

import numpy as np

from . import context  # noqa: F401


def greedy_tmfg(corr, clique):
    '''
        Exhaustive greedy TMFG: at every step all (face, node) pairs are
        scored and the best is taken (higher gain, then lower node, then
        older face).

        Returns (steps, edges) where steps holds (sorted face, node) per
        insertion and edges the set of (u, v) pairs, u < v.
    '''

    n = corr.shape[0]
    clique = sorted(clique)
    edges = set(combinations(clique, 2))
    faces = [list(face) for face in combinations(clique, 3)]
    alive = [True] * len(faces)
    remaining = [v for v in range(n) if v not in clique]
    steps = []
    while remaining:
        best = None
        for f, face in enumerate(faces):
            if not alive[f]:
                continue
            for v in remaining:
                gain = corr[v, face[0]] + corr[v, face[1]] + corr[v, face[2]]
                key = (-gain, v, f)
                if best is None or key < best:
                    best = key
        _, v, f = best
        a, b, c = faces[f]
        steps.append((tuple(sorted(faces[f])), v))
        for u in (a, b, c):
            edges.add((min(u, v), max(u, v)))
        alive[f] = False
        faces.extend(([v, b, c], [a, v, c], [a, b, v]))
        alive.extend((True, True, True))
        remaining.remove(v)
    return steps, edges


def brute_top_k(rows, vector, k, exclude=()):
    '''
        Returns the k (id, similarity) pairs with the largest dot / D,
        ties by ascending id.
    '''

    rows = np.asarray(rows, dtype=np.float64)
    sims = rows @ np.asarray(vector, dtype=np.float64) / rows.shape[1]
    ids = [i for i in range(len(rows)) if i not in set(exclude)]
    ids.sort(key=lambda i: (-sims[i], i))
    return [(i, float(sims[i])) for i in ids[:k]]
