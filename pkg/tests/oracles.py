"""Independent reference implementations used only by the tests.

None of these import the code they check beyond the data classes needed to
read a parsed molecule.
"""

from __future__ import annotations

import itertools
import math
from pathlib import Path

import numpy as np

DATA = Path(__file__).parent / "data"


def corpus():
    return [line.strip() for line in (DATA / "corpus.smi").read_text().splitlines() if line.strip()]


# --- substructure -----------------------------------------------------------


def _atom_ok(pa, ta):
    return pa.element == ta.element and pa.aromatic == ta.aromatic


def _bond_table(mol):
    return {frozenset((b.begin, b.end)): b.order for b in mol.bonds}


def naive_matches(pattern, target):
    """Every injective atom map that preserves labels and pattern bonds.

    Pattern atoms are placed in index order and each placement is checked
    against all earlier ones; no search-order heuristics, no degree pruning.
    """
    pb, tb = _bond_table(pattern), _bond_table(target)
    n, m = len(pattern.atoms), len(target.atoms)
    out = []
    assign = []

    def rec(i):
        if i == n:
            out.append(tuple(assign))
            return
        for t in range(m):
            if t in assign or not _atom_ok(pattern.atoms[i], target.atoms[t]):
                continue
            ok = True
            for j in range(i):
                order = pb.get(frozenset((i, j)))
                if order is not None and tb.get(frozenset((t, assign[j]))) != order:
                    ok = False
                    break
            if ok:
                assign.append(t)
                rec(i + 1)
                assign.pop()

    rec(0)
    return out


def naive_substructure(pattern, target):
    maps = naive_matches(pattern, target)
    return bool(maps), len({frozenset(mp) for mp in maps})


def networkx_substructure(pattern, target):
    import networkx as nx
    from networkx.algorithms import isomorphism as iso

    def graph(mol):
        g = nx.Graph()
        for i, a in enumerate(mol.atoms):
            g.add_node(i, label=(a.element, a.aromatic))
        for b in mol.bonds:
            g.add_edge(b.begin, b.end, order=b.order)
        return g

    gm = iso.GraphMatcher(graph(target), graph(pattern),
                          node_match=lambda x, y: x["label"] == y["label"],
                          edge_match=lambda x, y: x["order"] == y["order"])
    sets = {frozenset(m.keys()) for m in gm.subgraph_monomorphisms_iter()}
    return bool(sets), len(sets)


# --- SMILES writer for re-parse invariance --------------------------------------

_BOND_SYMBOL = {1.0: "-", 2.0: "=", 3.0: "#", 1.5: ":"}


def random_smiles(mol, rng):
    """A random valid SMILES for ``mol``: random roots and neighbor order.

    Every atom is written in brackets with its hydrogen count and charge and
    every bond with an explicit symbol, so the re-parsed graph is exact.
    """
    n = len(mol.atoms)
    adj = {i: [] for i in range(n)}
    for b in mol.bonds:
        adj[b.begin].append((b.end, b.order))
        adj[b.end].append((b.begin, b.order))
    seen = [False] * n
    # first pass: DFS tree; non-tree edges become ring closures
    parent = {}
    order = []
    tree = set()
    roots = list(rng.permutation(n))
    for root in roots:
        root = int(root)
        if seen[root]:
            continue
        stack = [(root, None)]
        while stack:
            a, p = stack.pop()
            if seen[a]:
                continue
            seen[a] = True
            parent[a] = p
            order.append(a)
            if p is not None:
                tree.add(frozenset((a, p)))
            nbrs = [nb for nb, _ in adj[a]]
            for k in rng.permutation(len(nbrs)):
                nb = nbrs[int(k)]
                if not seen[nb]:
                    stack.append((nb, a))
    children = {i: [] for i in range(n)}
    for a in order:
        if parent[a] is not None:
            children[parent[a]].append(a)
    closures = {i: [] for i in range(n)}
    labels = itertools.count(1)
    pos = {a: k for k, a in enumerate(order)}
    for b in mol.bonds:
        if frozenset((b.begin, b.end)) in tree:
            continue
        first, second = sorted((b.begin, b.end), key=pos.get)
        num = next(labels)
        closures[first].append((num, b.order))
        closures[second].append((num, b.order))

    def atom_text(i):
        a = mol.atoms[i]
        sym = a.element.lower() if a.aromatic else a.element
        iso_ = str(a.isotope) if a.isotope else ""
        h = a.explicit_h if a.explicit_h is not None else a.implicit_h
        htxt = "" if h == 0 else ("H" if h == 1 else f"H{h}")
        q = a.formal_charge
        qtxt = "" if q == 0 else (("+" if q > 0 else "-") + (str(abs(q)) if abs(q) > 1 else ""))
        return f"[{iso_}{sym}{htxt}{qtxt}]"

    def ring_text(num):
        return str(num) if num < 10 else f"%{num}"

    def write(a):
        s = atom_text(a)
        for num, o in closures[a]:
            s += _BOND_SYMBOL[o] + ring_text(num)
        kids = children[a]
        for k, c in enumerate(kids):
            body = _BOND_SYMBOL[mol.bond_order(a, c)] + write(c)
            s += body if k == len(kids) - 1 else "(" + body + ")"
        return s

    tops = [a for a in order if parent[a] is None]
    return ".".join(write(a) for a in tops)


# --- metrics and losses -----------------------------------------------------------


def pair_count_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            credit += 1.0 if p > q else 0.5 if p == q else 0.0
    return credit / (len(pos) * len(neg))


def bce_scalar(y_hat, y, eps=1e-7):
    total, n = 0.0, 0
    for p, t in zip(y_hat, y):
        if t != t:  # NaN label
            continue
        p = min(max(p, eps), 1.0 - eps)
        total += t * math.log(p) + (1.0 - t) * math.log(1.0 - p)
        n += 1
    return -total / n


def rmse_scalar(y_hat, y):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(y_hat, y)) / len(y))


def central_difference(f, params, h=1e-5):
    """Numerical gradient of scalar ``f()`` w.r.t. every array in ``params``."""
    grads = {}
    for name, p in params.items():
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = f()
            flat[i] = old - h
            down = f()
            flat[i] = old
            gflat[i] = (up - down) / (2 * h)
        grads[name] = g
    return grads


def relative_error(a, n):
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)
