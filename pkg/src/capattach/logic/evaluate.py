"""Model checking of FO sentences on finite simple graphs.

Two independent evaluators:

* :func:`fo_eval` follows Tarskian semantics directly, enumerating vertex
  assignments recursively.  Cost is O(n ** depth) atom checks.
* :func:`eval_table` computes, bottom-up, the boolean table of every
  subformula over all assignments of its free variables (numpy arrays with
  one axis per free variable).  Memory is O(n ** w) where ``w`` is the
  largest number of free variables of a subformula.
"""

from __future__ import annotations

import numpy as np

from ..canon import LabeledGraph
from ..errors import SizeError
from ..graph_core import AttachGraph
from .syntax import Adj, And, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, Sentence

DEFAULT_MAX_WORK = 10**8
DEFAULT_MAX_CELLS = 5 * 10**7


def adjacency_matrix(g) -> np.ndarray:
    """Boolean adjacency matrix of a LabeledGraph, AttachGraph or square array."""
    if isinstance(g, AttachGraph):
        return g.adjacency_matrix()
    if isinstance(g, LabeledGraph):
        mat = np.zeros((g.k, g.k), dtype=bool)
        for i, j in g.edges:
            mat[i, j] = mat[j, i] = True
        return mat
    mat = np.asarray(g, dtype=bool)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise TypeError("expected a graph or a square adjacency matrix")
    return mat


def _formula(phi) -> Formula:
    return phi.formula if isinstance(phi, Sentence) else phi


def fo_eval(phi, g, max_work: int = DEFAULT_MAX_WORK) -> bool:
    """Truth of a sentence in ``g`` by recursive enumeration of assignments."""
    f = _formula(phi)
    if f.free:
        raise ValueError(f"formula has free variables {sorted(f.free)}")
    mat = adjacency_matrix(g)
    n = mat.shape[0]
    if n ** f.depth > max_work:
        raise SizeError(f"{n} vertices at quantifier depth {f.depth} exceeds work ceiling {max_work}")
    nbrs = [frozenset(np.flatnonzero(row).tolist()) for row in mat]
    verts = range(n)

    def sat(f, env):
        if isinstance(f, Adj):
            return env[f.y] in nbrs[env[f.x]]
        if isinstance(f, Eq):
            return env[f.x] == env[f.y]
        if isinstance(f, Not):
            return not sat(f.body, env)
        if isinstance(f, And):
            return all(sat(p, env) for p in f.parts)
        if isinstance(f, Or):
            return any(sat(p, env) for p in f.parts)
        if isinstance(f, Implies):
            return (not sat(f.left, env)) or sat(f.right, env)
        if isinstance(f, Iff):
            return sat(f.left, env) == sat(f.right, env)
        if isinstance(f, Exists):
            return any(sat(f.body, {**env, f.var: v}) for v in verts)
        if isinstance(f, Forall):
            return all(sat(f.body, {**env, f.var: v}) for v in verts)
        raise TypeError(f"not a formula: {f!r}")

    return sat(f, {})


class _Table:
    """Boolean array with one axis per variable in ``vars`` (sorted)."""

    __slots__ = ("vars", "arr")

    def __init__(self, vars_, arr):
        self.vars, self.arr = vars_, arr

    def expand(self, target, n):
        """View of the table broadcast to the axes ``target`` (a superset of vars)."""
        if self.vars == target:
            return self.arr
        shape = [n if v in self.vars else 1 for v in target]
        return self.arr.reshape(shape)


def eval_table(phi, g, max_cells: int = DEFAULT_MAX_CELLS) -> bool:
    """Truth of a sentence in ``g`` via bottom-up satisfaction tables."""
    f = _formula(phi)
    if f.free:
        raise ValueError(f"formula has free variables {sorted(f.free)}")
    mat = adjacency_matrix(g)
    n = mat.shape[0]
    eye = np.eye(n, dtype=bool)

    def combine(parts, op):
        tabs = [table(p) for p in parts]
        target = tuple(sorted(set().union(*(t.vars for t in tabs))))
        _guard(len(target))
        out = tabs[0].expand(target, n)
        for t in tabs[1:]:
            out = op(out, t.expand(target, n))
        return _Table(target, np.broadcast_to(out, (n,) * len(target)))

    def _guard(width):
        if n**width > max_cells:
            raise SizeError(f"table with {width} free variables over {n} vertices exceeds {max_cells} cells")

    def table(f) -> _Table:
        if isinstance(f, (Adj, Eq)):
            base = mat if isinstance(f, Adj) else eye
            if f.x == f.y:
                return _Table((f.x,), base.diagonal().copy())
            if f.x < f.y:
                return _Table((f.x, f.y), base)
            return _Table((f.y, f.x), base.T)
        if isinstance(f, Not):
            t = table(f.body)
            return _Table(t.vars, ~t.arr)
        if isinstance(f, And):
            return combine(f.parts, np.logical_and)
        if isinstance(f, Or):
            return combine(f.parts, np.logical_or)
        if isinstance(f, Implies):
            return combine((Not(f.left), f.right), np.logical_or)
        if isinstance(f, Iff):
            return combine((f.left, f.right), np.equal)
        if isinstance(f, (Exists, Forall)):
            t = table(f.body)
            if f.var not in t.vars:
                if n == 0:
                    return _Table((), np.array(isinstance(f, Forall)))
                return t
            axis = t.vars.index(f.var)
            red = np.any if isinstance(f, Exists) else np.all
            return _Table(t.vars[:axis] + t.vars[axis + 1:], red(t.arr, axis=axis))
        raise TypeError(f"not a formula: {f!r}")

    return bool(table(f).arr)
