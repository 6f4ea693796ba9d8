"""Bipartite variable/constraint graph construction and export.

Constraint nodes carry interval bounds derived from the row sense
(ax <= b -> (-inf, b], ax >= b -> [b, +inf), ax = b -> [b, b]) plus 0/1
indicators hlb/hub marking which side is finite.  Variable nodes carry bound
indicators, the objective coefficient, the bounds themselves and a type tag
(binary folds into "integer").  Edges are the nonzero matrix coefficients.

The export format is deterministic JSON with one node or edge per line;
infinite bounds are written as the strings "inf"/"-inf" so the file stays
standard JSON.  No embeddings or message passing happen here: the file is the
boundary to external graph-learning pipelines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

INF = math.inf

FORMAT_TAG = "benloc-graph-v1"


@dataclass(eq=False)
class BipartiteGraph:
    con_lb: np.ndarray
    con_ub: np.ndarray
    con_hlb: np.ndarray  # 0/1
    con_hub: np.ndarray  # 0/1
    var_hlb: np.ndarray
    var_hub: np.ndarray
    var_obj: np.ndarray
    var_lb: np.ndarray
    var_ub: np.ndarray
    var_types: list  # "integer" | "continuous"
    edge_con: np.ndarray
    edge_var: np.ndarray
    edge_weight: np.ndarray

    @property
    def num_constraints(self):
        return len(self.con_lb)

    @property
    def num_variables(self):
        return len(self.var_obj)

    @property
    def num_edges(self):
        return len(self.edge_weight)

    def __eq__(self, other):
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        arrays = ["con_lb", "con_ub", "con_hlb", "con_hub", "var_hlb", "var_hub",
                  "var_obj", "var_lb", "var_ub", "edge_con", "edge_var",
                  "edge_weight"]
        return (self.var_types == other.var_types
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in arrays))


def build_graph(inst):
    """Build the bipartite graph of a MipInstance."""
    m, n = inst.num_rows, inst.num_cols
    con_lb = np.empty(m)
    con_ub = np.empty(m)
    con_hlb = np.zeros(m, dtype=np.int64)
    con_hub = np.zeros(m, dtype=np.int64)
    for i, (sense, b) in enumerate(zip(inst.row_senses, inst.rhs)):
        if sense == "<=":
            con_lb[i], con_ub[i] = -INF, b
            con_hub[i] = 1
        elif sense == ">=":
            con_lb[i], con_ub[i] = b, INF
            con_hlb[i] = 1
        else:
            con_lb[i] = con_ub[i] = b
            con_hlb[i] = con_hub[i] = 1

    var_hlb = (inst.var_lb > -INF).astype(np.int64)
    var_hub = (inst.var_ub < INF).astype(np.int64)
    var_types = ["continuous" if t == "continuous" else "integer"
                 for t in inst.var_types]

    return BipartiteGraph(
        con_lb=con_lb,
        con_ub=con_ub,
        con_hlb=con_hlb,
        con_hub=con_hub,
        var_hlb=var_hlb,
        var_hub=var_hub,
        var_obj=inst.obj_coeffs.copy(),
        var_lb=inst.var_lb.copy(),
        var_ub=inst.var_ub.copy(),
        var_types=var_types,
        edge_con=inst.mat_rows.copy(),
        edge_var=inst.mat_cols.copy(),
        edge_weight=inst.mat_vals.copy(),
    )


def _enc(v):
    if v == INF:
        return '"inf"'
    if v == -INF:
        return '"-inf"'
    return repr(float(v))


def _dec(v):
    if isinstance(v, str):
        return INF if v == "inf" else -INF
    return float(v)


def export_graph(g):
    """Serialize a graph: node tables, then one edge per line. Valid JSON."""
    lines = ["{", f'"format": "{FORMAT_TAG}",', '"constraint_nodes": [']
    con = [f"[{_enc(g.con_lb[i])}, {_enc(g.con_ub[i])}, "
           f"{int(g.con_hlb[i])}, {int(g.con_hub[i])}]"
           for i in range(g.num_constraints)]
    lines.append(",\n".join(con))
    lines.append('],')
    lines.append('"variable_nodes": [')
    var = [f"[{int(g.var_hlb[j])}, {int(g.var_hub[j])}, {_enc(g.var_obj[j])}, "
           f"{_enc(g.var_lb[j])}, {_enc(g.var_ub[j])}, \"{g.var_types[j]}\"]"
           for j in range(g.num_variables)]
    lines.append(",\n".join(var))
    lines.append('],')
    lines.append('"edges": [')
    edges = [f"[{int(g.edge_con[e])}, {int(g.edge_var[e])}, {_enc(g.edge_weight[e])}]"
             for e in range(g.num_edges)]
    lines.append(",\n".join(edges))
    lines.append(']')
    lines.append("}")
    return "\n".join(lines) + "\n"


def import_graph(text):
    """Inverse of export_graph."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    d = json.loads(text)
    if d.get("format") != FORMAT_TAG:
        raise ValueError(f"unknown graph format {d.get('format')!r}")
    con = d["constraint_nodes"]
    var = d["variable_nodes"]
    edges = d["edges"]
    return BipartiteGraph(
        con_lb=np.array([_dec(r[0]) for r in con]),
        con_ub=np.array([_dec(r[1]) for r in con]),
        con_hlb=np.array([int(r[2]) for r in con], dtype=np.int64),
        con_hub=np.array([int(r[3]) for r in con], dtype=np.int64),
        var_hlb=np.array([int(r[0]) for r in var], dtype=np.int64),
        var_hub=np.array([int(r[1]) for r in var], dtype=np.int64),
        var_obj=np.array([_dec(r[2]) for r in var]),
        var_lb=np.array([_dec(r[3]) for r in var]),
        var_ub=np.array([_dec(r[4]) for r in var]),
        var_types=[r[5] for r in var],
        edge_con=np.array([int(e[0]) for e in edges], dtype=np.int64),
        edge_var=np.array([int(e[1]) for e in edges], dtype=np.int64),
        edge_weight=np.array([float(e[2]) for e in edges]),
    )


def canonical_signature(g):
    """Order-independent signature; equal for graphs that differ only by a
    relabeling of constraint and variable indices."""
    by_con = {}
    by_var = {}
    for c, v, w in zip(g.edge_con, g.edge_var, g.edge_weight):
        by_con.setdefault(int(c), []).append(float(w))
        by_var.setdefault(int(v), []).append(float(w))
    con_sigs = sorted(
        (float(g.con_lb[i]), float(g.con_ub[i]), int(g.con_hlb[i]),
         int(g.con_hub[i]), tuple(sorted(by_con.get(i, []))))
        for i in range(g.num_constraints))
    var_sigs = sorted(
        (int(g.var_hlb[j]), int(g.var_hub[j]), float(g.var_obj[j]),
         float(g.var_lb[j]), float(g.var_ub[j]), g.var_types[j],
         tuple(sorted(by_var.get(j, []))))
        for j in range(g.num_variables))
    return tuple(con_sigs), tuple(var_sigs)
