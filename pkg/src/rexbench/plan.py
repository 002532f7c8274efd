"""Relational operator trees produced by the rule compiler.

Columns are named after rule variables.  Position values are
``(sentence_id, offset)`` pairs and span values ``(sentence_id, start, end)``
triples, so key and filter expressions can address their components.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


# -- expressions over a row ----------------------------------------------------


@dataclass(frozen=True)
class Col:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Lit:
    value: object

    def __str__(self):
        return repr(self.value)


@dataclass(frozen=True)
class PosShift:
    """Position displaced within its sentence: (sid, off) -> (sid, off+delta)."""
    col: str
    delta: int

    def __str__(self):
        return f"{self.col}.offset{self.delta:+d}"


@dataclass(frozen=True)
class FieldOf:
    """Component of a position or span column: sid, offset, start or end."""
    col: str
    fld: str

    def __str__(self):
        return f"{self.col}.{self.fld}"


@dataclass(frozen=True)
class SpanFrom:
    """Span built from two positions in one sentence (inclusive ends)."""
    start_col: str
    end_col: str

    def __str__(self):
        return f"span({self.start_col}..{self.end_col})"


Expr = Union[Col, Lit, PosShift, FieldOf, SpanFrom]

_FIELD_INDEX = {"sid": 0, "offset": 1, "start": 1, "end": 2}


def eval_expr(expr: Expr, row: tuple, index: dict):
    if isinstance(expr, Col):
        return row[index[expr.name]]
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, PosShift):
        sid, off = row[index[expr.col]]
        return (sid, off + expr.delta)
    if isinstance(expr, FieldOf):
        return row[index[expr.col]][_FIELD_INDEX[expr.fld]]
    if isinstance(expr, SpanFrom):
        sid, off1 = row[index[expr.start_col]]
        off2 = row[index[expr.end_col]][1]
        return (sid, off1, off2)
    raise TypeError(f"not an expression: {expr!r}")


# -- operator nodes -------------------------------------------------------------


@dataclass(frozen=True)
class Scan:
    """Scan of a stored or virtual relation.

    ``rel`` identifies the relation: ("token", field) with field one of
    surface/lemma/tag, ("dep", label), ("entity", etype), ("derived", name),
    ("coref",), ("cluster",) or ("virtual", name).  ``consts`` pins relation
    columns to constants; ``selfeq`` equates relation columns (repeated
    variables); ``schema`` names the remaining output columns in relation
    column order.
    """
    rel: tuple
    schema: tuple
    out_cols: tuple   # relation column index for each schema entry
    consts: tuple     # ((col_index, value), ...)
    selfeq: tuple     # ((col_index, col_index), ...)

    def describe(self) -> str:
        kind = self.rel[0]
        if kind == "token":
            name = {"surface": "token", "lemma": "lemma", "tag": "postag"}[self.rel[1]]
        elif kind in ("dep", "entity", "derived", "virtual"):
            name = f"{kind}:{self.rel[1]}"
        else:
            name = kind
        parts = [f"scan {name}"]
        for idx, val in self.consts:
            parts.append(f"col{idx}={val!r}")
        for i, j in self.selfeq:
            parts.append(f"col{i}=col{j}")
        return " ".join(parts)


@dataclass(frozen=True)
class Select:
    child: "PlanNode"
    op: str
    left: Expr
    right: Expr

    @property
    def schema(self):
        return self.child.schema

    def describe(self) -> str:
        return f"select {self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class Join:
    left: "PlanNode"
    right: "PlanNode"
    keys: tuple       # ((left_expr, right_expr), ...)
    schema: tuple

    def describe(self) -> str:
        if not self.keys:
            return "join cross"
        return "join " + ", ".join(f"{l}={r}" for l, r in self.keys)


@dataclass(frozen=True)
class AntiJoin:
    left: "PlanNode"
    right: "PlanNode"
    keys: tuple       # ((left_col, right_col), ...)

    @property
    def schema(self):
        return self.left.schema

    def describe(self) -> str:
        return "antijoin " + ", ".join(f"{l}={r}" for l, r in self.keys)


@dataclass(frozen=True)
class Union:
    children: tuple
    schema: tuple

    def describe(self) -> str:
        return "union dedup"


@dataclass(frozen=True)
class Project:
    child: "PlanNode"
    outputs: tuple    # ((name, expr), ...)
    dedup: bool = True

    @property
    def schema(self):
        return tuple(name for name, _ in self.outputs)

    def describe(self) -> str:
        cols = ", ".join(
            name if isinstance(expr, Col) and expr.name == name else f"{name}={expr}"
            for name, expr in self.outputs)
        return f"project [{cols}]" + (" dedup" if self.dedup else "")


PLAN_NODE_TYPES = (Scan, Select, Join, AntiJoin, Union, Project)
PlanNode = object  # any of PLAN_NODE_TYPES


def children(node: PlanNode) -> tuple:
    if isinstance(node, (Select, Project)):
        return (node.child,)
    if isinstance(node, (Join, AntiJoin)):
        return (node.left, node.right)
    if isinstance(node, Union):
        return node.children
    return ()


def dump(node: PlanNode, indent: int = 0) -> str:
    """Deterministic one-operator-per-line rendering for golden tests."""
    line = "  " * indent + node.describe() + f" -> [{', '.join(node.schema)}]"
    out = [line]
    for ch in children(node):
        out.append(dump(ch, indent + 1))
    return "\n".join(out)


def iter_nodes(node: PlanNode):
    yield node
    for ch in children(node):
        yield from iter_nodes(ch)
