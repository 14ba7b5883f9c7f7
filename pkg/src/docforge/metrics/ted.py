"""Ordered labeled trees and the Zhang-Shasha tree edit distance."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional


@dataclass
class Node:
    label: str
    children: list["Node"] = field(default_factory=list)

    def add(self, child: "Node") -> "Node":
        self.children.append(child)
        return self

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


def unit_rename(a: Node, b: Node) -> float:
    return 0.0 if a.label == b.label else 1.0


@dataclass(frozen=True)
class CostModel:
    insert_cost: float = 1.0
    delete_cost: float = 1.0
    rename: Callable[[Node, Node], float] = unit_rename


def tree_size(t: Optional[Node]) -> int:
    return 0 if t is None else t.size()


class _Annotated:
    """Postorder numbering, leftmost-leaf table and keyroots of one tree."""

    def __init__(self, root: Node):
        self.nodes: list[Node] = []
        self.lmd: list[int] = []
        # frames: [node, next child to visit, leftmost leaf of node]
        stack = [[root, 0, -1]]
        while stack:
            frame = stack[-1]
            node, ci = frame[0], frame[1]
            if ci < len(node.children):
                frame[1] += 1
                stack.append([node.children[ci], 0, -1])
                continue
            stack.pop()
            idx = len(self.nodes)
            lm = frame[2] if node.children else idx
            self.nodes.append(node)
            self.lmd.append(lm)
            if stack and stack[-1][1] == 1:
                stack[-1][2] = lm
        seen: dict[int, int] = {}
        for i, l in enumerate(self.lmd):
            seen[l] = i
        self.keyroots = sorted(seen.values())


def tree_edit_distance(t1: Optional[Node], t2: Optional[Node],
                       cm: CostModel = CostModel()) -> float:
    """Minimal edit-script cost turning ``t1`` into ``t2``.

    ``None`` stands for the empty tree.
    """
    if t1 is None and t2 is None:
        return 0.0
    if t1 is None:
        return cm.insert_cost * tree_size(t2)
    if t2 is None:
        return cm.delete_cost * tree_size(t1)

    a, b = _Annotated(t1), _Annotated(t2)
    n, m = len(a.nodes), len(b.nodes)
    td = [[0.0] * m for _ in range(n)]
    dele, ins, ren = cm.delete_cost, cm.insert_cost, cm.rename
    lmd1, lmd2 = a.lmd, b.lmd

    for i in a.keyroots:
        for j in b.keyroots:
            li, lj = lmd1[i], lmd2[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0.0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + dele
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + ins
            for x in range(1, rows):
                i1 = li + x - 1
                l_i1 = lmd1[i1]
                row, prev_row = fd[x], fd[x - 1]
                for y in range(1, cols):
                    j1 = lj + y - 1
                    if l_i1 == li and lmd2[j1] == lj:
                        v = min(
                            prev_row[y] + dele,
                            row[y - 1] + ins,
                            prev_row[y - 1] + ren(a.nodes[i1], b.nodes[j1]),
                        )
                        td[i1][j1] = v
                    else:
                        v = min(
                            prev_row[y] + dele,
                            row[y - 1] + ins,
                            fd[l_i1 - li][lmd2[j1] - lj] + td[i1][j1],
                        )
                    row[y] = v
    return td[n - 1][m - 1]
