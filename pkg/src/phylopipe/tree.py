"""Phylogenetic trees as parent-to-child edge lists, with Newick/Nexus I/O.

Named nodes are profiles and take ids ``0 .. n-1``; unnamed nodes are
synthesized ancestors with ids ``n`` and above. Profiles may have children
(spanning trees link profiles directly), so "named" does not mean "leaf".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, TextIO, Union

from .errors import ParseError
from .matrix import format_number


@dataclass(frozen=True)
class Edge:
    parent: int
    child: int
    length: float = 0.0

    def __post_init__(self):
        if self.parent == self.child:
            raise ValueError(f"edge from node {self.parent} to itself")


@dataclass
class Tree:
    names: dict[int, str]
    edges: list[Edge] = field(default_factory=list)
    root_length: Optional[float] = None

    def __post_init__(self):
        n = len(self.names)
        if set(self.names) != set(range(n)):
            raise ValueError("named nodes must use ids 0..n-1")
        parents: dict[int, int] = {}
        for e in self.edges:
            if e.child in parents:
                raise ValueError(f"node {e.child} has two parents")
            parents[e.child] = e.parent
        nodes = self.nodes
        for node in nodes:
            if node >= n and node not in parents and not any(e.parent == node for e in self.edges):
                raise ValueError(f"unnamed node {node} is isolated")
        if self.edges and len(self.edges) != len(nodes) - 1:
            raise ValueError("edges do not form a tree")
        if not self.edges and n != 1:
            raise ValueError("a tree without edges must have exactly one node")
        roots = [v for v in nodes if v not in parents]
        if len(roots) != 1:
            raise ValueError(f"expected one root, found {len(roots)}")
        # every node must reach the root without revisiting
        for start in nodes:
            seen = set()
            v = start
            while v in parents:
                if v in seen:
                    raise ValueError("edges contain a cycle")
                seen.add(v)
                v = parents[v]

    @property
    def nodes(self) -> set[int]:
        out = set(self.names)
        for e in self.edges:
            out.add(e.parent)
            out.add(e.child)
        return out

    @property
    def root(self) -> int:
        children = {e.child for e in self.edges}
        if not self.edges:
            return next(iter(self.names))
        return next(e.parent for e in self.edges if e.parent not in children)

    def children(self) -> dict[int, list[Edge]]:
        out: dict[int, list[Edge]] = {v: [] for v in self.nodes}
        for e in self.edges:
            out[e.parent].append(e)
        return out

    @property
    def total_length(self) -> float:
        return sum(e.length for e in self.edges)

    def __len__(self) -> int:
        return len(self.names)


_PLAIN_NAME = re.compile(r"[^\s()\[\]':;,]+")


def _quote(name: str) -> str:
    if _PLAIN_NAME.fullmatch(name):
        return name
    return "'" + name.replace("'", "''") + "'"


def write_newick(tree: Tree) -> str:
    """Canonical Newick text, terminated by ``;``.

    Children are ordered by the smallest profile name in their subtree and
    zero lengths are left out, so equal trees always give equal text.
    """
    children = tree.children()
    order = _postorder(tree.root, children)
    smallest: dict[int, str] = {}
    for v in order:
        candidates = [smallest[e.child] for e in children[v]]
        if v in tree.names:
            candidates.append(tree.names[v])
        smallest[v] = min(candidates)
    text: dict[int, str] = {}
    for v in order:
        kids = sorted(children[v], key=lambda e: smallest[e.child])
        parts = []
        for e in kids:
            part = text.pop(e.child)
            if e.length != 0:
                part += ":" + format_number(e.length)
            parts.append(part)
        label = _quote(tree.names[v]) if v in tree.names else ""
        text[v] = ("(" + ",".join(parts) + ")" if parts else "") + label
    out = text[tree.root]
    if tree.root_length is not None:
        out += ":" + format_number(tree.root_length)
    return out + ";"


def _postorder(root: int, children: dict[int, list[Edge]]) -> list[int]:
    out = []
    stack = [root]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(e.child for e in children[v])
    out.reverse()
    return out


_TOKEN = re.compile(r"\s*(?:(?P<punct>[(),:;])|'(?P<quoted>(?:[^']|'')*)'|(?P<bare>[^\s()\[\]':;,]+))")


class _Node:
    __slots__ = ("parent", "children", "name", "length")

    def __init__(self, parent=None):
        self.parent = parent
        self.children = []
        self.name = None
        self.length = None


def read_newick(source: Union[str, TextIO]) -> Tree:
    """Parse one Newick tree.

    The closing ``;`` is optional. Missing lengths read as 0, a length on
    the root becomes ``Tree.root_length``, and named internal nodes are kept
    as profiles.
    """
    text = source if isinstance(source, str) else source.read()
    root = cur = _Node()
    named: list[_Node] = []
    pos = 0
    done = False
    expect_length = False
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            if rest:
                raise ParseError(f"unexpected text in Newick at offset {pos}: {rest[:20]!r}")
            break
        pos = m.end()
        if done:
            raise ParseError("text after the closing ';'")
        punct = m.group("punct")
        label = m.group("bare") if m.group("quoted") is None else m.group("quoted").replace("''", "'")
        if expect_length:
            if punct is not None or m.group("quoted") is not None:
                raise ParseError("':' must be followed by a branch length")
            try:
                cur.length = float(label)
            except ValueError:
                raise ParseError(f"malformed branch length {label!r}") from None
            expect_length = False
            continue
        if punct == "(":
            if cur.children or cur.name is not None or cur.length is not None:
                raise ParseError("'(' in an unexpected position")
            child = _Node(cur)
            cur.children.append(child)
            cur = child
        elif punct == ",":
            if cur.parent is None:
                raise ParseError("',' outside of parentheses")
            cur = _Node(cur.parent)
            cur.parent.children.append(cur)
        elif punct == ")":
            if cur.parent is None:
                raise ParseError("unbalanced ')'")
            cur = cur.parent
        elif punct == ":":
            if cur.length is not None:
                raise ParseError("branch length given twice")
            expect_length = True
        elif punct == ";":
            done = True
        else:
            if cur.name is not None or cur.length is not None:
                raise ParseError(f"unexpected label {label!r}")
            cur.name = label
            named.append(cur)
    if expect_length:
        raise ParseError("missing branch length after ':'")
    if cur is not root:
        raise ParseError("unbalanced '(' in Newick")
    return _to_tree(root, named)


def _to_tree(root: _Node, named: list[_Node]) -> Tree:
    ids: dict[int, int] = {}
    names: dict[int, str] = {}
    seen_names = set()
    for node in named:
        if node.name in seen_names:
            raise ParseError(f"duplicate node name {node.name!r}")
        seen_names.add(node.name)
        ids[id(node)] = len(names)
        names[len(names)] = node.name
    next_id = len(names)
    edges = []
    # post-order so synthesized ids grow from the tips towards the root
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            if not node.children and node.name is None:
                raise ParseError("leaf without a name (empty branch)")
            stack.append((node, True))
            stack.extend((c, False) for c in reversed(node.children))
            continue
        if id(node) not in ids:
            ids[id(node)] = next_id
            next_id += 1
        for c in node.children:
            edges.append(Edge(ids[id(node)], ids[id(c)], c.length or 0.0))
    return Tree(names, edges, root.length)


_TREES_BLOCK = re.compile(r"begin\s+trees\s*;(.*?)end\s*;", re.IGNORECASE | re.DOTALL)
_TREE_STATEMENT = re.compile(r"\btree\s+\*?\s*[^=;]*=\s*([^;]*;)", re.IGNORECASE)


def read_nexus(source: Union[str, TextIO]) -> Tree:
    """Parse the first tree statement of a Nexus TREES block."""
    text = source if isinstance(source, str) else source.read()
    block = _TREES_BLOCK.search(text)
    if block is None:
        raise ParseError("Nexus input has no TREES block")
    statement = _TREE_STATEMENT.search(block.group(1))
    if statement is None:
        raise ParseError("Nexus TREES block has no tree statement")
    return read_newick(statement.group(1))


def write_nexus(tree: Tree) -> str:
    labels = " ".join(_quote(tree.names[i]) for i in range(len(tree.names)))
    return (
        "#NEXUS\n"
        "BEGIN TAXA;\n"
        f"    Dimensions NTax={len(tree.names)};\n"
        f"    TaxLabels {labels};\n"
        "END;\n"
        "\n"
        "BEGIN TREES;\n"
        f"    Tree tree={write_newick(tree)}\n"
        "END;\n"
    )


READERS = {"newick": read_newick, "nexus": read_nexus}
WRITERS = {"newick": write_newick, "nexus": write_nexus}
