"""Causal DAGs: text format parsing, d-separation, and back-door identification.

The graph text format is line oriented: ``NAME;`` declares a node,
``A -> B;`` declares a directed edge, ``#`` starts a comment. Several
statements may share a line; every statement ends with a semicolon.
Node names match ``[A-Za-z_][A-Za-z0-9_]*``.

d-separation is decided with the linear-time reachability procedure
(ball-passing over ancestor-closed evidence); back-door verdicts
enumerate the offending open paths explicitly, which is what a user
needs to repair an adjustment set.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    DagCycleError,
    DagStructureError,
    DagSyntaxError,
    UnknownNodeError,
    ValidationError,
)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Dag:
    """Immutable directed acyclic graph over named nodes.

    Parameters
    ----------
    nodes : sequence of str
        Declared node names, order preserved.
    edges : sequence of (str, str)
        Directed (parent, child) pairs; endpoints must be declared nodes.

    Raises
    ------
    DagStructureError
        Duplicate nodes or edges, self loops, undeclared endpoints.
    DagCycleError
        If the edge set admits no topological order.
    """

    nodes: tuple
    edges: tuple
    _parents: dict = field(init=False, repr=False, compare=False)
    _children: dict = field(init=False, repr=False, compare=False)

    def __init__(self, nodes, edges):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "edges", tuple((str(a), str(b)) for a, b in edges))
        seen = set()
        for n in self.nodes:
            if n in seen:
                raise DagStructureError(f"duplicate node {n!r}")
            seen.add(n)
        parents = {n: [] for n in self.nodes}
        children = {n: [] for n in self.nodes}
        seen_edges = set()
        for a, b in self.edges:
            if a == b:
                raise DagStructureError(f"self loop on {a!r}")
            if a not in seen:
                raise DagStructureError(f"edge endpoint {a!r} is not a declared node")
            if b not in seen:
                raise DagStructureError(f"edge endpoint {b!r} is not a declared node")
            if (a, b) in seen_edges:
                raise DagStructureError(f"duplicate edge {a!r} -> {b!r}")
            seen_edges.add((a, b))
            children[a].append(b)
            parents[b].append(a)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)
        self._check_acyclic()

    def _check_acyclic(self):
        indeg = {n: len(self._parents[n]) for n in self.nodes}
        ready = deque(n for n in self.nodes if indeg[n] == 0)
        emitted = 0
        while ready:
            n = ready.popleft()
            emitted += 1
            for c in self._children[n]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    ready.append(c)
        if emitted != len(self.nodes):
            raise DagCycleError(self._find_cycle())

    def _find_cycle(self):
        # DFS for a back edge; only called when a cycle is known to exist.
        color = {n: 0 for n in self.nodes}  # 0 white, 1 on stack, 2 done
        stack = []

        def visit(start):
            path = [(start, iter(self._children[start]))]
            color[start] = 1
            stack.append(start)
            while path:
                node, it = path[-1]
                advanced = False
                for child in it:
                    if color[child] == 1:
                        i = stack.index(child)
                        return stack[i:] + [child]
                    if color[child] == 0:
                        color[child] = 1
                        stack.append(child)
                        path.append((child, iter(self._children[child])))
                        advanced = True
                        break
                if not advanced:
                    path.pop()
                    stack.pop()
                    color[node] = 2
            return None

        for n in self.nodes:
            if color[n] == 0:
                cycle = visit(n)
                if cycle is not None:
                    return cycle
        raise AssertionError("cycle reported but not found")

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return set(self.nodes) == set(other.nodes) and set(self.edges) == set(other.edges)

    def __hash__(self):
        return hash((frozenset(self.nodes), frozenset(self.edges)))

    def parents_of(self, node):
        self._require(node)
        return set(self._parents[node])

    def children_of(self, node):
        self._require(node)
        return set(self._children[node])

    def _require(self, node):
        if node not in self._parents:
            raise UnknownNodeError(node)


@dataclass(frozen=True)
class Implication:
    """A testable conditional-independence statement x _||_ y | cond."""

    x: str
    y: str
    cond: frozenset

    def __post_init__(self):
        if self.x == self.y:
            raise ValidationError("implication endpoints must differ")
        if self.x in self.cond or self.y in self.cond:
            raise ValidationError("implication endpoints cannot appear in cond")


@dataclass(frozen=True)
class Violation:
    """One reason a candidate back-door set is invalid."""

    kind: str  # "descendant_of_treatment" | "open_backdoor_path"
    node: str | None = None
    path: tuple = ()


@dataclass(frozen=True)
class BackdoorVerdict:
    valid: bool
    violations: tuple

    def __post_init__(self):
        if self.valid != (len(self.violations) == 0):
            raise ValidationError("verdict validity inconsistent with violations")


def parse_dag(text):
    """Parse graph text into a :class:`Dag`.

    Raises :class:`DagSyntaxError` with 1-based line/column on malformed
    input, and the structural errors of the ``Dag`` constructor otherwise.
    """
    nodes = []
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        hash_pos = raw.find("#")
        line = raw if hash_pos < 0 else raw[:hash_pos]
        pos = 0
        n = len(line)
        while True:
            while pos < n and line[pos].isspace():
                pos += 1
            if pos >= n:
                break
            m = _NAME_RE.match(line, pos)
            if m is None:
                raise DagSyntaxError(
                    f"expected node name, found {line[pos]!r}", lineno, pos + 1
                )
            first = m.group(0)
            pos = m.end()
            while pos < n and line[pos].isspace():
                pos += 1
            if pos < n and line.startswith("->", pos):
                pos += 2
                while pos < n and line[pos].isspace():
                    pos += 1
                m = _NAME_RE.match(line, pos)
                if m is None:
                    found = line[pos] if pos < n else "end of line"
                    raise DagSyntaxError(
                        f"expected node name after '->', found {found!r}",
                        lineno,
                        pos + 1,
                    )
                second = m.group(0)
                pos = m.end()
                while pos < n and line[pos].isspace():
                    pos += 1
                if pos >= n or line[pos] != ";":
                    raise DagSyntaxError("expected ';'", lineno, pos + 1)
                pos += 1
                edges.append((first, second))
            elif pos < n and line[pos] == ";":
                pos += 1
                nodes.append(first)
            else:
                raise DagSyntaxError("expected ';' or '->'", lineno, pos + 1)
    return Dag(nodes, edges)


def render_dag(dag):
    """Serialize a Dag back to the text format; parse(render(d)) == d."""
    lines = [f"{n};" for n in dag.nodes]
    lines += [f"{a} -> {b};" for a, b in dag.edges]
    return "\n".join(lines) + "\n"


def load_dag(path):
    with open(path, encoding="utf-8") as fh:
        return parse_dag(fh.read())


def descendants(dag, node):
    """All nodes reachable from ``node`` by one or more directed steps."""
    dag._require(node)
    out = set()
    frontier = deque(dag._children[node])
    while frontier:
        v = frontier.popleft()
        if v in out:
            continue
        out.add(v)
        frontier.extend(dag._children[v])
    return out


def ancestors(dag, node):
    dag._require(node)
    out = set()
    frontier = deque(dag._parents[node])
    while frontier:
        v = frontier.popleft()
        if v in out:
            continue
        out.add(v)
        frontier.extend(dag._parents[v])
    return out


def _reachable(dag, source, cond):
    """Nodes d-connected to ``source`` given evidence ``cond`` (ball passing).

    Direction "up" means the node was entered against an edge (from one of
    its children), "down" means along an edge (from a parent). Colliders
    pass the ball upward only when they are in ``cond`` or have a
    descendant there, i.e. are ancestors of the evidence set.
    """
    closure = set()
    frontier = deque(cond)
    while frontier:
        v = frontier.popleft()
        if v in closure:
            continue
        closure.add(v)
        frontier.extend(dag._parents[v])

    reached = set()
    visited = set()
    queue = deque([(source, "up")])
    while queue:
        v, direction = queue.popleft()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v not in cond:
            reached.add(v)
        if direction == "up":
            if v not in cond:
                for p in dag._parents[v]:
                    queue.append((p, "up"))
                for c in dag._children[v]:
                    queue.append((c, "down"))
        else:
            if v not in cond:
                for c in dag._children[v]:
                    queue.append((c, "down"))
            if v in closure:
                for p in dag._parents[v]:
                    queue.append((p, "up"))
    return reached


def d_separated(dag, x, y, cond=()):
    """True iff every path between ``x`` and ``y`` is blocked given ``cond``."""
    cond = set(cond)
    for v in (x, y, *cond):
        dag._require(v)
    if x == y:
        raise ValidationError("x and y must differ")
    if x in cond or y in cond:
        raise ValidationError("x and y cannot appear in the conditioning set")
    return y not in _reachable(dag, x, cond)


def _undirected_paths_into(dag, start, end):
    """Simple paths start..end whose first edge points INTO start.

    Yielded as node sequences; used for back-door path enumeration.
    """
    adj = {n: set(dag._parents[n]) | set(dag._children[n]) for n in dag.nodes}
    path = [start]
    on_path = {start}

    def extend(node, first):
        neighbors = dag._parents[node] if first else adj[node]
        for nxt in sorted(neighbors):
            if nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            if nxt == end:
                yield tuple(path)
            else:
                yield from extend(nxt, False)
            path.pop()
            on_path.remove(nxt)

    yield from extend(start, True)


def _path_blocked(dag, path, cond, desc_cache):
    edges_in = []  # edges_in[i]: True if the edge between path[i] and path[i+1] points into path[i+1]
    for a, b in zip(path, path[1:]):
        edges_in.append(b in dag._children[a])
    for i in range(1, len(path) - 1):
        v = path[i]
        is_collider = edges_in[i - 1] and not edges_in[i]
        if is_collider:
            if v not in desc_cache:
                desc_cache[v] = descendants(dag, v)
            if v not in cond and not (desc_cache[v] & cond):
                return True
        elif v in cond:
            return True
    return False


def is_valid_backdoor(dag, treatment, outcome, z):
    """Back-door criterion check for adjustment set ``z``.

    Valid iff ``z`` contains no descendant of the treatment and blocks
    every path from treatment to outcome that starts with an edge into
    the treatment. Violations list each offending node or open path.
    """
    z = set(z)
    for v in (treatment, outcome, *z):
        dag._require(v)
    if treatment == outcome:
        raise ValidationError("treatment and outcome must differ")
    violations = []
    desc_t = descendants(dag, treatment)
    for node in sorted(z & desc_t):
        violations.append(Violation(kind="descendant_of_treatment", node=node))
    desc_cache = {}
    for path in _undirected_paths_into(dag, treatment, outcome):
        if not _path_blocked(dag, path, z, desc_cache):
            violations.append(Violation(kind="open_backdoor_path", path=path))
    return BackdoorVerdict(valid=not violations, violations=tuple(violations))


def testable_implications(dag, max_cond_size):
    """Conditional-independence implications for every non-adjacent pair.

    Each pair (x, y) is conditioned on parents(x) | parents(y); pairs whose
    conditioning set exceeds ``max_cond_size`` are skipped, as are the rare
    candidates that the union convention fails to separate. Output is
    sorted lexicographically by (x, y).
    """
    if max_cond_size < 0:
        raise ValidationError("max_cond_size must be >= 0")
    adjacent = set()
    for a, b in dag.edges:
        adjacent.add((a, b))
        adjacent.add((b, a))
    out = []
    names = sorted(dag.nodes)
    for i, x in enumerate(names):
        for y in names[i + 1 :]:
            if (x, y) in adjacent:
                continue
            cond = (dag.parents_of(x) | dag.parents_of(y)) - {x, y}
            if len(cond) > max_cond_size:
                continue
            if d_separated(dag, x, y, cond):
                out.append(Implication(x=x, y=y, cond=frozenset(cond)))
    return out
