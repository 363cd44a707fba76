"""Directed-acyclic taxonomy of hypernym -> hyponym edges.

Terms are NFC-normalized strings. Multiple parents are allowed; acyclicity is
enforced on every insertion. Structural queries (parents, children, ancestors,
descendants, siblings) back negative sampling, and longest-path level order
drives top-down expansion so parents are always processed before children.
"""

from __future__ import annotations

import unicodedata
from collections import deque

from .errors import CycleError, ParseError, SelfLoopError, UnknownTermError

RELATIVE_KINDS = ("parents", "children", "ancestors", "descendants", "siblings")


def _norm(term: str) -> str:
    return unicodedata.normalize("NFC", term)


class Taxonomy:
    """A DAG over term strings with edge set semantics."""

    def __init__(self):
        self._parents: dict[str, set[str]] = {}
        self._children: dict[str, set[str]] = {}

    # --- construction ---

    def add_node(self, term: str) -> str:
        term = _norm(term)
        if term not in self._parents:
            self._parents[term] = set()
            self._children[term] = set()
        return term

    def add_edge(self, hyper: str, hypo: str) -> None:
        hyper, hypo = _norm(hyper), _norm(hypo)
        if hyper == hypo:
            raise SelfLoopError(f"self-loop on {hyper!r}")
        if hyper in self._children and hypo in self._children:
            if hypo in self._children[hyper]:
                return  # idempotent
            if self._reaches(hypo, hyper):
                raise CycleError(f"edge ({hyper!r}, {hypo!r}) would close a cycle")
        self.add_node(hyper)
        self.add_node(hypo)
        self._children[hyper].add(hypo)
        self._parents[hypo].add(hyper)

    def _reaches(self, src: str, dst: str) -> bool:
        # BFS over children: is dst a descendant of src?
        seen = {src}
        queue = deque([src])
        while queue:
            node = queue.popleft()
            for child in self._children[node]:
                if child == dst:
                    return True
                if child not in seen:
                    seen.add(child)
                    queue.append(child)
        return False

    # --- queries ---

    @property
    def nodes(self) -> set[str]:
        return set(self._parents)

    @property
    def edges(self) -> set[tuple[str, str]]:
        return {(h, c) for h, kids in self._children.items() for c in kids}

    @property
    def roots(self) -> set[str]:
        return {n for n, ps in self._parents.items() if not ps}

    def __contains__(self, term: str) -> bool:
        return _norm(term) in self._parents

    def __len__(self) -> int:
        return len(self._parents)

    def has_edge(self, hyper: str, hypo: str) -> bool:
        hyper, hypo = _norm(hyper), _norm(hypo)
        return hyper in self._children and hypo in self._children[hyper]

    def _require(self, term: str) -> str:
        term = _norm(term)
        if term not in self._parents:
            raise UnknownTermError(f"unknown term {term!r}")
        return term

    def parents(self, term: str) -> set[str]:
        return set(self._parents[self._require(term)])

    def children(self, term: str) -> set[str]:
        return set(self._children[self._require(term)])

    def _closure(self, term: str, step: dict[str, set[str]]) -> set[str]:
        term = self._require(term)
        out: set[str] = set()
        queue = deque(step[term])
        while queue:
            node = queue.popleft()
            if node not in out:
                out.add(node)
                queue.extend(step[node])
        out.discard(term)
        return out

    def ancestors(self, term: str) -> set[str]:
        return self._closure(term, self._parents)

    def descendants(self, term: str) -> set[str]:
        return self._closure(term, self._children)

    def siblings(self, term: str) -> set[str]:
        term = self._require(term)
        out: set[str] = set()
        for p in self._parents[term]:
            out |= self._children[p]
        out.discard(term)
        return out

    def relatives(self, term: str, kind: str) -> set[str]:
        """Dispatch over the five structural relation kinds."""
        if kind not in RELATIVE_KINDS:
            raise ValueError(f"kind must be one of {RELATIVE_KINDS}, got {kind!r}")
        return getattr(self, kind)(term)

    def level_order_levels(self) -> list[list[str]]:
        """Nodes grouped by longest path length from any root.

        Level 0 holds the roots; a node sits at 1 + the max level of its
        parents, so every edge crosses at least one level boundary. Nodes
        within a level are sorted lexicographically.
        """
        level = {n: 0 for n in self.roots}
        indeg = {n: len(ps) for n, ps in self._parents.items()}
        queue = deque(sorted(level))
        while queue:
            node = queue.popleft()
            for child in self._children[node]:
                level[child] = max(level.get(child, 0), level[node] + 1)
                indeg[child] -= 1
                if indeg[child] == 0:
                    queue.append(child)
        if len(level) != len(self._parents):
            raise CycleError("taxonomy contains a cycle")  # defensive; mutations forbid this
        depth = max(level.values(), default=-1)
        out: list[list[str]] = [[] for _ in range(depth + 1)]
        for node, lv in level.items():
            out[lv].append(node)
        for bucket in out:
            bucket.sort()
        return out

    def copy(self) -> "Taxonomy":
        dup = Taxonomy()
        dup._parents = {n: set(ps) for n, ps in self._parents.items()}
        dup._children = {n: set(cs) for n, cs in self._children.items()}
        return dup


def load_edges(path) -> Taxonomy:
    """Read a taxonomy from a TSV of `hypernym<TAB>hyponym` lines.

    Blank lines and lines starting with '#' are ignored. Raises ParseError
    with the offending line number, or CycleError if the file encodes a cycle.
    """
    tax = Taxonomy()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ParseError(f"expected 'hypernym<TAB>hyponym', got {line!r}", line=lineno)
            tax.add_edge(parts[0], parts[1])
    return tax


def save_edges(tax: Taxonomy, path) -> None:
    """Write edges as sorted TSV; load_edges(save_edges(t)) preserves the edge set."""
    with open(path, "w", encoding="utf-8") as fh:
        for hyper, hypo in sorted(tax.edges):
            fh.write(f"{hyper}\t{hypo}\n")
