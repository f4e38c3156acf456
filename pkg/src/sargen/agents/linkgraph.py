"""Account-linking analysis: shared-attribute graph with union-find components."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..ingestion.model import CaseFile


class UnionFind:
    def __init__(self) -> None:
        self._parent: dict[str, str] = {}
        self._rank: dict[str, int] = {}

    def add(self, node: str) -> None:
        if node not in self._parent:
            self._parent[node] = node
            self._rank[node] = 0

    def find(self, node: str) -> str:
        root = node
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[node] != root:  # path compression
            self._parent[node], node = root, self._parent[node]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        if self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1


@dataclass(frozen=True)
class LinkEdge:
    a: str
    b: str
    attribute: str  # owner | shared_address | used_device | common_counterparty


@dataclass(frozen=True)
class LinkGraph:
    nodes: tuple[str, ...]  # "kind:id", sorted
    edges: tuple[LinkEdge, ...]
    components: tuple[tuple[str, ...], ...]  # connected-component partition

    def to_doc(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "edges": [{"a": e.a, "b": e.b, "attribute": e.attribute} for e in self.edges],
            "components": [list(c) for c in self.components],
        }

    def component_of(self, node: str) -> tuple[str, ...]:
        for component in self.components:
            if node in component:
                return component
        return ()


def link_accounts(case: CaseFile) -> LinkGraph:
    """Build the shared-attribute graph and its exact component partition."""
    uf = UnionFind()
    nodes: set[str] = set()
    edges: list[LinkEdge] = []

    def node(kind: str, ident: str) -> str:
        name = f"{kind}:{ident}"
        nodes.add(name)
        uf.add(name)
        return name

    def edge(a: str, b: str, attribute: str) -> None:
        if not any(e.a == a and e.b == b and e.attribute == attribute for e in edges):
            edges.append(LinkEdge(a, b, attribute))
            uf.union(a, b)

    for subject in case.subjects:
        s = node("subject", subject.id)
        for account_id in subject.account_ids:
            edge(s, node("account", account_id), "owner")
    for account in case.accounts:
        a = node("account", account.id)
        for event in account.events:
            device = event.metadata.get("device_id")
            if isinstance(device, str) and device:
                edge(a, node("device", device), "used_device")
    for txn in case.transactions:
        if txn.account_id is not None:
            edge(node("account", txn.account_id), node("counterparty", txn.counterparty_id),
                 "common_counterparty")
    by_address: dict[str, list[str]] = {}
    for subject in case.subjects:
        by_address.setdefault(subject.address.strip().lower(), []).append(subject.id)
    for shared in by_address.values():
        for first, second in zip(shared, shared[1:]):
            edge(f"subject:{first}", f"subject:{second}", "shared_address")

    groups: dict[str, list[str]] = {}
    for name in sorted(nodes):
        groups.setdefault(uf.find(name), []).append(name)
    components = tuple(tuple(group) for group in sorted(groups.values(), key=lambda g: g[0]))
    edges.sort(key=lambda e: (e.a, e.b, e.attribute))
    return LinkGraph(nodes=tuple(sorted(nodes)), edges=tuple(edges), components=components)
