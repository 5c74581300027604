"""Graph algorithms over the netlist: SCCs, FF projection, FSM candidates.

The FSM detector scores the strongly connected components of the FF-to-FF
projection. Cross-coupling density is the primary separator between genuine
state machines and ripple-style counters: counter bits only ever depend on
lower bits, so their projection is triangular and scores near zero, while
transition logic synthesized from a state graph couples almost every pair of
state bits in both directions. The scoring weights are original to this
workbench and are exposed for experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from . import model

# Combinational path search bound; beyond this a cone is abandoned (and the
# lint pass warns that bounded searches stop early).
MAX_COMB_DEPTH = model.MAX_COMB_DEPTH

DEFAULT_WEIGHTS: dict[str, float] = {
    "cross_coupling": 0.5,
    "cone_sharing": 0.3,
    "size_fit": 0.2,
}

SIZE_BAND = (2, 8)


@dataclass
class GateGraph:
    nodes: list[int]
    succ: dict[int, set[int]]

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in sorted(self.succ) for v in sorted(self.succ[u])]


def build_graph(netlist: model.Netlist) -> GateGraph:
    """One node per gate; u->v iff u's output net has v as a sink."""
    succ: dict[int, set[int]] = {gid: set() for gid in netlist.gates}
    for g in netlist.gates.values():
        out = g.pins.get(model.output_pin(g.gate_type))
        if out is None:
            continue
        for sink_gid, _pin in netlist.nets[out].sinks:
            succ[g.id].add(sink_gid)
    return GateGraph(nodes=sorted(netlist.gates), succ=succ)


def scc(succ: Mapping[int, Iterable[int]],
        nodes: Optional[Iterable[int]] = None,
        ) -> tuple[list[frozenset[int]], dict[int, set[int]]]:
    """Maximal strongly connected components plus the condensation DAG.

    Returns components ordered by smallest member, and condensation edges
    as component-index adjacency. Iterative Tarjan, so arbitrarily deep
    graphs are fine.
    """
    node_list = sorted(nodes) if nodes is not None else sorted(succ)
    node_set = set(node_list)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = 0
    components: list[frozenset[int]] = []

    for root in node_list:
        if root in index:
            continue
        work: list[tuple[int, Optional[int], object]] = [(root, None, None)]
        while work:
            node, parent, it = work.pop()
            if it is None:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
                it = iter(sorted(v for v in succ.get(node, ()) if v in node_set))
            advanced = False
            for child in it:
                if child not in index:
                    work.append((node, parent, it))
                    work.append((child, node, None))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                components.append(frozenset(comp))
            if parent is not None:
                low[parent] = min(low[parent], low[node])

    components.sort(key=min)
    comp_of = {v: i for i, comp in enumerate(components) for v in comp}
    cond: dict[int, set[int]] = {i: set() for i in range(len(components))}
    for u in node_list:
        for v in succ.get(u, ()):
            if v in node_set and comp_of[u] != comp_of[v]:
                cond[comp_of[u]].add(comp_of[v])
    return components, cond


def ff_projection(netlist: model.Netlist) -> dict[int, set[int]]:
    """Edge f->g iff a purely combinational path runs from f.Q to g.D.

    A direct Q-to-D wire counts as the empty path. Paths longer than
    MAX_COMB_DEPTH gates are abandoned (pathological inputs only).
    """
    ffs = [g.id for g in netlist.gates.values() if g.gate_type == "FF"]
    proj: dict[int, set[int]] = {f: set() for f in ffs}
    for f in ffs:
        start = netlist.gates[f].pins["Q"]
        seen_nets = {start}
        frontier: list[tuple[int, int]] = [(start, 0)]
        while frontier:
            nid, depth = frontier.pop()
            for sink_gid, pin in netlist.nets[nid].sinks:
                sink = netlist.gates[sink_gid]
                if sink.gate_type == "FF":
                    if pin == "D":
                        proj[f].add(sink_gid)
                    continue
                if depth >= MAX_COMB_DEPTH:
                    continue
                out = sink.pins.get(model.output_pin(sink.gate_type))
                if out is not None and out not in seen_nets:
                    seen_nets.add(out)
                    frontier.append((out, depth + 1))
    return proj


def combinational_cone(netlist: model.Netlist, net_id: int,
                       ) -> tuple[set[int], set[int]]:
    """Gates and frontier nets of the combinational cone driving a net.

    The frontier holds nets that stop the walk: FF outputs, primary inputs,
    and undriven nets.
    """
    gates: set[int] = set()
    frontier: set[int] = set()
    seen: set[int] = set()
    stack = [net_id]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        drv = netlist.nets[nid].driver
        if drv is None or netlist.gates[drv[0]].gate_type == "FF":
            frontier.add(nid)
            continue
        gates.add(drv[0])
        for dep in netlist.gate_input_nets(drv[0]):
            stack.append(dep)
    return gates, frontier


@dataclass
class FsmCandidate:
    ff_ids: frozenset[int]
    score: float
    evidence: dict[str, float] = field(default_factory=dict)

    def to_obj(self) -> dict:
        return {
            "ff_ids": sorted(self.ff_ids),
            "score": round(self.score, 6),
            "evidence": {k: round(v, 6) for k, v in sorted(self.evidence.items())},
        }


def _size_fit(n: int) -> float:
    lo, hi = SIZE_BAND
    if lo <= n <= hi:
        return 1.0
    dist = lo - n if n < lo else n - hi
    return 1.0 / (1.0 + dist)


def fsm_candidates(netlist: model.Netlist,
                   weights: Optional[Mapping[str, float]] = None,
                   ) -> list[FsmCandidate]:
    """Ranked FSM candidates: feedback components of the FF projection.

    Candidates are the non-singleton SCCs plus self-loop singletons. Score =
    weighted sum of cross-coupling density, mean pairwise Jaccard similarity
    of the next-state cone frontiers, and closeness of the member count to
    the plausible state-register band.
    """
    w = dict(DEFAULT_WEIGHTS)
    if weights:
        w.update(weights)
    proj = ff_projection(netlist)
    if not proj:
        return []
    comps, _cond = scc(proj)

    cone_cache: dict[int, frozenset[int]] = {}

    def cone_inputs(ff: int) -> frozenset[int]:
        if ff not in cone_cache:
            d_net = netlist.gates[ff].pins["D"]
            _gates, frontier = combinational_cone(netlist, d_net)
            cone_cache[ff] = frozenset(frontier)
        return cone_cache[ff]

    out: list[FsmCandidate] = []
    for comp in comps:
        members = sorted(comp)
        n = len(members)
        if n == 1 and members[0] not in proj[members[0]]:
            continue
        internal = sum(1 for f in members for g in proj[f]
                       if g in comp and g != f)
        self_loops = sum(1 for f in members if f in proj[f])
        cross = internal / (n * (n - 1)) if n > 1 else 0.0
        if n > 1:
            sims = []
            for i, f in enumerate(members):
                for g in members[i + 1:]:
                    a, b = cone_inputs(f), cone_inputs(g)
                    union = a | b
                    sims.append(len(a & b) / len(union) if union else 1.0)
            sharing = sum(sims) / len(sims)
        else:
            sharing = 0.0
        fit = _size_fit(n)
        evidence = {
            "cross_coupling": cross,
            "cross_coupling_count": float(internal),
            "feedback_density": (internal + self_loops) / (n * n),
            "cone_sharing": sharing,
            "size_fit": fit,
            "members": float(n),
        }
        score = (w["cross_coupling"] * cross
                 + w["cone_sharing"] * sharing
                 + w["size_fit"] * fit)
        out.append(FsmCandidate(ff_ids=frozenset(members), score=score,
                                evidence=evidence))
    out.sort(key=lambda c: (-c.score, min(c.ff_ids)))
    return out


def candidate_report(candidates: list[FsmCandidate]) -> list[dict]:
    return [c.to_obj() for c in candidates]
