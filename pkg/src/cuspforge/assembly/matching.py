"""Blocks, matched truncations and assembled truncation plans.

Two truncated cusps are glued along their boundary cross-sections, which
must be isometric. A block scaled by the length factor ``s`` whose cusp has
profile ``f`` has boundary cross-section metric ``(2 s f(T))^2 / (1-r^2)^2
* sum dx_i^2`` at depth ``T``; on an exponential tail ``f = C e^{-t}`` this
forces ``s_u e^{-T_u} = s_v e^{-T_v}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..cusps import CuspModel, cusp_volume
from ..errors import TailError
from ..profiles import ProfileFunction, make_decay_profile
from .graphs import GraphPlan
from .schedules import ScaleSchedule

CHORD_RATIO = 1.5
TAIL_SLACK = 1e-12


def boundary_coefficient(profile: ProfileFunction, T: float, scale: float) -> float:
    """Conformal size ``2 * scale * f(T)`` of the boundary cross-section at depth ``T``."""
    return 2.0 * scale * profile(T)


def matching_truncation(
    scale_u: float,
    scale_v: float,
    T_v: float,
    *,
    profile_u: ProfileFunction | None = None,
    tail_start: float | None = None,
) -> float:
    """Depth ``T_u`` at which the ``u`` side matches the ``v`` side at ``T_v``.

    ``T_u = T_v + ln(scale_u / scale_v)`` where scales are length factors.

    Raises
    ------
    TailError
        If ``T_u`` falls before the exponential tail of ``profile_u`` (or
        before ``tail_start`` when given directly).
    """
    if not (scale_u > 0 and scale_v > 0):
        raise ValueError("scales must be positive")
    T_u = T_v + math.log(scale_u / scale_v)
    start = tail_start
    if start is None and profile_u is not None:
        start = profile_u.exp_tail_start()
        if start is None:
            raise TailError("profile has no exponential tail")
    if start is not None and T_u < start:
        # a depth chosen as start + shift comes back a few ulps short
        if start - T_u > TAIL_SLACK * max(1.0, abs(start)):
            raise TailError(f"matched depth T_u={T_u!r} lies before the exponential tail at {start!r}")
        T_u = start
    return T_u


@dataclass(frozen=True)
class Port:
    """A cusp end of a block.

    ``offset`` is the distance from the block basepoint to the start ``a``
    of the cusp, so the port length at truncation depth ``T`` is
    ``offset + (T - a)``.
    """

    profile: ProfileFunction
    a: float
    offset: float

    def length(self, T: float) -> float:
        return self.offset + (T - self.a)

    @property
    def tail_start(self) -> float:
        s = self.profile.exp_tail_start()
        if s is None:
            raise TailError("port profile has no exponential tail")
        return s


@dataclass(frozen=True)
class BlockTemplate:
    """Compact core plus cusp ports, in unscaled units."""

    n: int
    ports: dict[str, Port]
    interior_volume: float
    diameter: float
    cross_section_volume: float = 1.0

    def __post_init__(self):
        if self.diameter < 1:
            raise ValueError("block interior diameter must be at least 1")
        if any(p.offset <= 0 for p in self.ports.values()):
            raise ValueError("port offsets must be positive")

    @classmethod
    def standard(
        cls,
        port_names: tuple[str, ...] = ("L", "R", "C"),
        n: int = 3,
        a: float = -1.0,
        offset: float = 1.0,
        interior_volume: float = 1.0,
        cross_section_volume: float = 1.0,
    ) -> "BlockTemplate":
        f = make_decay_profile(a, "exponential")
        ports = {name: Port(f, a, offset) for name in port_names}
        return cls(n, ports, interior_volume, max(1.0, 2 * offset), cross_section_volume)

    def volume(self) -> float:
        """Volume with every cusp left untruncated (an upper bound for any truncation)."""
        parts = [self.interior_volume]
        for p in self.ports.values():
            parts.append(cusp_volume(CuspModel(self.n, self.cross_section_volume, p.profile, p.a)).value)
        return math.fsum(parts)


@dataclass(frozen=True)
class GluedEdge:
    u: object
    v: object
    port_u: str
    port_v: str
    T_u: float
    T_v: float
    scale_u: float
    scale_v: float


@dataclass
class TruncationPlan:
    """Per-vertex scales, per-edge truncation depths and the derived port lengths."""

    graph: GraphPlan
    block: BlockTemplate
    scales: dict = field(default_factory=dict)
    edges: list[GluedEdge] = field(default_factory=list)
    port_depths: dict = field(default_factory=dict)

    def port_length(self, v, port: str) -> float:
        return self.block.ports[port].length(self.port_depths[(v, port)])

    def matching_residual(self) -> float:
        """Largest relative mismatch of glued boundary coefficients."""
        worst = 0.0
        for e in self.edges:
            cu = boundary_coefficient(self.block.ports[e.port_u].profile, e.T_u, e.scale_u)
            cv = boundary_coefficient(self.block.ports[e.port_v].profile, e.T_v, e.scale_v)
            worst = max(worst, abs(cu - cv) / max(abs(cu), abs(cv)))
        return worst

    def chord_vertices(self) -> list:
        """Vertices whose three ports L, R, C are all glued."""
        out = []
        for v in self.scales:
            if all((v, p) in self.port_depths for p in ("L", "R", "C")):
                out.append(v)
        return out

    def chord_inequalities(self) -> list[tuple[object, float, float, float, bool]]:
        """``(v, l(A), l(B), l(C), ok)`` with ``ok`` for ``l(A)+l(B) < l(C) < 2(l(A)+l(B))``."""
        rows = []
        for v in self.chord_vertices():
            la, lb, lc = (self.port_length(v, p) for p in ("L", "R", "C"))
            rows.append((v, la, lb, lc, la + lb < lc < 2 * (la + lb)))
        return rows


def _edge_ports(graph: GraphPlan, v, w) -> tuple[str, str]:
    if graph.kind in ("line", "chord"):
        if w == v + 1:
            return "R", "L"
        if w == v - 1:
            return "L", "R"
        return "C", "C"
    if len(w) == len(v) + 1:
        ch = w[-1]
        back = ch if graph.kind == "trivalent-tree" else ch.swapcase()
        return ch, back
    ch = v[-1]
    back = ch if graph.kind == "trivalent-tree" else ch.swapcase()
    return back, ch


def plan_assembly(
    graph: GraphPlan,
    schedule: ScaleSchedule,
    block: BlockTemplate,
    depth: int,
    T_base: float | None = None,
) -> TruncationPlan:
    """Matched truncations for every edge within ``depth`` of the base vertex.

    Across an edge joining levels ``k`` and ``k+1`` the outer (smaller)
    block's cusp is matched from the inner one, whose depth is raised if
    necessary so the matched depth stays in the exponential tail. Chords
    join equal levels; their common depth is chosen so that
    ``l(C) = 1.5 (l(A) + l(B))``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    plan = TruncationPlan(graph, block)
    edges = graph.edges_to_depth(depth)
    for v, w in edges:
        for x in (v, w):
            plan.scales.setdefault(x, schedule.length_factor(graph.distance(x)))
    needed = {e[0] for e in edges} | {e[1] for e in edges}
    for x in needed:
        plan.scales.setdefault(x, schedule.length_factor(graph.distance(x)))
    chords = []
    for v, w in edges:
        pv, pw = _edge_ports(graph, v, w)
        if pv == "C":
            chords.append((v, w))
            continue
        sv, sw = plan.scales[v], plan.scales[w]
        # put v on the larger-scale (inner) side
        if sw > sv:
            v, w, pv, pw, sv, sw = w, v, pw, pv, sw, sv
        port_v, port_w = block.ports[pv], block.ports[pw]
        base = port_v.tail_start if T_base is None else T_base
        T_v = max(base, port_v.tail_start, port_w.tail_start + math.log(sv / sw))
        T_w = matching_truncation(sw, sv, T_v, tail_start=port_w.tail_start)
        plan.edges.append(GluedEdge(v, w, pv, pw, T_v, T_w, sv, sw))
        plan.port_depths[(v, pv)] = T_v
        plan.port_depths[(w, pw)] = T_w
    for v, w in chords:
        port = block.ports["C"]
        need = []
        for x in (v, w):
            la = plan.port_length(x, "L") if (x, "L") in plan.port_depths else block.ports["L"].length(port.tail_start)
            lb = plan.port_length(x, "R") if (x, "R") in plan.port_depths else block.ports["R"].length(port.tail_start)
            need.append(CHORD_RATIO * (la + lb))
        target = max(need)
        T = max(port.a + target - port.offset, port.tail_start)
        sv, sw = plan.scales[v], plan.scales[w]
        T_w = matching_truncation(sw, sv, T, tail_start=port.tail_start)
        plan.edges.append(GluedEdge(v, w, "C", "C", T, T_w, sv, sw))
        plan.port_depths[(v, "C")] = T
        plan.port_depths[(w, "C")] = T_w
    return plan
