"""Coverage graph construction and barrier counting.

A barrier is a vertex-disjoint simple cycle of linked sensors whose polygon
winds once around the region center. Counting disjoint barriers works on the
disk cut open along a ray from the center: a cycle's winding number equals
its signed crossing count of that ray, so cycles winding once are exactly
the cycles that cross the severed ray a net single time.

Two bounds are computed per cut. Lower: an actual packing of winding cycles,
built by closing crossing edges into rings with shortest ray-free return
paths, peeling inward-out and outward-in. Upper: the max-flow of the severed
network (every winding cycle contains a crossing-free segment between two
same-direction crossings, which becomes a source-to-sink path), and
floor(n/3). When the bounds meet the count is certified exact and the packing
is returned as the witness; when no tried ray closes the gap the best packing
found is returned, uncertified.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .deployment import SensorField
from .errors import BruteForceBudgetError, DegenerateGeometryError, ValidationError

# Geometry degenerate below this scale: sensors at the center, edges through it.
_CENTER_EPS = 1e-9
# Angular clearance required between the cut ray and any sensor direction.
_RAY_EPS = 1e-9
_BRUTE_FORCE_MAX_SENSORS = 14
_BRUTE_FORCE_MAX_STEPS = 10_000_000
# Cut rays retried when the bounds do not meet: every sector midpoint on
# small graphs, a spread sample on mid-size ones, a handful when the graph is
# large enough that extra rays rarely move either bound.
_RETRY_ALL_BELOW = 24
_MAX_RETRY_ANGLES = 16
_DENSE_VERTEX_LIMIT = 100
_DENSE_MAX_ANGLES = 3


def is_covered(point, sensor, sensing_range_m: float) -> bool:
    """Binary sensing: inside or on the sensing circle counts as covered."""
    p = np.asarray(point, dtype=np.float64)
    s = np.asarray(sensor, dtype=np.float64)
    return bool(np.hypot(*(p - s)) <= sensing_range_m)


@dataclass(frozen=True)
class CoverageGraph:
    """Undirected sensor-link graph annotated with cut-ray crossing signs.

    crossing_sign[e] describes edge (i, j) traversed i -> j against the ray
    at cut_angle: +1 counterclockwise crossing, -1 clockwise, 0 no crossing.
    Edges passing within 1e-9 m of the center are never tagged as crossing.
    """

    positions: np.ndarray  # (n, 2)
    center: tuple[float, float]
    link_threshold: float
    edges: np.ndarray  # (m, 2) int64, i < j
    crossing_sign: np.ndarray  # (m,) int8
    cut_angle: float

    def __post_init__(self):
        for name in ("positions", "edges", "crossing_sign"):
            arr = np.asarray(getattr(self, name))
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def vertex_count(self) -> int:
        return int(self.positions.shape[0])

    @property
    def edge_count(self) -> int:
        return int(self.edges.shape[0])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("i,j,crossing_sign\n")
            for (i, j), s in zip(self.edges, self.crossing_sign):
                fh.write(f"{i},{j},{s}\n")


@dataclass(frozen=True)
class BarrierCount:
    """Barrier count with its packing witness.

    witness always holds k vertex-disjoint cycles (index lists in traversal
    order), each winding exactly once around the center; they are the
    packing that realizes k. certified is True when k provably equals the
    maximum (the packing met an upper bound); False means k is the best
    packing any tried cut ray produced and the true maximum could be larger.
    """

    k: int
    witness: list[list[int]] | None
    cut_angle: float
    certified: bool = True


def _center_clearance(positions: np.ndarray, center: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Distance from the center to each edge segment."""
    a = positions[edges[:, 0]] - center
    b = positions[edges[:, 1]] - center
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.zeros(len(edges))
    nz = denom > 0
    t[nz] = -np.einsum("ij,ij->i", a[nz], ab[nz]) / denom[nz]
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[:, None] * ab
    return np.hypot(closest[:, 0], closest[:, 1])


def _crossing_signs(
    positions: np.ndarray,
    center: np.ndarray,
    edges: np.ndarray,
    angle: float,
    excluded: np.ndarray,
) -> np.ndarray:
    """Tag each edge with its signed crossing of the ray at ``angle``."""
    if len(edges) == 0:
        return np.zeros(0, dtype=np.int8)
    d = np.array([np.cos(angle), np.sin(angle)])
    rel = positions - center
    side = d[0] * rel[:, 1] - d[1] * rel[:, 0]
    along = rel @ d
    si = side[edges[:, 0]]
    sj = side[edges[:, 1]]
    crosses_line = si * sj < 0.0
    t = np.zeros(len(edges))
    t[crosses_line] = si[crosses_line] / (si[crosses_line] - sj[crosses_line])
    hit = along[edges[:, 0]] + t * (along[edges[:, 1]] - along[edges[:, 0]])
    on_ray = crosses_line & (hit > 0.0)
    signs = np.zeros(len(edges), dtype=np.int8)
    signs[on_ray & (si < 0.0)] = 1
    signs[on_ray & (si > 0.0)] = -1
    signs[excluded] = 0
    return signs


def _sector_angles(positions: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Ray directions clear of every sensor, one per angular sector.

    Crossing patterns only change when the cut line sweeps past a sensor
    direction, so midpoints of the gaps between sensor directions (mod pi,
    the line's period) cover all combinatorially distinct rays.
    """
    rel = positions - center
    dirs = np.sort(np.unique(np.mod(np.arctan2(rel[:, 1], rel[:, 0]), np.pi)))
    if len(dirs) == 0:
        return np.array([0.0])
    gaps_start = dirs
    gaps_end = np.append(dirs[1:], dirs[0] + np.pi)
    widths = gaps_end - gaps_start
    mids = (gaps_start + gaps_end) / 2.0
    return mids[widths > 4.0 * _RAY_EPS]


def _pick_annotation_angle(positions: np.ndarray, center: np.ndarray) -> float:
    """+x ray when it is clear of sensors, else the nearest sector midpoint."""
    rel = positions - center
    if len(rel) == 0:
        return 0.0
    dirs = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), np.pi)
    clearance = np.minimum(dirs, np.pi - dirs)
    if float(clearance.min()) > _RAY_EPS:
        return 0.0
    mids = _sector_angles(positions, center)
    shifted = np.minimum(mids, np.pi - mids)
    return float(mids[np.argmin(shifted)])


def build_coverage_graph(field: SensorField) -> CoverageGraph:
    """Link sensors within min(2*sensing, tx) of each other, tag ray crossings."""
    positions = np.asarray(field.positions, dtype=np.float64)
    center = np.asarray(field.region.center, dtype=np.float64)
    n = len(positions)

    rel = positions - center
    radii = np.hypot(rel[:, 0], rel[:, 1])
    if n and float(radii.min()) < _CENTER_EPS:
        raise DegenerateGeometryError(
            f"sensor {int(np.argmin(radii))} lies at the region center; winding undefined"
        )

    threshold = min(2.0 * field.sensing_range_m, field.tx_range_m)
    if n >= 2:
        diff = positions[:, None, :] - positions[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        iu, ju = np.triu_indices(n, k=1)
        linked = d2[iu, ju] <= threshold**2
        edges = np.column_stack((iu[linked], ju[linked])).astype(np.int64)
    else:
        edges = np.zeros((0, 2), dtype=np.int64)

    excluded = (
        _center_clearance(positions, center, edges) <= _CENTER_EPS
        if len(edges)
        else np.zeros(0, dtype=bool)
    )
    angle = _pick_annotation_angle(positions, center)
    signs = _crossing_signs(positions, center, edges, angle, excluded)
    return CoverageGraph(
        positions=positions,
        center=(float(center[0]), float(center[1])),
        link_threshold=float(threshold),
        edges=edges,
        crossing_sign=signs,
        cut_angle=angle,
    )


def _severed_flow_value(graph: CoverageGraph, signs: np.ndarray) -> int:
    """Upper bound on the packing from the graph severed along the ray.

    Sensors become in/out node pairs with unit capacity; crossing edges are
    cut out, their tails wired to the sink and their heads to the source, so
    any packing of winding cycles induces that many disjoint source-to-sink
    paths. The bound is loose on dense graphs (nothing forces a flow unit
    back to the edge it left on), which is why it is only ever used as a
    ceiling for certification.
    """
    n = graph.vertex_count
    source, sink = 2 * n, 2 * n + 1
    i = graph.edges[:, 0]
    j = graph.edges[:, 1]
    s = signs
    nc = s == 0
    ci, cj, cs = i[~nc], j[~nc], s[~nc]
    tails = np.unique(np.concatenate((ci[cs == 1], cj[cs == -1])))
    heads = np.unique(np.concatenate((cj[cs == 1], ci[cs == -1])))
    if tails.size == 0 or heads.size == 0:
        return 0

    ii, jj = i[nc], j[nc]
    verts = np.arange(n, dtype=np.int64)
    rows = np.concatenate(
        (2 * verts, 2 * ii + 1, 2 * jj + 1, np.full(heads.size, source), 2 * tails + 1)
    )
    cols = np.concatenate(
        (2 * verts + 1, 2 * jj, 2 * ii, 2 * heads, np.full(tails.size, sink))
    )
    size = 2 * n + 2
    cap = csr_matrix(
        (np.ones(rows.size, dtype=np.int32), (rows, cols)), shape=(size, size)
    )
    return int(maximum_flow(cap, source, sink).flow_value)


def _signed_adjacency(graph: CoverageGraph, signs: np.ndarray):
    """Adjacency as v -> [(neighbor, crossing sign when walked v -> neighbor)]."""
    n = graph.vertex_count
    ends = np.concatenate((graph.edges[:, 0], graph.edges[:, 1]))
    nbrs = np.concatenate((graph.edges[:, 1], graph.edges[:, 0]))
    sgns = np.concatenate((signs, -signs)).astype(np.int64)
    order = np.argsort(ends, kind="stable")
    ends, nbrs, sgns = ends[order], nbrs[order], sgns[order]
    bounds = np.searchsorted(ends, np.arange(n + 1))
    return [
        list(zip(nbrs[lo:hi].tolist(), sgns[lo:hi].tolist()))
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]


def _peel_rings(graph: CoverageGraph, signs: np.ndarray, adj, active, limit, order):
    """Greedy packing: close crossing edges into rings in the given order.

    Each candidate crossing edge is closed by the shortest ray-free path from
    its head back to its tail over sensors still active; the ring's sensors
    are then retired. Every ring crosses the ray exactly once, so it winds
    exactly once around the center. Stops at ``limit`` rings.
    """
    i = graph.edges[:, 0]
    j = graph.edges[:, 1]
    tails = np.where(signs == 1, i, j)
    heads = np.where(signs == 1, j, i)

    cycles = []
    for idx in order:
        tail, head = int(tails[idx]), int(heads[idx])
        if not (active[tail] and active[head]):
            continue
        parent = {head: -1}
        frontier = [head]
        found = False
        while frontier and not found:
            nxt = []
            for v in frontier:
                for w, sw in adj[v]:
                    if sw != 0:
                        continue
                    if w == tail:
                        parent[tail] = v
                        found = True
                        break
                    if active[w] and w not in parent:
                        parent[w] = v
                        nxt.append(w)
                if found:
                    break
            frontier = nxt
        if not found:
            continue
        cycle = [tail]
        v = parent[tail]
        while v != -1:
            cycle.append(v)
            v = parent[v]
        cycle.reverse()
        for v in cycle:
            active[v] = False
        cycles.append(cycle)
        if len(cycles) == limit:
            break
    return cycles


def _packing_at_angle(graph: CoverageGraph, signs: np.ndarray, upper: int):
    """Best packing this cut ray yields across peel orders.

    Crossing edges are tried innermost-first and outermost-first; the larger
    packing wins. Returns the list of witness cycles; the caller certifies
    by comparing its size against the upper bound.
    """
    cross = np.flatnonzero(signs != 0)
    if cross.size == 0:
        return []
    adj = _signed_adjacency(graph, signs)
    mids = (
        graph.positions[graph.edges[cross, 0]] + graph.positions[graph.edges[cross, 1]]
    ) / 2.0 - np.asarray(graph.center)
    inward = cross[np.argsort(np.hypot(mids[:, 0], mids[:, 1]), kind="stable")]

    best: list[list[int]] = []
    for order in (inward, inward[::-1]):
        active = np.ones(graph.vertex_count, dtype=bool)
        cycles = _peel_rings(graph, signs, adj, active, upper, order)
        if len(cycles) > len(best):
            best = cycles
        if len(best) == upper:
            break
    return best


def count_barriers(graph: CoverageGraph) -> BarrierCount:
    """Maximum number of vertex-disjoint cycles winding once around the center."""
    if graph.vertex_count == 0 or graph.edge_count == 0:
        return BarrierCount(k=0, witness=[], cut_angle=graph.cut_angle)

    center = np.asarray(graph.center)
    excluded = _center_clearance(graph.positions, center, graph.edges) <= _CENTER_EPS

    upper = graph.vertex_count // 3
    best: list[list[int]] = []
    best_angle = graph.cut_angle
    for angle in _candidate_angles(graph):
        signs = (
            graph.crossing_sign
            if abs(angle - graph.cut_angle) < 1e-15
            else _crossing_signs(graph.positions, center, graph.edges, angle, excluded)
        )
        upper = min(upper, _severed_flow_value(graph, signs))
        if upper == 0:
            # No packing outgrows the severed flow of any single ray.
            return BarrierCount(k=0, witness=[], cut_angle=angle)
        packing = _packing_at_angle(graph, signs, upper)
        if len(packing) > len(best):
            best, best_angle = packing, angle
        if len(best) >= upper:
            return BarrierCount(k=len(best), witness=best, cut_angle=best_angle)

    return BarrierCount(
        k=len(best), witness=best, cut_angle=best_angle, certified=False
    )


def _candidate_angles(graph: CoverageGraph):
    yield graph.cut_angle
    mids = _sector_angles(graph.positions, np.asarray(graph.center))
    mids = mids[np.abs(mids - graph.cut_angle) >= 1e-15]
    n = graph.vertex_count
    if n > _DENSE_VERTEX_LIMIT:
        cap = _DENSE_MAX_ANGLES
    elif n > _RETRY_ALL_BELOW:
        cap = _MAX_RETRY_ANGLES
    else:
        cap = len(mids)
    if len(mids) > cap:
        picks = np.linspace(0, len(mids) - 1, cap).astype(int)
        mids = mids[np.unique(picks)]
    for angle in mids:
        yield float(angle)


def cycle_winding(graph: CoverageGraph, cycle) -> float:
    """Winding of a vertex cycle around the center, in turns.

    Computed from subtended-angle increments, independent of crossing tags.
    """
    center = np.asarray(graph.center)
    pts = graph.positions[np.asarray(cycle, dtype=int)] - center
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    steps = np.diff(np.append(ang, ang[0]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return float(steps.sum() / (2.0 * np.pi))


def brute_force_barriers(graph: CoverageGraph) -> BarrierCount:
    """Exact packing of winding cycles by exhaustive enumeration.

    Only for small fields: refuses more than 14 sensors or graphs whose
    cycle space exceeds the step budget. Winding is evaluated geometrically
    for every candidate cycle, so this route shares no machinery with the
    flow construction beyond the graph itself.
    """
    n = graph.vertex_count
    if n > _BRUTE_FORCE_MAX_SENSORS:
        raise BruteForceBudgetError(
            f"brute force capped at {_BRUTE_FORCE_MAX_SENSORS} sensors, got {n}"
        )
    if n == 0 or graph.edge_count == 0:
        return BarrierCount(k=0, witness=[], cut_angle=graph.cut_angle)

    adj: list[set[int]] = [set() for _ in range(n)]
    for i, j in graph.edges:
        adj[int(i)].add(int(j))
        adj[int(j)].add(int(i))

    steps = 0
    cycles: dict[int, list[int]] = {}

    def record(path):
        w = cycle_winding(graph, path)
        if abs(abs(w) - 1.0) < 1e-6:
            mask = 0
            for v in path:
                mask |= 1 << v
            cycles.setdefault(mask, list(path))

    def extend(anchor, path, on_path):
        nonlocal steps
        current = path[-1]
        for nxt in adj[current]:
            steps += 1
            if steps > _BRUTE_FORCE_MAX_STEPS:
                raise BruteForceBudgetError("cycle enumeration exceeded step budget")
            if nxt == anchor and len(path) >= 3 and path[1] < path[-1]:
                record(path)
            elif nxt > anchor and nxt not in on_path:
                path.append(nxt)
                on_path.add(nxt)
                extend(anchor, path, on_path)
                on_path.remove(nxt)
                path.pop()

    for anchor in range(n):
        extend(anchor, [anchor], {anchor})

    # Exact packing by branch and bound over the recorded cycles, smallest
    # vertex sets first; vertices-left // 3 caps what any branch can add.
    masks = sorted(cycles, key=lambda m: (m.bit_count(), m))
    best_k = 0
    best_masks: list[int] = []
    ceiling = n // 3

    def search(idx, used, chosen):
        nonlocal best_k, best_masks
        if len(chosen) > best_k:
            best_k = len(chosen)
            best_masks = list(chosen)
        if best_k == ceiling:
            return
        free = n - used.bit_count()
        if len(chosen) + free // 3 <= best_k:
            return
        for i in range(idx, len(masks)):
            m = masks[i]
            if m & used == 0:
                chosen.append(m)
                search(i + 1, used | m, chosen)
                chosen.pop()
                if best_k == ceiling:
                    return

    search(0, 0, [])
    witness = [cycles[m] for m in best_masks]
    return BarrierCount(k=best_k, witness=witness, cut_angle=graph.cut_angle)


def max_barrier_paths(n: int, k: int) -> int:
    """Upper bound on disjoint k-barriers formable from n sensors."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if n < 0:
        raise ValidationError(f"n must be non-negative, got {n}")
    return n // k
