"""Manhattan-grid vehicle mobility and V2I/V2V link formation.

Roads are the centerlines of a blocks_x x blocks_y grid (boundary roads
included). Vehicles travel along roads at constant speed, turn at
intersections with probability 0.5 straight / 0.25 left / 0.25 right, and
wrap to the opposite boundary on the same lane when they would leave the
area. All operations are pure: they take their RNG stream explicitly and
return new state objects.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import ConfigError

BS = "bs"  # pair_distance() sentinel for the base station

_EPS = 1e-9


@dataclass
class TopologyState:
    positions: np.ndarray  # (N, 2) meters
    headings: np.ndarray  # (N, 2) axis-aligned unit vectors
    speeds: np.ndarray  # (N,) m/s
    bs_position: np.ndarray  # (2,)
    v2i_vehicles: np.ndarray  # (M,) vehicle indices
    v2v_pairs: np.ndarray  # (K, 2) (transmitter, receiver) vehicle indices
    road_xs: np.ndarray  # vertical road x coordinates
    road_ys: np.ndarray  # horizontal road y coordinates
    area: np.ndarray  # (width, height)

    @property
    def num_vehicles(self) -> int:
        return len(self.positions)


def grid_lines(cfg):
    xs = np.linspace(0.0, cfg.area_width_m, cfg.blocks_x + 1)
    ys = np.linspace(0.0, cfg.area_height_m, cfg.blocks_y + 1)
    return xs, ys


def drop_vehicles(cfg, rng) -> TopologyState:
    """Place vehicles uniformly along road centerlines and form the links.

    The M V2I starters and the K V2V transmitters are drawn without
    replacement within each role (a vehicle may hold both roles); each V2V
    transmitter is paired with its nearest other vehicle as receiver.
    """
    n = cfg.num_vehicles
    need = max(cfg.m_links, cfg.k_links + 1)
    if n < need:
        raise ConfigError(
            f"{n} vehicles cannot carry {cfg.m_links} V2I and {cfg.k_links} V2V links"
            f" (need >= {need})"
        )
    xs, ys = grid_lines(cfg)

    # directed lanes: (axis of travel, fixed coordinate, direction)
    lanes = [(0, y, s) for y in ys for s in (1.0, -1.0)]
    lanes += [(1, x, s) for x in xs for s in (1.0, -1.0)]
    lengths = np.array([cfg.area_width_m if axis == 0 else cfg.area_height_m for axis, _, _ in lanes])

    lane_idx = rng.choice(len(lanes), size=n, p=lengths / lengths.sum())
    offsets = rng.uniform(0.0, 1.0, size=n)
    positions = np.empty((n, 2))
    headings = np.zeros((n, 2))
    for i in range(n):
        axis, coord, s = lanes[lane_idx[i]]
        if axis == 0:
            positions[i] = (offsets[i] * cfg.area_width_m, coord)
            headings[i] = (s, 0.0)
        else:
            positions[i] = (coord, offsets[i] * cfg.area_height_m)
            headings[i] = (0.0, s)

    v2i = rng.choice(n, size=cfg.m_links, replace=False).astype(np.int64)
    tx = rng.choice(n, size=cfg.k_links, replace=False).astype(np.int64)
    diffs = positions[:, None, :] - positions[None, :, :]
    dist = np.hypot(diffs[..., 0], diffs[..., 1])
    np.fill_diagonal(dist, np.inf)
    rx = dist[tx].argmin(axis=1).astype(np.int64)

    return TopologyState(
        positions=positions,
        headings=headings,
        speeds=np.full(n, float(cfg.speed_mps)),
        bs_position=np.array([cfg.area_width_m / 2.0, cfg.area_height_m / 2.0]),
        v2i_vehicles=v2i,
        v2v_pairs=np.stack([tx, rx], axis=1),
        road_xs=xs,
        road_ys=ys,
        area=np.array([cfg.area_width_m, cfg.area_height_m]),
    )


def _advance(x, y, hx, hy, dist, xs, ys, area, rng):
    """Move one vehicle `dist` meters, handling intersections and wrap-around."""
    for _ in range(10000):
        if dist <= _EPS:
            break
        along_x = hx != 0.0
        coord = x if along_x else y
        s = hx if along_x else hy
        lines = xs if along_x else ys
        limit = float(area[0] if along_x else area[1])

        if s > 0:
            ahead = lines[lines > coord + _EPS]
            next_line = float(ahead.min()) if ahead.size else None
        else:
            ahead = lines[lines < coord - _EPS]
            next_line = float(ahead.max()) if ahead.size else None

        if next_line is None:
            # on the outward boundary: wrap to the opposite edge, same lane
            coord = 0.0 if s > 0 else limit
        else:
            gap = abs(next_line - coord)
            if gap > dist:
                coord += s * dist
                dist = 0.0
            else:
                coord = next_line
                dist -= gap
                u = rng.random()
                if u < 0.25:  # left turn (90 deg counter-clockwise)
                    hx, hy = -hy, hx
                elif u < 0.5:  # right turn
                    hx, hy = hy, -hx
                # else straight

        if along_x:
            x = coord
        else:
            y = coord
    else:
        raise RuntimeError("mobility update failed to terminate")
    return x, y, hx, hy


def update_positions(topo: TopologyState, dt_s: float, rng) -> TopologyState:
    """Advance every vehicle speed*dt along its heading; pure, link-preserving."""
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    pos = topo.positions.copy()
    head = topo.headings.copy()
    for i in range(len(pos)):
        x, y, hx, hy = _advance(
            float(pos[i, 0]),
            float(pos[i, 1]),
            float(head[i, 0]),
            float(head[i, 1]),
            float(topo.speeds[i]) * dt_s,
            topo.road_xs,
            topo.road_ys,
            topo.area,
            rng,
        )
        pos[i] = (x, y)
        head[i] = (hx, hy)
    return dataclasses.replace(topo, positions=pos, headings=head)


def nearest_neighbor_pairs(topo: TopologyState) -> np.ndarray:
    """Fresh (tx, rx) pairs: each transmitter's nearest other vehicle now."""
    pos = topo.positions
    diffs = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diffs[..., 0], diffs[..., 1])
    np.fill_diagonal(dist, np.inf)
    tx = topo.v2v_pairs[:, 0]
    rx = dist[tx].argmin(axis=1).astype(np.int64)
    return np.stack([tx, rx], axis=1)


def euclidean(p, q) -> float:
    return float(np.hypot(p[0] - q[0], p[1] - q[1]))


def pair_distance(topo: TopologyState, a, b) -> float:
    """Horizontal-plane distance between two vehicles or a vehicle and the BS."""
    return euclidean(_resolve(topo, a), _resolve(topo, b))


def _resolve(topo, ref):
    if isinstance(ref, str):
        if ref == BS:
            return topo.bs_position
        raise ValueError(f"unknown endpoint {ref!r}")
    return topo.positions[int(ref)]


def dump_topology(topo: TopologyState, path):
    """Inspection CSV: vehicle id, x, y, heading (degrees)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("vehicle,x_m,y_m,heading_deg\n")
        for i in range(topo.num_vehicles):
            deg = float(np.degrees(np.arctan2(topo.headings[i, 1], topo.headings[i, 0])))
            x, y = float(topo.positions[i, 0]), float(topo.positions[i, 1])
            fh.write(f"{i},{x!r},{y!r},{deg!r}\n")
