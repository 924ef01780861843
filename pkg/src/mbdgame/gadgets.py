"""The five 2xm sub-game gadgets plus the primed skip variants.

Each gadget is materialized as a standalone Position on its own board:
columns 1..m left to right, labels u_i / v_i, and for W boards an extra
vertex v0 attached to v1 (last index). Pre-dominated vertices model
domination arriving from outside the sub-board.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .game import Player, Position, new_position
from .graphs import Graph, graph_from_edges, grid2xn, grid_u, grid_v, mask_from_ids
from .solver import GameValue


class GadgetError(ValueError):
    """Out-of-range size parameter or malformed gadget name."""


KINDS = ("X", "Y", "Z", "W", "Rho", "W4prime", "W6prime")


@dataclass(frozen=True)
class GadgetSpec:
    kind: str
    m: int

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise GadgetError(f"unknown gadget kind {self.kind!r}")
        lo = {"X": 1, "Y": 3, "Z": 1, "W": 1, "Rho": 2}
        if self.kind in lo and self.m < lo[self.kind]:
            raise GadgetError(f"{self.kind} needs m >= {lo[self.kind]}, got {self.m}")
        if self.kind == "W4prime" and self.m != 4:
            raise GadgetError("W4prime has fixed m = 4")
        if self.kind == "W6prime" and self.m != 6:
            raise GadgetError("W6prime has fixed m = 6")

    def name(self) -> str:
        if self.kind in ("W4prime", "W6prime"):
            return f"Wprime:{self.m}"
        return f"{self.kind.lower()}:{self.m}"


def parse_gadget_name(text: str) -> GadgetSpec:
    """Parse the CLI grammar: "rho:5", "X:13", "Wprime:6"."""
    try:
        kind_s, m_s = text.split(":")
        m = int(m_s)
    except ValueError:
        raise GadgetError(f"bad gadget name {text!r}, expected kind:m") from None
    k = kind_s.strip().lower()
    if k in ("rho", "ρ"):
        return GadgetSpec("Rho", m)
    if k == "wprime":
        if m == 4:
            return GadgetSpec("W4prime", 4)
        if m == 6:
            return GadgetSpec("W6prime", 6)
        raise GadgetError("Wprime exists only for m in {4, 6}")
    if k in ("x", "y", "z", "w"):
        return GadgetSpec(k.upper(), m)
    raise GadgetError(f"unknown gadget kind {kind_s!r}")


def w_board(m: int) -> Graph:
    """2 x m grid plus the pendant v0 attached to v1; v0 gets the last index."""
    edges = []
    for i in range(1, m + 1):
        edges.append((grid_u(i), grid_v(i)))
        if i < m:
            edges.append((grid_u(i), grid_u(i + 1)))
            edges.append((grid_v(i), grid_v(i + 1)))
    v0 = 2 * m
    edges.append((grid_v(1), v0))
    labels = []
    for i in range(1, m + 1):
        labels.extend([f"u{i}", f"v{i}"])
    labels.append("v0")
    return graph_from_edges(2 * m + 1, edges, tuple(labels))


def w_v0_index(m: int) -> int:
    return 2 * m


def build_gadget(spec: GadgetSpec) -> Position:
    """Materialize the gadget start position, including its starting side:
    Dominator moves first on X / Y / Rho, Staller on Z / W and on the primed
    variants (where Dominator has already skipped)."""
    m = spec.m
    if spec.kind == "X":
        return new_position(
            grid2xn(m), pre_dominated=mask_from_ids([grid_u(1)]), to_move=Player.DOMINATOR
        )
    if spec.kind == "Y":
        predom = mask_from_ids([grid_u(1), grid_u(m), grid_v(m)])
        return new_position(
            grid2xn(m),
            pre_staller=mask_from_ids([grid_v(2)]),
            pre_dominated=predom,
            to_move=Player.DOMINATOR,
        )
    if spec.kind == "Z":
        return new_position(
            grid2xn(m),
            pre_dominated=mask_from_ids([grid_u(1), grid_v(1)]),
            to_move=Player.STALLER,
        )
    if spec.kind == "W":
        return new_position(
            w_board(m),
            pre_dominated=mask_from_ids([grid_u(1), w_v0_index(m)]),
            to_move=Player.STALLER,
        )
    if spec.kind == "Rho":
        return new_position(
            grid2xn(m),
            pre_staller=mask_from_ids([grid_v(2)]),
            pre_dominated=mask_from_ids([grid_u(1)]),
            to_move=Player.DOMINATOR,
        )
    if spec.kind == "W4prime":
        # S-game on W4 with Dominator's first reply skipped; Staller's s1 is
        # enumerated separately (see w4prime_cases) under its restriction.
        return build_gadget(GadgetSpec("W", 4))
    if spec.kind == "W6prime":
        # Dominator skipped and s1 = v2 is on the board; Staller moves again.
        base = build_gadget(GadgetSpec("W", 6))
        return new_position(
            base.graph,
            pre_staller=mask_from_ids([grid_v(2)]),
            pre_dominated=base.predom,
            to_move=Player.STALLER,
        )
    raise GadgetError(spec.kind)  # pragma: no cover


W4PRIME_FORBIDDEN_S1 = ("u3", "v3", "u4", "v4")


def w4prime_cases() -> list[tuple[int, Position]]:
    """All (s1, position-after-skip) pairs covered by the W4-with-skip claim:
    Staller has claimed s1 outside {u3, v3, u4, v4}, Dominator skipped, and
    Staller moves again. Each position must be a Dominator win in <= 4."""
    base = build_gadget(GadgetSpec("W", 4))
    g = base.graph
    forbidden = {g.index_of_label(lab) for lab in W4PRIME_FORBIDDEN_S1}
    out = []
    for s1 in range(g.n):
        if s1 in forbidden:
            continue
        pos = new_position(
            g,
            pre_staller=1 << s1,
            pre_dominated=base.predom,
            to_move=Player.STALLER,
        )
        out.append((s1, pos))
    return out


def w6prime_position() -> Position:
    """The single position of the W6-with-skip claim (s1 = v2 fixed)."""
    return build_gadget(GadgetSpec("W6prime", 6))


def gadget_expected_value(spec: GadgetSpec) -> GameValue:
    """Closed-form value table used as the test oracle target.

    For the primed kinds the value is the claimed upper bound, valid under
    the corresponding restriction on Staller's first move.
    """
    m = spec.m
    if spec.kind == "Rho":
        return GameValue.dominator_win(m)
    if spec.kind == "Y":
        return GameValue.dominator_win(m - 1)
    if spec.kind == "Z":
        return GameValue.dominator_win(m - 1)
    if spec.kind == "W":
        return GameValue.dominator_win(m if m <= 3 else m - 1)
    if spec.kind == "X":
        if m == 1:
            return GameValue.dominator_win(1)
        if m <= 5:
            return GameValue.dominator_win(m - 1)
        return GameValue.dominator_win(m - 2)
    if spec.kind == "W4prime":
        return GameValue.dominator_win(4)
    if spec.kind == "W6prime":
        return GameValue.dominator_win(6)
    raise GadgetError(spec.kind)  # pragma: no cover


def gadget_domain(kind: str, m_max: int) -> Iterable[int]:
    """Valid sizes for a gadget kind up to m_max (for lemma sweeps)."""
    lo = {"X": 1, "Y": 3, "Z": 1, "W": 1, "Rho": 2}[kind]
    return range(lo, m_max + 1)
