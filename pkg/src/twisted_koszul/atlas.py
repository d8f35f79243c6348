"""Formal atlases: charts, polynomial transitions, combinatorial nerve.

An atlas is the formal stand-in for an open cover of the chart product:
overlaps are declared combinatorially (the nerve), transitions are
polynomial automorphisms, and all verified statements are cochain-level
identities that never need point-set topology.

Conventions baked in here:

* transitions store z_to = map(z_from), with a polynomial inverse;
* the nerve is a set of strictly increasing chart tuples under the
  declaration order, closed under subtuples;
* off-diagonal charts may only carry identity transitions and must come
  before diagonal charts in the declaration order, so that every simplex
  lists them first (its homotopy rule is then the wedge rule, which never
  integrates localized coefficients).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .coeffring import CoeffFunction, Rat
from .koszul import (
    DualHomElement,
    DualKoszulElement,
    HomElement,
    KoszulElement,
    TensorElement,
    check_multi_index,
    diagonal_section,
    offdiagonal_section,
)

__all__ = [
    "Chart",
    "Transition",
    "Atlas",
    "ValidationReport",
    "jacobian_matrix",
    "jacobian_wedge",
    "fixture",
    "fixture_names",
    "FIXTURES",
]


@dataclass(frozen=True)
class Chart:
    id: str
    kind: str  # "diagonal" | "offdiagonal"
    n: int
    denominators: tuple[CoeffFunction, ...] = ()

    def __post_init__(self):
        if self.kind not in ("diagonal", "offdiagonal"):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("chart dimension must be >= 1")

    @property
    def offdiag(self) -> bool:
        return self.kind == "offdiagonal"

    def section(self) -> list[CoeffFunction]:
        return (
            offdiagonal_section(self.n) if self.offdiag else diagonal_section(self.n)
        )


@dataclass(frozen=True)
class Transition:
    frm: str
    to: str
    map: tuple[CoeffFunction, ...]       # z_to components as polys in z_frm
    inverse: tuple[CoeffFunction, ...]   # z_frm components as polys in z_to


class ValidationReport:
    def __init__(self):
        self.violations: list[str] = []

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, msg: str):
        self.violations.append(msg)

    def __repr__(self):
        return f"ValidationReport(ok={self.ok}, violations={self.violations})"


def _compose_maps(outer: Sequence[CoeffFunction], inner: Sequence[CoeffFunction]):
    """outer(inner(z)) componentwise; maps are z-block polynomials."""
    return tuple(f.substitute(list(inner)) for f in outer)


def _identity_map(n: int) -> tuple[CoeffFunction, ...]:
    return tuple(CoeffFunction.variable(n, f"z{i}") for i in range(1, n + 1))


class Atlas:
    """Validated chart collection with transition lookup and conversions."""

    def __init__(
        self,
        atlas_id: str,
        charts: Sequence[Chart],
        transitions: Iterable[Transition],
        nerve: Iterable[Sequence[str]],
    ):
        self.id = atlas_id
        self.charts = {c.id: c for c in charts}
        if len(self.charts) != len(charts):
            raise ValueError("chart ids must be unique")
        self.order = {c.id: i for i, c in enumerate(charts)}
        self.n = charts[0].n
        if any(c.n != self.n for c in charts):
            raise ValueError("all charts must share one dimension")
        self.transitions: dict[tuple[str, str], Transition] = {}
        for t in transitions:
            self.transitions[(t.frm, t.to)] = t
            if (t.to, t.frm) not in self.transitions:
                self.transitions[(t.to, t.frm)] = Transition(
                    t.to, t.frm, t.inverse, t.map
                )
        for cid in self.charts:
            self.transitions.setdefault(
                (cid, cid), Transition(cid, cid, _identity_map(self.n), _identity_map(self.n))
            )
        self.nerve = {tuple(s) for s in nerve}
        self._section_cache: dict[tuple[str, str], list[CoeffFunction]] = {}

    # -- structure ------------------------------------------------------

    def simplices(self, p: int | None = None) -> list[tuple[str, ...]]:
        out = sorted(
            (s for s in self.nerve if p is None or len(s) == p + 1),
            key=lambda s: (len(s), tuple(self.order[c] for c in s)),
        )
        return out

    @property
    def dimension(self) -> int:
        return max(len(s) for s in self.nerve) - 1

    def chart(self, cid: str) -> Chart:
        return self.charts[cid]

    def transition(self, frm: str, to: str) -> Transition:
        t = self.transitions.get((frm, to))
        if t is None:
            raise KeyError(f"missing transition {frm} -> {to}")
        return t

    # -- validation -------------------------------------------------------

    def validate(self) -> ValidationReport:
        rep = ValidationReport()
        for s in self.nerve:
            if any(c not in self.charts for c in s):
                rep.add(f"simplex {s} mentions unknown charts")
                continue
            if any(
                self.order[a] >= self.order[b] for a, b in zip(s, s[1:])
            ):
                rep.add(f"simplex {s} is not strictly increasing in chart order")
            for k in range(1, len(s)):
                for sub in combinations(s, k):
                    if sub not in self.nerve:
                        rep.add(f"nerve not downward closed: {sub} missing under {s}")
        for c in self.charts.values():
            if (c.id,) not in self.nerve:
                rep.add(f"singleton simplex missing for chart {c.id}")
        for s in self.nerve:
            offs = [c for c in s if self.charts[c].offdiag]
            if offs and any(
                self.charts[c].offdiag and self.charts[d].kind == "diagonal"
                for c, d in zip(s, s[1:])
            ) is False and offs != list(s[: len(offs)]):
                rep.add(f"off-diagonal charts must come first in simplex {s}")
        ident = _identity_map(self.n)
        for (frm, to), t in sorted(self.transitions.items()):
            if len(t.map) != self.n or len(t.inverse) != self.n:
                rep.add(f"transition {frm}->{to} has wrong arity")
                continue
            if any(not m.is_polynomial() or not m.zeta_free() for m in t.map + t.inverse):
                rep.add(f"transition {frm}->{to} components must be z-polynomials")
                continue
            if self.charts[frm].offdiag or self.charts[to].offdiag:
                if frm != to and (t.map != tuple(ident) or t.inverse != tuple(ident)):
                    rep.add(
                        f"off-diagonal chart transition {frm}->{to} must be the identity"
                    )
            if _compose_maps(t.map, t.inverse) != tuple(ident):
                rep.add(f"transition {frm}->{to}: map∘inverse is not the identity")
            if _compose_maps(t.inverse, t.map) != tuple(ident):
                rep.add(f"transition {frm}->{to}: inverse∘map is not the identity")
        for s in self.nerve:
            if len(s) < 2:
                continue
            for a, b in combinations(s, 2):
                if (a, b) not in self.transitions:
                    rep.add(f"missing transition {a}->{b} for simplex {s}")
        for s in self.simplices():
            if len(s) != 3:
                continue
            a, b, c = s
            try:
                lhs = _compose_maps(self.transition(b, c).map, self.transition(a, b).map)
                if lhs != tuple(self.transition(a, c).map):
                    rep.add(f"cocycle failure on simplex {s}")
            except KeyError as e:
                rep.add(str(e))
        return rep

    # -- coordinate changes -----------------------------------------------

    def convert_cf(self, cf: CoeffFunction, frm: str, to: str) -> CoeffFunction:
        """Re-express a coefficient from frm-coordinates in to-coordinates."""
        if frm == to:
            return cf
        t = self.transition(to, frm)  # z_frm = t.map(z_to)
        return cf.substitute(list(t.map))

    def convert_element(self, x, to: str):
        """Re-express an element's coefficients; basis tags are untouched."""
        if x.coords == to:
            return x
        out = {k: self.convert_cf(cf, x.coords, to) for k, cf in x.terms.items()}
        if isinstance(x, KoszulElement):
            return KoszulElement(x.chart, x.n, out, to)
        if isinstance(x, DualKoszulElement):
            return DualKoszulElement(x.chart, x.n, out, to)
        if isinstance(x, HomElement):
            return HomElement(x.target, x.source, x.n, out, to)
        if isinstance(x, DualHomElement):
            return DualHomElement(x.target, x.source, x.n, out, to)
        if isinstance(x, TensorElement):
            return TensorElement(x.first, x.second, x.n, out, to)
        raise TypeError(f"cannot convert {type(x).__name__}")

    def section_in(self, lead: str, chart: str) -> list[CoeffFunction]:
        """The chart's Koszul section expressed in lead-chart coordinates."""
        got = self._section_cache.get((lead, chart))
        if got is not None:
            return got
        c = self.charts[chart]
        if c.offdiag:
            sec = offdiagonal_section(self.n)
        elif chart == lead:
            sec = diagonal_section(self.n)
        else:
            t = self.transition(lead, chart)  # z_chart = map(z_lead)
            sec = [m - m.zeta_shift() for m in t.map]
        self._section_cache[(lead, chart)] = sec
        return sec

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "charts": [
                {
                    "id": c.id,
                    "kind": c.kind,
                    "n": c.n,
                    "denominators": [d.to_text() for d in c.denominators],
                }
                for c in sorted(self.charts.values(), key=lambda c: self.order[c.id])
            ],
            "transitions": [
                {
                    "from": t.frm,
                    "to": t.to,
                    "map": [m.to_text() for m in t.map],
                    "inverse": [m.to_text() for m in t.inverse],
                }
                for (frm, to), t in sorted(self.transitions.items())
                if frm != to
            ],
            "nerve": [list(s) for s in self.simplices()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Atlas":
        charts = []
        for c in data["charts"]:
            n = c["n"]
            charts.append(
                Chart(
                    c["id"],
                    c["kind"],
                    n,
                    tuple(
                        CoeffFunction.from_text(n, d)
                        for d in c.get("denominators", [])
                    ),
                )
            )
        n = charts[0].n
        transitions = [
            Transition(
                t["from"],
                t["to"],
                tuple(CoeffFunction.from_text(n, m) for m in t["map"]),
                tuple(CoeffFunction.from_text(n, m) for m in t["inverse"]),
            )
            for t in data.get("transitions", [])
        ]
        return cls(data.get("id", "atlas"), charts, transitions, data["nerve"])

    @classmethod
    def load(cls, path: str) -> "Atlas":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def save(self, path: str):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)


def jacobian_matrix(t: Transition, n: int) -> list[list[CoeffFunction]]:
    """Rows i, columns j: d(map_i)/d(z_j), polynomials in the source coordinates."""
    return [[t.map[i].partial(f"z{j + 1}") for j in range(n)] for i in range(n)]


def _minor(mat, rows, cols) -> CoeffFunction:
    if not rows:
        n = mat[0][0].n if mat else 1
        return CoeffFunction.one(n)
    if len(rows) == 1:
        return mat[rows[0]][cols[0]]
    out = None
    for k, r in enumerate(rows):
        sub = _minor(mat, rows[:k] + rows[k + 1:], cols[1:])
        piece = mat[r][cols[0]] * sub
        if k % 2:
            piece = piece * Rat(-1)
        out = piece if out is None else out + piece
    return out


def jacobian_wedge(atlas_or_n, t: Transition, q: int) -> HomElement:
    """The q-th exterior power of the transition Jacobian as a Hom element.

    Sends e^I of the `to` chart to sum over J of det(d z_to^I / d z_frm^J) e^J;
    entries are z-polynomials in the `frm` chart's coordinates.
    """
    n = atlas_or_n.n if isinstance(atlas_or_n, Atlas) else atlas_or_n
    if not 0 <= q <= n:
        raise ValueError("exterior degree out of range")
    mat = jacobian_matrix(t, n)
    terms = {}
    for I in combinations(range(1, n + 1), q):
        for J in combinations(range(1, n + 1), q):
            m = _minor(mat, [i - 1 for i in I], [j - 1 for j in J])
            if not m.is_zero():
                terms[(J, I)] = m
    return HomElement(t.frm, t.to, n, terms)


# -- shipped fixtures ------------------------------------------------------


def _cf(n, text):
    return CoeffFunction.from_text(n, text)


def _fixture_line() -> Atlas:
    return Atlas("line", [Chart("U", "diagonal", 1)], [], [("U",)])


def _fixture_plane() -> Atlas:
    return Atlas("plane", [Chart("U", "diagonal", 2)], [], [("U",)])


def _fixture_space() -> Atlas:
    return Atlas("space", [Chart("U", "diagonal", 3)], [], [("U",)])


def _fixture_shear2() -> Atlas:
    n = 2
    t = Transition(
        "A",
        "B",
        (_cf(n, "z1"), _cf(n, "z2 + z1^2")),
        (_cf(n, "z1"), _cf(n, "z2 - z1^2")),
    )
    return Atlas(
        "shear2",
        [Chart("A", "diagonal", n), Chart("B", "diagonal", n)],
        [t],
        [("A",), ("B",), ("A", "B")],
    )


def _fixture_shear3() -> Atlas:
    n = 2
    ab = Transition(
        "A",
        "B",
        (_cf(n, "z1"), _cf(n, "z2 + z1^2")),
        (_cf(n, "z1"), _cf(n, "z2 - z1^2")),
    )
    bc = Transition(
        "B",
        "C",
        (_cf(n, "z1 + z2^2"), _cf(n, "z2")),
        (_cf(n, "z1 - z2^2"), _cf(n, "z2")),
    )
    ac_map = _compose_maps(bc.map, ab.map)
    ac_inv = _compose_maps(ab.inverse, bc.inverse)
    ac = Transition("A", "C", ac_map, ac_inv)
    nerve = [("A",), ("B",), ("C",), ("A", "B"), ("A", "C"), ("B", "C"), ("A", "B", "C")]
    return Atlas(
        "shear3",
        [Chart("A", "diagonal", n), Chart("B", "diagonal", n), Chart("C", "diagonal", n)],
        [ab, bc, ac],
        nerve,
    )


def _fixture_trans3() -> Atlas:
    n = 1
    ab = Transition("A", "B", (_cf(n, "z1 - 1"),), (_cf(n, "z1 + 1"),))
    bc = Transition("B", "C", (_cf(n, "z1 - 1"),), (_cf(n, "z1 + 1"),))
    ac = Transition("A", "C", (_cf(n, "z1 - 2"),), (_cf(n, "z1 + 2"),))
    nerve = [("A",), ("B",), ("C",), ("A", "B"), ("A", "C"), ("B", "C"), ("A", "B", "C")]
    return Atlas(
        "trans3",
        [Chart("A", "diagonal", n), Chart("B", "diagonal", n), Chart("C", "diagonal", n)],
        [ab, bc, ac],
        nerve,
    )


def _fixture_offdiag() -> Atlas:
    n = 1
    w = _cf(n, "z1 - zeta1")
    t = Transition("V", "U", (_cf(n, "z1"),), (_cf(n, "z1"),))
    return Atlas(
        "offdiag",
        [Chart("V", "offdiagonal", n, (w,)), Chart("U", "diagonal", n)],
        [t],
        [("V",), ("U",), ("V", "U")],
    )


FIXTURES = {
    "line": _fixture_line,
    "plane": _fixture_plane,
    "space": _fixture_space,
    "shear2": _fixture_shear2,
    "shear3": _fixture_shear3,
    "trans3": _fixture_trans3,
    "offdiag": _fixture_offdiag,
}


def fixture(name: str) -> Atlas:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; have {sorted(FIXTURES)}")


def fixture_names() -> list[str]:
    return list(FIXTURES)
