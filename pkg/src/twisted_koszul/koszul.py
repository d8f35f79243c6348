"""Exterior algebra over coefficient functions.

Five element kinds share the same sparse-term machinery:

* KoszulElement      -- sums f_I e^I            (degree -|I|)
* DualKoszulElement  -- sums f_J ě^J            (degree +|J|)
* HomElement         -- sums f_{IJ} e^I (x) ě^J, a map K_src -> K_tgt
* DualHomElement     -- sums f_{JM} ě^J (x) e^M, a map Ǩ_src -> Ǩ_tgt
* TensorElement      -- sums f_{LM} e^L (x) e^M, a map Ǩ_snd -> K_fst

Multi-indices are strictly increasing tuples of 1-based indices.  All
compositions are the naive determinant pairing <ě^J, e^J> = 1 on matching
increasing indices; every sign in the library comes from explicit wedge or
contraction position counts or from the stated degree conventions.

Differentials follow the map model d(f) = d_tgt∘f - (-1)^{deg f} f∘d_src,
which in slot terms is (local operator on the first slot) plus
(-1)^{deg+1} times the adjoint operator on the second slot.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .coeffring import CoeffFunction, Rat, restrict_diagonal

__all__ = [
    "ChartMismatch",
    "MultiIndex",
    "wedge_merge",
    "insert_index",
    "remove_index",
    "KoszulElement",
    "DualKoszulElement",
    "HomElement",
    "DualHomElement",
    "TensorElement",
    "diagonal_section",
    "offdiagonal_section",
]

MultiIndex = tuple[int, ...]


class ChartMismatch(ValueError):
    """Operands live on different charts or incompatible chart chains."""


def check_multi_index(I: Sequence[int], n: int) -> MultiIndex:
    I = tuple(I)
    if any(not 1 <= i <= n for i in I) or any(a >= b for a, b in zip(I, I[1:])):
        raise ValueError(f"multi-index {I} invalid for dimension {n}")
    return I


def wedge_merge(I: MultiIndex, J: MultiIndex) -> tuple[int, MultiIndex] | None:
    """Merge two increasing multi-indices; sign is the crossing parity."""
    if set(I) & set(J):
        return None
    sign = 1
    for a in I:
        for b in J:
            if a > b:
                sign = -sign
    return sign, tuple(sorted(I + J))


def insert_index(I: MultiIndex, j: int) -> tuple[int, MultiIndex] | None:
    """Wedge e^j into e^I from the left."""
    if j in I:
        return None
    sign = -1 if sum(1 for i in I if i < j) % 2 else 1
    return sign, tuple(sorted(I + (j,)))


def remove_index(I: MultiIndex, j: int) -> tuple[int, MultiIndex] | None:
    """Contract the j-th generator out of e^I; sign (-1)^(position-1)."""
    if j not in I:
        return None
    pos = I.index(j)
    sign = -1 if pos % 2 else 1
    return sign, I[:pos] + I[pos + 1:]


def diagonal_section(n: int) -> list[CoeffFunction]:
    """The components z_i - zeta_i of the diagonal Koszul section."""
    return [
        CoeffFunction.variable(n, f"z{i}") - CoeffFunction.variable(n, f"zeta{i}")
        for i in range(1, n + 1)
    ]


def offdiagonal_section(n: int) -> list[CoeffFunction]:
    """Off-diagonal charts use the constant section with first component 1."""
    out = [CoeffFunction.zero(n) for _ in range(n)]
    out[0] = CoeffFunction.one(n)
    return out


def _accumulate(acc: dict, key, cf: CoeffFunction):
    got = acc.get(key)
    s = cf if got is None else got + cf
    if s.is_zero():
        acc.pop(key, None)
    else:
        acc[key] = s


class _Terms:
    """Shared plumbing: canonicalized sparse term maps and linear structure."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping | None):
        clean = {}
        for key, cf in (terms or {}).items():
            if not cf.is_zero():
                clean[key] = cf
        self.n = n
        self.terms = clean

    def is_zero(self) -> bool:
        return not self.terms

    def _combined(self, other, negate=False):
        out = dict(self.terms)
        for key, cf in other.terms.items():
            _accumulate(out, key, -cf if negate else cf)
        return out

    def _scaled(self, c):
        if isinstance(c, (int, Rat)):
            if c == 0:
                return {}
            return {k: cf * c for k, cf in self.terms.items()}
        out = {}
        for k, cf in self.terms.items():
            p = cf * c
            if not p.is_zero():
                out[k] = p
        return out

    def _sorted_items(self):
        return tuple(sorted(self.terms.items(), key=lambda kv: kv[0]))


def _same_chart(a, b, attrs):
    return all(getattr(a, x) == getattr(b, x) for x in attrs)


class KoszulElement(_Terms):
    """Element of Λ·F over a chart, keys are e-multi-indices."""

    __slots__ = ("chart", "coords")

    def __init__(self, chart: str, n: int, terms=None, coords: str | None = None):
        super().__init__(n, terms)
        self.chart = chart
        self.coords = coords if coords is not None else chart

    @classmethod
    def zero(cls, chart, n):
        return cls(chart, n)

    @classmethod
    def function(cls, chart, cf: CoeffFunction):
        return cls(chart, cf.n, {(): cf})

    @classmethod
    def basis(cls, chart, n, I, cf=None):
        I = check_multi_index(I, n)
        return cls(chart, n, {I: cf if cf is not None else CoeffFunction.one(n)})

    def _like(self, terms):
        return KoszulElement(self.chart, self.n, terms, self.coords)

    def __add__(self, other):
        if not _same_chart(self, other, ("chart", "coords")):
            raise ChartMismatch("chart mismatch in addition")
        return self._like(self._combined(other))

    def __sub__(self, other):
        if not _same_chart(self, other, ("chart", "coords")):
            raise ChartMismatch("chart mismatch in subtraction")
        return self._like(self._combined(other, negate=True))

    def __neg__(self):
        return self._like(self._scaled(-1))

    def scale(self, c):
        return self._like(self._scaled(c))

    def wedge(self, other: "KoszulElement") -> "KoszulElement":
        if not _same_chart(self, other, ("chart", "coords")):
            raise ChartMismatch("wedge needs matching charts")
        out: dict = {}
        for I, a in self.terms.items():
            for J, b in other.terms.items():
                m = wedge_merge(I, J)
                if m:
                    _accumulate(out, m[1], (a * b) * m[0])
        return self._like(out)

    def contract(self, section: Sequence[CoeffFunction]) -> "KoszulElement":
        """Interior product against sum section[k] ě^{k+1}; lowers degree."""
        out: dict = {}
        for I, a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = remove_index(I, k + 1)
                if m:
                    _accumulate(out, m[1], (a * s) * m[0])
        return self._like(out)

    def contract_dual(self, c: "DualKoszulElement") -> "KoszulElement":
        """Contraction by a degree-1 dual element."""
        if not _same_chart(self, c, ("chart", "coords")):
            raise ChartMismatch("contraction needs matching charts")
        section = [CoeffFunction.zero(self.n) for _ in range(self.n)]
        for J, cf in c.terms.items():
            if len(J) != 1:
                raise ValueError("contraction element must be homogeneous of degree 1")
            section[J[0] - 1] = cf
        return self.contract(section)

    def diff(self, section: Sequence[CoeffFunction]) -> "KoszulElement":
        return self.contract(section)

    def grades(self):
        return sorted({len(I) for I in self.terms})

    def component(self, q: int) -> "KoszulElement":
        return self._like({I: c for I, c in self.terms.items() if len(I) == q})

    def __eq__(self, other):
        return (
            isinstance(other, KoszulElement)
            and (self.chart, self.coords, self.n) == (other.chart, other.coords, other.n)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.chart, self.coords, self.n, self._sorted_items()))

    def to_triples(self):
        return [
            (-len(I), list(I), cf.to_text()) for I, cf in self._sorted_items()
        ]

    def __repr__(self):
        if not self.terms:
            return f"KoszulElement({self.chart}, 0)"
        bits = " + ".join(
            f"({cf.to_text()})e^{''.join(map(str, I)) or '()'}"
            for I, cf in self._sorted_items()
        )
        return f"KoszulElement({self.chart}, {bits})"


class DualKoszulElement(_Terms):
    """Element of Λ·F̌ over a chart, keys are ě-multi-indices."""

    __slots__ = ("chart", "coords")

    def __init__(self, chart: str, n: int, terms=None, coords: str | None = None):
        super().__init__(n, terms)
        self.chart = chart
        self.coords = coords if coords is not None else chart

    @classmethod
    def zero(cls, chart, n):
        return cls(chart, n)

    @classmethod
    def function(cls, chart, cf: CoeffFunction):
        return cls(chart, cf.n, {(): cf})

    @classmethod
    def basis(cls, chart, n, J, cf=None):
        J = check_multi_index(J, n)
        return cls(chart, n, {J: cf if cf is not None else CoeffFunction.one(n)})

    def _like(self, terms):
        return DualKoszulElement(self.chart, self.n, terms, self.coords)

    def __add__(self, other):
        if not _same_chart(self, other, ("chart", "coords")):
            raise ChartMismatch("chart mismatch in addition")
        return self._like(self._combined(other))

    def __sub__(self, other):
        if not _same_chart(self, other, ("chart", "coords")):
            raise ChartMismatch("chart mismatch in subtraction")
        return self._like(self._combined(other, negate=True))

    def __neg__(self):
        return self._like(self._scaled(-1))

    def scale(self, c):
        return self._like(self._scaled(c))

    def wedge_section(self, section: Sequence[CoeffFunction]) -> "DualKoszulElement":
        """Left wedge by sum section[k] ě^{k+1}; raises degree."""
        out: dict = {}
        for J, a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = insert_index(J, k + 1)
                if m:
                    _accumulate(out, m[1], (a * s) * m[0])
        return self._like(out)

    def contract_e(self, section: Sequence[CoeffFunction]) -> "DualKoszulElement":
        """Contraction by sum section[k] e_{k+1} acting on ě-indices."""
        out: dict = {}
        for J, a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = remove_index(J, k + 1)
                if m:
                    _accumulate(out, m[1], (a * s) * m[0])
        return self._like(out)

    def diff(self, section: Sequence[CoeffFunction]) -> "DualKoszulElement":
        return self.wedge_section(section)

    def grades(self):
        return sorted({len(J) for J in self.terms})

    def component(self, q: int) -> "DualKoszulElement":
        return self._like({J: c for J, c in self.terms.items() if len(J) == q})

    def __eq__(self, other):
        return (
            isinstance(other, DualKoszulElement)
            and (self.chart, self.coords, self.n) == (other.chart, other.coords, other.n)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.chart, self.coords, self.n, self._sorted_items()))

    def to_triples(self):
        return [(len(J), list(J), cf.to_text()) for J, cf in self._sorted_items()]

    def __repr__(self):
        if not self.terms:
            return f"DualKoszulElement({self.chart}, 0)"
        bits = " + ".join(
            f"({cf.to_text()})ě^{''.join(map(str, J)) or '()'}"
            for J, cf in self._sorted_items()
        )
        return f"DualKoszulElement({self.chart}, {bits})"


class HomElement(_Terms):
    """Graded map K_source -> K_target; keys are (e-index, ě-index) pairs.

    A term e^I (x) ě^J sends e^J to e^I and everything else to zero; its
    Hom-degree is |J| - |I|.  Coefficients live in the target chart's
    coordinates unless `coords` says otherwise.
    """

    __slots__ = ("target", "source", "coords")

    def __init__(self, target: str, source: str, n: int, terms=None, coords=None):
        super().__init__(n, terms)
        self.target = target
        self.source = source
        self.coords = coords if coords is not None else target

    @classmethod
    def zero(cls, target, source, n):
        return cls(target, source, n)

    @classmethod
    def identity(cls, chart, n):
        return cls(chart, chart, n, {((), ()): CoeffFunction.one(n)})

    @classmethod
    def basis(cls, target, source, n, I, J, cf=None):
        I = check_multi_index(I, n)
        J = check_multi_index(J, n)
        return cls(
            target, source, n, {(I, J): cf if cf is not None else CoeffFunction.one(n)}
        )

    def _like(self, terms):
        return HomElement(self.target, self.source, self.n, terms, self.coords)

    @staticmethod
    def term_degree(key) -> int:
        I, J = key
        return len(J) - len(I)

    def __add__(self, other):
        if not _same_chart(self, other, ("target", "source", "coords")):
            raise ChartMismatch("chart mismatch in addition")
        return self._like(self._combined(other))

    def __sub__(self, other):
        if not _same_chart(self, other, ("target", "source", "coords")):
            raise ChartMismatch("chart mismatch in subtraction")
        return self._like(self._combined(other, negate=True))

    def __neg__(self):
        return self._like(self._scaled(-1))

    def scale(self, c):
        return self._like(self._scaled(c))

    def contract_target(self, section) -> "HomElement":
        """d of the target complex composed on the left: contract the e slot."""
        out: dict = {}
        for (I, J), a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = remove_index(I, k + 1)
                if m:
                    _accumulate(out, (m[1], J), (a * s) * m[0])
        return self._like(out)

    def wedge_source(self, section) -> "HomElement":
        """Right composition with the source differential: wedge the ě slot."""
        out: dict = {}
        for (I, J), a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = insert_index(J, k + 1)
                if m:
                    _accumulate(out, (I, m[1]), (a * s) * m[0])
        return self._like(out)

    def diff(self, target_section, source_section) -> "HomElement":
        """d_Hom f = d_tgt∘f - (-1)^{deg f} f∘d_src, termwise."""
        out = dict(self.contract_target(target_section).terms)
        for (I, J), a in self.terms.items():
            sgn = -1 if (len(J) - len(I)) % 2 == 0 else 1
            for k, s in enumerate(source_section):
                if s.is_zero():
                    continue
                m = insert_index(J, k + 1)
                if m:
                    _accumulate(out, (I, m[1]), (a * s) * (m[0] * sgn))
        return self._like(out)

    def compose(self, other: "HomElement") -> "HomElement":
        """self∘other; other's coefficients must already be in self.coords."""
        if self.source != other.target:
            raise ChartMismatch("hom composition needs source == other.target")
        if self.coords != other.coords:
            raise ChartMismatch("convert coordinates before composing")
        out: dict = {}
        for (I, J), a in self.terms.items():
            for (L, M), b in other.terms.items():
                if J == L:
                    _accumulate(out, (I, M), a * b)
        return HomElement(self.target, other.source, self.n, out, self.coords)

    def apply(self, x: KoszulElement) -> KoszulElement:
        """Evaluate on a Koszul element of the source chart."""
        if self.source != x.chart or self.coords != x.coords:
            raise ChartMismatch("apply needs a source-chart element in same coords")
        out: dict = {}
        for (I, J), a in self.terms.items():
            b = x.terms.get(J)
            if b is not None:
                _accumulate(out, I, a * b)
        return KoszulElement(self.target, self.n, out, self.coords)

    def apply_first(self, t: "TensorElement") -> "TensorElement":
        """Compose into the first tensor factor."""
        if self.source != t.first or self.coords != t.coords:
            raise ChartMismatch("apply_first needs matching first factor")
        out: dict = {}
        for (I, J), a in self.terms.items():
            for (L, M), b in t.terms.items():
                if J == L:
                    _accumulate(out, (I, M), a * b)
        return TensorElement(self.target, t.second, self.n, out, self.coords)

    def grades(self):
        return sorted({self.term_degree(k) for k in self.terms})

    def component(self, q: int) -> "HomElement":
        return self._like(
            {k: c for k, c in self.terms.items() if self.term_degree(k) == q}
        )

    def restrict_diag(self) -> "HomElement":
        return self._like(
            {k: restrict_diagonal(c) for k, c in self.terms.items()}
        )

    def __eq__(self, other):
        return (
            isinstance(other, HomElement)
            and (self.target, self.source, self.coords, self.n)
            == (other.target, other.source, other.coords, other.n)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash(
            (self.target, self.source, self.coords, self.n, self._sorted_items())
        )

    def to_triples(self):
        return [
            (self.term_degree((I, J)), [list(I), list(J)], cf.to_text())
            for (I, J), cf in self._sorted_items()
        ]

    def __repr__(self):
        if not self.terms:
            return f"HomElement({self.target}<-{self.source}, 0)"
        bits = " + ".join(
            f"({cf.to_text()})e^{''.join(map(str, I)) or '()'}(x)ě^{''.join(map(str, J)) or '()'}"
            for (I, J), cf in self._sorted_items()
        )
        return f"HomElement({self.target}<-{self.source}, {bits})"


class DualHomElement(_Terms):
    """Graded map Ǩ_source -> Ǩ_target; keys are (ě-index, e-index) pairs.

    A term ě^J (x) e^M sends ě^M to ě^J; its degree is |J| - |M|.
    """

    __slots__ = ("target", "source", "coords")

    def __init__(self, target: str, source: str, n: int, terms=None, coords=None):
        super().__init__(n, terms)
        self.target = target
        self.source = source
        self.coords = coords if coords is not None else target

    @classmethod
    def zero(cls, target, source, n):
        return cls(target, source, n)

    @classmethod
    def identity(cls, chart, n):
        return cls(chart, chart, n, {((), ()): CoeffFunction.one(n)})

    @classmethod
    def basis(cls, target, source, n, J, M, cf=None):
        J = check_multi_index(J, n)
        M = check_multi_index(M, n)
        return cls(
            target, source, n, {(J, M): cf if cf is not None else CoeffFunction.one(n)}
        )

    def _like(self, terms):
        return DualHomElement(self.target, self.source, self.n, terms, self.coords)

    @staticmethod
    def term_degree(key) -> int:
        J, M = key
        return len(J) - len(M)

    def __add__(self, other):
        if not _same_chart(self, other, ("target", "source", "coords")):
            raise ChartMismatch("chart mismatch in addition")
        return self._like(self._combined(other))

    def __sub__(self, other):
        if not _same_chart(self, other, ("target", "source", "coords")):
            raise ChartMismatch("chart mismatch in subtraction")
        return self._like(self._combined(other, negate=True))

    def __neg__(self):
        return self._like(self._scaled(-1))

    def scale(self, c):
        return self._like(self._scaled(c))

    def wedge_target(self, section) -> "DualHomElement":
        out: dict = {}
        for (J, M), a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = insert_index(J, k + 1)
                if m:
                    _accumulate(out, (m[1], M), (a * s) * m[0])
        return self._like(out)

    def contract_source(self, section) -> "DualHomElement":
        out: dict = {}
        for (J, M), a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = remove_index(M, k + 1)
                if m:
                    _accumulate(out, (J, m[1]), (a * s) * m[0])
        return self._like(out)

    def diff(self, target_section, source_section) -> "DualHomElement":
        out = dict(self.wedge_target(target_section).terms)
        for (J, M), a in self.terms.items():
            sgn = -1 if (len(J) - len(M)) % 2 == 0 else 1
            for k, s in enumerate(source_section):
                if s.is_zero():
                    continue
                m = remove_index(M, k + 1)
                if m:
                    _accumulate(out, (J, m[1]), (a * s) * (m[0] * sgn))
        return self._like(out)

    def compose(self, other: "DualHomElement") -> "DualHomElement":
        if self.source != other.target:
            raise ChartMismatch("dual hom composition chain mismatch")
        if self.coords != other.coords:
            raise ChartMismatch("convert coordinates before composing")
        out: dict = {}
        for (J, M), a in self.terms.items():
            for (J2, M2), b in other.terms.items():
                if M == J2:
                    _accumulate(out, (J, M2), a * b)
        return DualHomElement(self.target, other.source, self.n, out, self.coords)

    def apply(self, x: DualKoszulElement) -> DualKoszulElement:
        if self.source != x.chart or self.coords != x.coords:
            raise ChartMismatch("apply needs a source-chart dual element")
        out: dict = {}
        for (J, M), a in self.terms.items():
            b = x.terms.get(M)
            if b is not None:
                _accumulate(out, J, a * b)
        return DualKoszulElement(self.target, self.n, out, self.coords)

    def grades(self):
        return sorted({self.term_degree(k) for k in self.terms})

    def component(self, q: int) -> "DualHomElement":
        return self._like(
            {k: c for k, c in self.terms.items() if self.term_degree(k) == q}
        )

    def __eq__(self, other):
        return (
            isinstance(other, DualHomElement)
            and (self.target, self.source, self.coords, self.n)
            == (other.target, other.source, other.coords, other.n)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash(
            (self.target, self.source, self.coords, self.n, self._sorted_items())
        )

    def to_triples(self):
        return [
            (self.term_degree((J, M)), [list(J), list(M)], cf.to_text())
            for (J, M), cf in self._sorted_items()
        ]

    def __repr__(self):
        if not self.terms:
            return f"DualHomElement({self.target}<-{self.source}, 0)"
        bits = " + ".join(
            f"({cf.to_text()})ě^{''.join(map(str, J)) or '()'}(x)e^{''.join(map(str, M)) or '()'}"
            for (J, M), cf in self._sorted_items()
        )
        return f"DualHomElement({self.target}<-{self.source}, {bits})"


class TensorElement(_Terms):
    """Element of K_first (x) K_second, equivalently a map Ǩ_second -> K_first."""

    __slots__ = ("first", "second", "coords")

    def __init__(self, first: str, second: str, n: int, terms=None, coords=None):
        super().__init__(n, terms)
        self.first = first
        self.second = second
        self.coords = coords if coords is not None else first

    @classmethod
    def zero(cls, first, second, n):
        return cls(first, second, n)

    @classmethod
    def basis(cls, first, second, n, L, M, cf=None):
        L = check_multi_index(L, n)
        M = check_multi_index(M, n)
        return cls(
            first, second, n, {(L, M): cf if cf is not None else CoeffFunction.one(n)}
        )

    def _like(self, terms):
        return TensorElement(self.first, self.second, self.n, terms, self.coords)

    @staticmethod
    def term_degree(key) -> int:
        L, M = key
        return -(len(L) + len(M))

    def __add__(self, other):
        if not _same_chart(self, other, ("first", "second", "coords")):
            raise ChartMismatch("chart mismatch in addition")
        return self._like(self._combined(other))

    def __sub__(self, other):
        if not _same_chart(self, other, ("first", "second", "coords")):
            raise ChartMismatch("chart mismatch in subtraction")
        return self._like(self._combined(other, negate=True))

    def __neg__(self):
        return self._like(self._scaled(-1))

    def scale(self, c):
        return self._like(self._scaled(c))

    def contract_first(self, section) -> "TensorElement":
        out: dict = {}
        for (L, M), a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = remove_index(L, k + 1)
                if m:
                    _accumulate(out, (m[1], M), (a * s) * m[0])
        return self._like(out)

    def contract_second(self, section) -> "TensorElement":
        out: dict = {}
        for (L, M), a in self.terms.items():
            for k, s in enumerate(section):
                if s.is_zero():
                    continue
                m = remove_index(M, k + 1)
                if m:
                    _accumulate(out, (L, m[1]), (a * s) * m[0])
        return self._like(out)

    def diff(self, first_section, second_section) -> "TensorElement":
        """Map-model differential: contract first + (-1)^{|L|+|M|+1} contract second."""
        out = dict(self.contract_first(first_section).terms)
        for (L, M), a in self.terms.items():
            sgn = -1 if (len(L) + len(M)) % 2 == 0 else 1
            for k, s in enumerate(second_section):
                if s.is_zero():
                    continue
                m = remove_index(M, k + 1)
                if m:
                    _accumulate(out, (L, m[1]), (a * s) * (m[0] * sgn))
        return self._like(out)

    def compose_dual(self, g: DualHomElement) -> "TensorElement":
        """Right composition with a dual Hom element into the second factor."""
        if self.second != g.target:
            raise ChartMismatch("tensor/dual-hom chain mismatch")
        if self.coords != g.coords:
            raise ChartMismatch("convert coordinates before composing")
        out: dict = {}
        for (L, M), a in self.terms.items():
            for (J, M2), b in g.terms.items():
                if M == J:
                    _accumulate(out, (L, M2), a * b)
        return TensorElement(self.first, g.source, self.n, out, self.coords)

    def tensor_mul(self, other: "TensorElement") -> "TensorElement":
        """Graded product (x (x) y)(x' (x) y') = (-1)^{|y||x'|} (x∧x') (x) (y∧y')."""
        if not _same_chart(self, other, ("first", "second", "coords")):
            raise ChartMismatch("tensor product needs matching charts")
        out: dict = {}
        for (L, M), a in self.terms.items():
            for (L2, M2), b in other.terms.items():
                wl = wedge_merge(L, L2)
                wm = wedge_merge(M, M2)
                if wl and wm:
                    sgn = wl[0] * wm[0] * (-1 if (len(M) * len(L2)) % 2 else 1)
                    _accumulate(out, (wl[1], wm[1]), (a * b) * sgn)
        return self._like(out)

    def grades(self):
        return sorted({self.term_degree(k) for k in self.terms})

    def component(self, q: int) -> "TensorElement":
        return self._like(
            {k: c for k, c in self.terms.items() if self.term_degree(k) == q}
        )

    def __eq__(self, other):
        return (
            isinstance(other, TensorElement)
            and (self.first, self.second, self.coords, self.n)
            == (other.first, other.second, other.coords, other.n)
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash(
            (self.first, self.second, self.coords, self.n, self._sorted_items())
        )

    def to_triples(self):
        return [
            (self.term_degree((L, M)), [list(L), list(M)], cf.to_text())
            for (L, M), cf in self._sorted_items()
        ]

    def __repr__(self):
        if not self.terms:
            return f"TensorElement({self.first}(x){self.second}, 0)"
        bits = " + ".join(
            f"({cf.to_text()})e^{''.join(map(str, L)) or '()'}(x)e^{''.join(map(str, M)) or '()'}"
            for (L, M), cf in self._sorted_items()
        )
        return f"TensorElement({self.first}(x){self.second}, {bits})"
