"""Chain homotopies for the local complexes.

The homotopy on a diagonal chart integrates coefficients along the segment
z -> zeta + t(z - zeta) and wedges a generator into the leading slot; on an
off-diagonal chart it is wedge (resp. contraction) by the first generator.
The residue projections pick out the exterior degree where the local
cohomology sits and restrict coefficients to the diagonal.

`hom_homotopy` and `homotopy_defect` implement the alternating operator
series for Hom-type complexes.  Both work uniformly for HomElement,
DualHomElement and TensorElement values; the series terminates because the
slot operator strictly moves the second index toward its bound.
"""

from __future__ import annotations

from typing import Sequence

from .coeffring import (
    CoeffFunction,
    integrate_weighted,
    restrict_diagonal,
    segment_substitute,
)
from .koszul import (
    DualHomElement,
    DualKoszulElement,
    HomElement,
    KoszulElement,
    TensorElement,
    insert_index,
    remove_index,
)

__all__ = [
    "koszul_homotopy",
    "dual_homotopy",
    "degree_zero_restriction",
    "top_degree_restriction",
    "hom_homotopy",
    "homotopy_defect",
]


def _integral_coeff(cf: CoeffFunction, j: int, weight: int) -> CoeffFunction:
    g = cf.partial(j)
    if g.is_zero():
        return g
    return integrate_weighted(segment_substitute(g), weight)


def koszul_homotopy(x, offdiag: bool = False):
    """Degree-raising homotopy on the e-slot (weight = current e-degree)."""
    n = x.n
    out: dict = {}
    if isinstance(x, KoszulElement):
        for I, cf in x.terms.items():
            if offdiag:
                m = insert_index(I, 1)
                if m:
                    _acc(out, m[1], cf * m[0])
                continue
            for j in range(n):
                w = _integral_coeff(cf, j, len(I))
                if w.is_zero():
                    continue
                m = insert_index(I, j + 1)
                if m:
                    _acc(out, m[1], w * m[0])
        return KoszulElement(x.chart, n, out, x.coords)
    if isinstance(x, HomElement):
        for (I, J), cf in x.terms.items():
            if offdiag:
                m = insert_index(I, 1)
                if m:
                    _acc(out, (m[1], J), cf * m[0])
                continue
            for j in range(n):
                w = _integral_coeff(cf, j, len(I))
                if w.is_zero():
                    continue
                m = insert_index(I, j + 1)
                if m:
                    _acc(out, (m[1], J), w * m[0])
        return HomElement(x.target, x.source, n, out, x.coords)
    if isinstance(x, TensorElement):
        for (L, M), cf in x.terms.items():
            if offdiag:
                m = insert_index(L, 1)
                if m:
                    _acc(out, (m[1], M), cf * m[0])
                continue
            for j in range(n):
                w = _integral_coeff(cf, j, len(L))
                if w.is_zero():
                    continue
                m = insert_index(L, j + 1)
                if m:
                    _acc(out, (m[1], M), w * m[0])
        return TensorElement(x.first, x.second, n, out, x.coords)
    raise TypeError(f"no Koszul homotopy for {type(x).__name__}")


def dual_homotopy(x, offdiag: bool = False):
    """Degree-lowering homotopy on the ě-slot (weight = n - current degree)."""
    n = x.n
    out: dict = {}
    if isinstance(x, DualKoszulElement):
        for J, cf in x.terms.items():
            if offdiag:
                m = remove_index(J, 1)
                if m:
                    _acc(out, m[1], cf * m[0])
                continue
            for j in range(n):
                w = _integral_coeff(cf, j, n - len(J))
                if w.is_zero():
                    continue
                m = remove_index(J, j + 1)
                if m:
                    _acc(out, m[1], w * m[0])
        return DualKoszulElement(x.chart, n, out, x.coords)
    if isinstance(x, DualHomElement):
        for (J, M), cf in x.terms.items():
            if offdiag:
                m = remove_index(J, 1)
                if m:
                    _acc(out, (m[1], M), cf * m[0])
                continue
            for j in range(n):
                w = _integral_coeff(cf, j, n - len(J))
                if w.is_zero():
                    continue
                m = remove_index(J, j + 1)
                if m:
                    _acc(out, (m[1], M), w * m[0])
        return DualHomElement(x.target, x.source, n, out, x.coords)
    raise TypeError(f"no dual homotopy for {type(x).__name__}")


def degree_zero_restriction(x, offdiag: bool = False, block: str = "zeta"):
    """Projection onto exterior degree 0 of the e-slot, coefficients on the diagonal.

    The homotopy identities hold with the zeta-block parameterization of the
    diagonal (the default); block="z" gives the forms-side reading.
    """
    n = x.n
    if isinstance(x, KoszulElement):
        if offdiag:
            return KoszulElement.zero(x.chart, n)
        out = {
            I: restrict_diagonal(cf, block) for I, cf in x.terms.items() if len(I) == 0
        }
        return KoszulElement(x.chart, n, out, x.coords)
    if isinstance(x, HomElement):
        if offdiag:
            return HomElement.zero(x.target, x.source, n)
        out = {
            (I, J): restrict_diagonal(cf, block)
            for (I, J), cf in x.terms.items()
            if len(I) == 0
        }
        return HomElement(x.target, x.source, n, out, x.coords)
    if isinstance(x, TensorElement):
        if offdiag:
            return TensorElement.zero(x.first, x.second, n)
        out = {
            (L, M): restrict_diagonal(cf, block)
            for (L, M), cf in x.terms.items()
            if len(L) == 0
        }
        return TensorElement(x.first, x.second, n, out, x.coords)
    raise TypeError(f"no residue projection for {type(x).__name__}")


def top_degree_restriction(x, offdiag: bool = False, block: str = "zeta"):
    """Projection onto top ě-degree, coefficients restricted to the diagonal.

    Defaults to the zeta-block parameterization (see degree_zero_restriction).
    """
    n = x.n
    full = tuple(range(1, n + 1))
    if isinstance(x, DualKoszulElement):
        if offdiag:
            return DualKoszulElement.zero(x.chart, n)
        out = {
            J: restrict_diagonal(cf, block) for J, cf in x.terms.items() if J == full
        }
        return DualKoszulElement(x.chart, n, out, x.coords)
    if isinstance(x, DualHomElement):
        if offdiag:
            return DualHomElement.zero(x.target, x.source, n)
        out = {
            (J, M): restrict_diagonal(cf, block)
            for (J, M), cf in x.terms.items()
            if J == full
        }
        return DualHomElement(x.target, x.source, n, out, x.coords)
    raise TypeError(f"no top-degree projection for {type(x).__name__}")


def _acc(acc: dict, key, cf: CoeffFunction):
    got = acc.get(key)
    s = cf if got is None else got + cf
    if s.is_zero():
        acc.pop(key, None)
    else:
        acc[key] = s


def _zero_section(n: int) -> list[CoeffFunction]:
    return [CoeffFunction.zero(n)] * n


def _signed_source_op(f, source_section):
    """The signed adjoint of the source differential on the second slot.

    For every flavor this is `diff` with the target section zeroed out:
    the composite the operator series alternates with.
    """
    zs = _zero_section(f.n)
    if isinstance(f, HomElement):
        return f.diff(zs, source_section)
    if isinstance(f, DualHomElement):
        return f.diff(zs, source_section)
    if isinstance(f, TensorElement):
        return f.diff(zs, source_section)
    raise TypeError(f"no source operator for {type(f).__name__}")


def _slot_homotopy(f, offdiag: bool):
    if isinstance(f, DualHomElement):
        return dual_homotopy(f, offdiag)
    return koszul_homotopy(f, offdiag)


def _slot_restriction(f, offdiag: bool):
    if isinstance(f, DualHomElement):
        return top_degree_restriction(f, offdiag)
    return degree_zero_restriction(f, offdiag)


def hom_homotopy(f, source_section: Sequence[CoeffFunction], offdiag: bool = False):
    """Alternating homotopy series for Hom-type values.

    Applies the leading-slot homotopy, then corrects by alternating with the
    signed source operator.  At most n+1 nonzero passes can occur; more
    indicates a degree-bookkeeping bug and raises.
    """
    total = None
    cur = _slot_homotopy(f, offdiag)
    sign = 1
    rounds = 0
    while not cur.is_zero():
        if rounds > f.n + 1:
            raise RuntimeError("homotopy series failed to terminate")
        piece = cur if sign > 0 else -cur
        total = piece if total is None else total + piece
        cur = _slot_homotopy(_signed_source_op(cur, source_section), offdiag)
        sign = -sign
        rounds += 1
    return total if total is not None else cur


def homotopy_defect(f, source_section: Sequence[CoeffFunction], offdiag: bool = False):
    """The projection-like defect in the Hom homotopy identity.

    Satisfies d∘H + H∘d = 1 - defect for the flavored differential d and
    homotopy series H, exactly.  The series alternates the residue with the
    bare slot homotopy; pushing the slot identity through the full series
    shows this is the defect (the full-series variant differs from degree
    two onward and breaks the identity for n >= 2).
    """
    total = None
    cur = _slot_restriction(f, offdiag)
    sign = 1
    rounds = 0
    while not cur.is_zero():
        if rounds > f.n + 1:
            raise RuntimeError("defect series failed to terminate")
        piece = cur if sign > 0 else -cur
        total = piece if total is None else total + piece
        cur = _slot_homotopy(_signed_source_op(cur, source_section), offdiag)
        sign = -sign
        rounds += 1
    if total is None:
        return cur
    return total
