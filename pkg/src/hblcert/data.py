"""HBL data model: exponent/map bundles, slack checks and data transforms.

A datum is an ambient dimension m, a list of named rational maps out of Q^m,
and one exponent in [0,1] per map. The dimension inequalities
dim V <= sum_i tau_i dim pi_i(V), with equality at V = H, are checked over
finite candidate families of subspaces generated by lattice closure; the
verifier downstream, not the lattice, is the source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from hblcert.linalg import Matrix, Subspace, image

VIOLATING = "violating"
CRITICAL = "critical"
SCALING = "scaling"
SLACK_POSITIVE = "slack-positive"


@dataclass(frozen=True)
class HBLDatum:
    dim: int
    maps: tuple[Matrix, ...]
    names: tuple[str, ...]
    exponents: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        n = len(self.maps)
        if n < 1:
            raise ValueError("datum needs at least one map")
        if len(self.names) != n or len(self.exponents) != n:
            raise ValueError("maps, names and exponents must have equal length")
        for m in self.maps:
            if m.cols != self.dim:
                raise ValueError("map domain does not match ambient dimension")
        for t in self.exponents:
            if not (0 <= t <= 1):
                raise ValueError(f"exponent {t} outside [0,1]")

    @property
    def n_maps(self) -> int:
        return len(self.maps)

    @cached_property
    def ranks(self) -> tuple[int, ...]:
        return tuple(m.rank for m in self.maps)

    def with_exponents(self, exponents: tuple[Fraction, ...]) -> HBLDatum:
        return HBLDatum(self.dim, self.maps, self.names, tuple(exponents))


@dataclass(frozen=True)
class SlackReport:
    subspace: Subspace
    slack: Fraction
    classification: str


def check_scaling(datum: HBLDatum) -> tuple[bool, Fraction, Fraction]:
    """Scaling equality dim H = sum_i tau_i rank(pi_i); returns (holds, lhs, rhs)."""
    lhs = Fraction(datum.dim)
    rhs = sum(
        (t * r for t, r in zip(datum.exponents, datum.ranks)), Fraction(0)
    )
    return lhs == rhs, lhs, rhs


def subspace_slack(datum: HBLDatum, v: Subspace) -> SlackReport:
    """Exact slack sum_i tau_i dim pi_i(V) - dim V with its classification."""
    if v.ambient != datum.dim:
        raise ValueError("subspace ambient does not match datum dimension")
    slack = sum(
        (t * image(m, v).dim for t, m in zip(datum.exponents, datum.maps)),
        Fraction(0),
    ) - v.dim
    if v.is_full():
        cls = SCALING
    elif slack < 0:
        cls = VIOLATING
    elif slack == 0 and 0 < v.dim < datum.dim:
        cls = CRITICAL
    else:
        cls = SLACK_POSITIVE
    return SlackReport(v, slack, cls)


@dataclass(frozen=True)
class CandidateLattice:
    """Finite surrogate for "all subspaces": a deduplicated family with provenance.

    Order is insertion order ({0}, H, kernels, seeds, then closure products);
    `closed` records whether sum/intersection closure reached a fixpoint
    before the size cap.
    """

    subspaces: tuple[Subspace, ...]
    closed: bool
    generation_log: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.subspaces)) != len(self.subspaces):
            raise ValueError("duplicate subspaces in candidate lattice")

    @staticmethod
    def from_subspaces(ambient: int, subspaces, closed: bool | None = None) -> CandidateLattice:
        subs: list[Subspace] = [Subspace.zero(ambient), Subspace.full(ambient)]
        log = ["zero", "full"]
        for s in subspaces:
            if s not in subs:
                subs.append(s)
                log.append("given")
        if closed is None:
            closed = _is_closed(subs)
        return CandidateLattice(tuple(subs), closed, tuple(log))


def _is_closed(subs: list[Subspace]) -> bool:
    present = set(subs)
    for i, a in enumerate(subs):
        for b in subs[: i + 1]:
            if (a + b) not in present or (a & b) not in present:
                return False
    return True


def generate_lattice(datum: HBLDatum, seeds=(), max_size: int = 512) -> CandidateLattice:
    """Close {0}, H, all kernels and the seeds under pairwise sum and intersection.

    Stops at a fixpoint or once max_size subspaces have been collected; the
    truncated case is reported through closed=False, not as an error.
    """
    if max_size < 2:
        raise ValueError("max_size must be at least 2")
    subs: list[Subspace] = []
    log: list[str] = []
    seen: set[Subspace] = set()
    overflow = False

    def push(s: Subspace, why: str) -> None:
        nonlocal overflow
        if s in seen:
            return
        if len(subs) >= max_size:
            overflow = True
            return
        subs.append(s)
        log.append(why)
        seen.add(s)

    push(Subspace.zero(datum.dim), "zero")
    push(Subspace.full(datum.dim), "full")
    from hblcert.linalg import kernel

    for name, m in zip(datum.names, datum.maps):
        push(kernel(m), f"kernel of {name}")
    for k, s in enumerate(seeds):
        if s.ambient != datum.dim:
            raise ValueError("seed ambient does not match datum dimension")
        push(s, f"seed[{k}]")

    # Each unordered pair is examined exactly once, when its later element
    # becomes the processed one.
    processed = 0
    while processed < len(subs) and not overflow:
        a = subs[processed]
        for j in range(processed + 1):
            b = subs[j]
            push(a + b, f"sum({j},{processed})")
            if overflow:
                break
            push(a & b, f"intersect({j},{processed})")
            if overflow:
                break
        processed += 1
    return CandidateLattice(tuple(subs), not overflow, tuple(log))


def find_violation(datum: HBLDatum, candidates: CandidateLattice) -> SlackReport | None:
    """First scaling failure or negative-slack candidate in stored order, if any."""
    holds, _, _ = check_scaling(datum)
    if not holds:
        return subspace_slack(datum, Subspace.full(datum.dim))
    for v in candidates.subspaces:
        report = subspace_slack(datum, v)
        if report.slack < 0:
            return report
    return None


def find_critical(datum: HBLDatum, candidates: CandidateLattice) -> list[SlackReport]:
    """All zero-slack proper candidates, sorted by dimension then basis."""
    out = [
        subspace_slack(datum, v)
        for v in candidates.subspaces
        if 0 < v.dim < datum.dim
    ]
    criticals = [r for r in out if r.classification == CRITICAL]
    criticals.sort(key=lambda r: r.subspace.sort_key)
    return criticals


def restrict_datum(datum: HBLDatum, v: Subspace) -> tuple[HBLDatum, Matrix]:
    """Datum obtained by integrating over V instead of H.

    The new ambient space is Q^(dim V) via the chart whose columns are the
    RREF basis of V; maps compose with the chart and exponents are unchanged.
    Dimension counts of images agree with the originals on corresponding
    subspaces, which is all downstream consumers use.
    """
    if v.ambient != datum.dim:
        raise ValueError("subspace ambient does not match datum dimension")
    if v.dim == 0:
        raise ValueError("cannot restrict to the zero subspace")
    embedding = v.basis.transpose()
    maps = tuple(m @ embedding for m in datum.maps)
    return HBLDatum(v.dim, maps, datum.names, datum.exponents), embedding


def quotient_datum(datum: HBLDatum, v: Subspace) -> tuple[HBLDatum, Matrix]:
    """Datum on the orthogonal complement of V with maps projected off pi_i(V).

    Each map becomes P_i pi_i restricted to V-perp, where P_i is orthogonal
    projection onto the complement of pi_i(V); this realizes the identity
    dim P_i pi_i(W) = dim pi_i(W + V) - dim pi_i(V) for W inside V-perp.
    """
    if v.ambient != datum.dim:
        raise ValueError("subspace ambient does not match datum dimension")
    if v.is_full():
        raise ValueError("cannot quotient by the full space")
    vperp = v.perp()
    embedding = vperp.basis.transpose()
    maps = []
    for m in datum.maps:
        img = image(m, v)
        p_perp = Matrix.identity(m.rows) - img.projector()
        maps.append(p_perp @ m @ embedding)
    return HBLDatum(vperp.dim, tuple(maps), datum.names, datum.exponents), embedding


def transform_datum(datum: HBLDatum, t: Matrix, s_list) -> HBLDatum:
    """Change of variables: maps become S_i pi_i T^-1, exponents unchanged."""
    if t.rows != datum.dim or t.cols != datum.dim:
        raise ValueError("T must be square of the ambient dimension")
    t_inv = t.inverse()
    s_list = list(s_list)
    if len(s_list) != datum.n_maps:
        raise ValueError("need one codomain transform per map")
    maps = []
    for m, s in zip(datum.maps, s_list):
        if s.rows != m.rows or s.cols != m.rows:
            raise ValueError("codomain transform has the wrong shape")
        s.inverse()  # raises on singular input
        maps.append(s @ m @ t_inv)
    return HBLDatum(datum.dim, tuple(maps), datum.names, datum.exponents)
