"""Zeeman-resolved coupling structure of the rubidium N scheme.

Four hyperfine manifolds take part::

    a  5S1/2 F=1     b  5S1/2 F=2     c  5P1/2 F=2     d  5P3/2 F=2

``C1`` drives a-d, ``C2`` drives a-c and the probe ``P`` drives b-d. The
quantisation axis lies along the common polarisation of ``C2`` and ``P``, so
those two are pure pi light while a perpendicular ``C1`` is an equal
superposition of sigma+ and sigma-.

Amplitudes are kept as exact sympy expressions (square roots of rationals)
so that squared line strengths compare as exact rationals.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, sqrt

import numpy as np
import sympy

from .dressed import DriveConfig
from .errors import InvalidQuantumNumbers, NotAnNConfiguration

MANIFOLD_F = {"a": 1, "b": 2, "c": 2, "d": 2}
FIELDS = {"C1": ("a", "d"), "C2": ("a", "c"), "P": ("b", "d")}
COUPLING_FIELDS = ("C1", "C2")
GROUND = ("a", "b")


def _check_qn(F, m, q, Fp, mp):
    for name, v in (("F", F), ("m", m), ("q", q), ("F'", Fp), ("m'", mp)):
        if int(v) != v:
            raise InvalidQuantumNumbers(f"{name} = {v!r} is not an integer")
    if F < 0 or Fp < 0:
        raise InvalidQuantumNumbers("F and F' must be non-negative")
    if abs(m) > F or abs(mp) > Fp:
        raise InvalidQuantumNumbers(f"|m| <= F violated: F={F}, m={m}, F'={Fp}, m'={mp}")
    if q not in (-1, 0, 1):
        raise InvalidQuantumNumbers(f"q must be -1, 0 or 1, got {q!r}")


def _cg_parts(j1, m1, j2, m2, J, M) -> tuple[int, Fraction]:
    """Sign and square of <j1 m1; j2 m2 | J M> from the Racah sum (integer j)."""
    if M != m1 + m2 or not abs(j1 - j2) <= J <= j1 + j2:
        return 0, Fraction(0)
    f = factorial
    pre = Fraction(
        (2 * J + 1) * f(J + j1 - j2) * f(J - j1 + j2) * f(j1 + j2 - J) * f(J + M) * f(J - M)
        * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2),
        f(j1 + j2 + J + 1),
    )
    total = Fraction(0)
    for k in range(0, j1 + j2 - J + 1):
        den = (j1 + j2 - J - k, j1 - m1 - k, j2 + m2 - k, J - j2 + m1 + k, J - j1 - m2 + k)
        if min(den) < 0:
            continue
        term = Fraction(1, f(k) * f(den[0]) * f(den[1]) * f(den[2]) * f(den[3]) * f(den[4]))
        total += -term if k % 2 else term
    if total == 0:
        return 0, Fraction(0)
    return (1 if total > 0 else -1), pre * total * total


def clebsch_gordan_squared(F: int, m: int, q: int, Fp: int, mp: int) -> Fraction:
    """Exact <F m; 1 q | F' m'>^2 as a rational."""
    _check_qn(F, m, q, Fp, mp)
    return _cg_parts(int(F), int(m), 1, int(q), int(Fp), int(mp))[1]


def clebsch_gordan(F: int, m: int, q: int, Fp: int, mp: int, exact: bool = False):
    """Clebsch-Gordan coefficient <F m; 1 q | F' m'> (Condon-Shortley phase).

    Returns a float, or a sympy expression when ``exact`` is true.

    Examples
    --------
    >>> clebsch_gordan(1, 1, -1, 2, 0) ** 2
    0.16666666666666666
    """
    _check_qn(F, m, q, Fp, mp)
    sign, sq = _cg_parts(int(F), int(m), 1, int(q), int(Fp), int(mp))
    if exact:
        return sign * sympy.sqrt(sympy.Rational(sq.numerator, sq.denominator))
    return sign * sqrt(sq)


@dataclass(frozen=True)
class PolarizationScheme:
    """Spherical components (q = -1, 0, +1) of each field's polarisation."""

    c1: tuple
    c2: tuple
    p: tuple
    name: str = "custom"

    def __post_init__(self):
        for label in ("c1", "c2", "p"):
            amps = tuple(sympy.sympify(a) for a in getattr(self, label))
            if len(amps) != 3:
                raise ValueError(f"{label}: need three spherical components")
            norm = sympy.nsimplify(sum(sympy.expand(a * sympy.conjugate(a)) for a in amps))
            if abs(float(norm) - 1.0) > 1e-12:
                raise ValueError(f"{label}: polarisation not normalised (|e|^2 = {norm})")
            object.__setattr__(self, label, amps)

    def for_field(self, name: str) -> tuple:
        return {"C1": self.c1, "C2": self.c2, "P": self.p}[name]


_S = 1 / sympy.sqrt(2)
PI = (0, 1, 0)
# C1 perpendicular to the axis. The relative sign of the sigma components is
# the one for which the |m,+-> / alpha / beta basis separates the couplings.
PERPENDICULAR = (_S, 0, _S)

SCHEMES = {
    "orthogonal": PolarizationScheme(PERPENDICULAR, PI, PI, name="orthogonal"),
    "parallel": PolarizationScheme(PI, PI, PI, name="parallel"),
}


@dataclass(frozen=True, order=True)
class State:
    manifold: str
    label: str

    def __str__(self):
        return f"|{self.label}>_{self.manifold}"


@dataclass(frozen=True)
class Edge:
    lower: State
    upper: State
    field: str
    amplitude: sympy.Expr

    @property
    def value(self) -> float:
        return float(self.amplitude)

    @property
    def strength(self) -> sympy.Expr:
        """Exact squared amplitude."""
        return sympy.nsimplify(sympy.expand(self.amplitude * sympy.conjugate(self.amplitude)))

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "lower": str(self.lower),
            "upper": str(self.upper),
            "amplitude": self.value,
            "amplitude2": float(self.strength),
            "amplitude2_exact": str(self.strength),
        }


@dataclass(frozen=True)
class CouplingGraph:
    states: tuple[State, ...]
    edges: tuple[Edge, ...]
    basis: str = "angular"

    def edges_for(self, field_name: str) -> list[Edge]:
        return [e for e in self.edges if e.field == field_name]

    def degree(self, state: State) -> int:
        return sum(1 for e in self.edges if state in (e.lower, e.upper))


def _m_label(m: int) -> str:
    return str(m)


def angular_states(manifold: str) -> list[State]:
    F = MANIFOLD_F[manifold]
    return [State(manifold, _m_label(m)) for m in range(-F, F + 1)]


def build_coupling_graph(scheme: PolarizationScheme) -> CouplingGraph:
    """Every nonzero (CG x polarisation) coupling in the angular-momentum basis."""
    edges = []
    for name, (lo, up) in FIELDS.items():
        F, Fp = MANIFOLD_F[lo], MANIFOLD_F[up]
        pol = scheme.for_field(name)
        for m in range(-F, F + 1):
            for q, weight in zip((-1, 0, 1), pol):
                mp = m + q
                if weight == 0 or abs(mp) > Fp:
                    continue
                amp = sympy.nsimplify(clebsch_gordan(F, m, q, Fp, mp, exact=True) * weight)
                if amp != 0:
                    edges.append(Edge(State(lo, _m_label(m)), State(up, _m_label(mp)), name, amp))
    states = tuple(s for mf in "abcd" for s in angular_states(mf))
    return CouplingGraph(states, tuple(edges), "angular")


def basis_change(manifold: str, mix_alpha_beta: bool = True) -> tuple[list[State], sympy.Matrix]:
    """New states and the orthogonal matrix U (rows: new states, columns: m = -F..F).

    ``|m,+-> = (|m> +- |-m>)/sqrt(2)`` for m > 0, ``|0>`` unchanged; in ``d``
    the pair ``|0>, |2,+>`` is further rotated into ``|alpha>, |beta>``.
    """
    F = MANIFOLD_F[manifold]
    dim = 2 * F + 1
    col = {m: m + F for m in range(-F, F + 1)}
    rows: dict[str, list] = {}
    zero = [0] * dim
    zero[col[0]] = 1
    rows["0"] = zero
    for m in range(1, F + 1):
        for sgn, tag in ((1, "+"), (-1, "-")):
            r = [0] * dim
            r[col[m]] = _S
            r[col[-m]] = sgn * _S
            rows[f"{m},{tag}"] = r
    if manifold == "d" and mix_alpha_beta:
        half, root = sympy.Rational(1, 2), sympy.sqrt(3) / 2
        z, t = rows.pop("0"), rows.pop("2,+")
        rows = {
            "alpha": [half * u + root * v for u, v in zip(z, t)],
            "beta": [root * u - half * v for u, v in zip(z, t)],
            **rows,
        }
    labels = list(rows)
    return [State(manifold, lab) for lab in labels], sympy.Matrix([rows[lab] for lab in labels])


def transform_basis(graph: CouplingGraph, mix_alpha_beta: bool = True) -> CouplingGraph:
    """Re-express an angular-momentum-basis graph in the symmetric/antisymmetric basis."""
    if graph.basis != "angular":
        raise ValueError("graph is already transformed")
    new_states, mats = {}, {}
    for mf in "abcd":
        st, U = basis_change(mf, mix_alpha_beta)
        gram = np.array((U * U.T).evalf(), dtype=float)
        if np.abs(gram - np.eye(len(st))).max() > 1e-12:
            raise ArithmeticError(f"basis change for {mf} is not orthogonal")
        new_states[mf], mats[mf] = st, U
    old_index = {mf: {s: i for i, s in enumerate(angular_states(mf))} for mf in "abcd"}

    edges = []
    for name, (lo, up) in FIELDS.items():
        M = sympy.zeros(len(old_index[up]), len(old_index[lo]))
        for e in graph.edges_for(name):
            M[old_index[up][e.upper], old_index[lo][e.lower]] += e.amplitude
        Mn = mats[up] * M * mats[lo].T
        for i, j in itertools.product(range(Mn.rows), range(Mn.cols)):
            amp = sympy.radsimp(sympy.nsimplify(sympy.expand(Mn[i, j])))
            if amp != 0:
                edges.append(Edge(new_states[lo][j], new_states[up][i], name, amp))
    states = tuple(s for mf in "abcd" for s in new_states[mf])
    return CouplingGraph(states, tuple(edges), "transformed")


@dataclass
class Component:
    """A connected piece of the coupling graph.

    ``kind`` is one of ``N``, ``N+extra`` (an N plus uncoupled probe edges
    on its ``b`` state), ``V`` (coupling fields only), ``probe-only``,
    ``isolated`` or ``other``.
    """

    kind: str
    states: list[State]
    edges: list[Edge]
    extra_edges: list[Edge] = field(default_factory=list)

    def edge(self, field_name: str) -> Edge:
        hits = [e for e in self.edges if e.field == field_name and e not in self.extra_edges]
        if len(hits) != 1:
            raise NotAnNConfiguration(f"component has {len(hits)} {field_name} edges")
        return hits[0]

    @property
    def is_n(self) -> bool:
        return self.kind in ("N", "N+extra")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "states": [str(s) for s in self.states],
            "edges": [e.to_dict() for e in self.edges],
            "extra_edges": [e.to_dict() for e in self.extra_edges],
        }


@dataclass
class Decomposition:
    components: list[Component]
    uncoupled: list[Edge]
    dark: list[State]
    basis: str = "transformed"

    @property
    def n_components(self) -> list[Component]:
        return [c for c in self.components if c.is_n]

    def to_dict(self) -> dict:
        return {
            "basis": self.basis,
            "components": [c.to_dict() for c in self.components],
            "uncoupled": [e.to_dict() for e in self.uncoupled],
            "dark": [str(s) for s in self.dark],
            "counts": {
                kind: sum(1 for c in self.components if c.kind == kind)
                for kind in ("N", "N+extra", "V", "probe-only", "isolated", "other")
            },
        }


def _classify(core: list[Edge], extra: list[Edge], states: list[State]) -> str:
    fields = sorted(e.field for e in core)
    if not core and not extra:
        return "isolated"
    if not any(f in COUPLING_FIELDS for f in fields):
        return "probe-only"
    by_manifold = {mf: [s for s in states if s.manifold == mf] for mf in "abcd"}
    if fields == ["C1", "C2", "P"] and all(len(by_manifold[mf]) == 1 for mf in "acd"):
        core_b = {e.lower for e in core if e.field == "P"}
        if len(core_b) == 1:
            return "N+extra" if extra else "N"
    if fields == ["C1", "C2"] and not extra and len(states) == 3:
        return "V"
    return "other"


def decompose(graph: CouplingGraph) -> Decomposition:
    """Split a coupling graph into N subsystems, uncoupled absorptions and dark states.

    A probe edge is an uncoupled absorption when its upper state carries no
    C1/C2 edge. Components are the connected pieces of the full graph, so
    they partition the states.
    """
    coupled_upper = {e.upper for e in graph.edges if e.field in COUPLING_FIELDS}
    uncoupled = [e for e in graph.edges if e.field == "P" and e.upper not in coupled_upper]

    parent = {s: s for s in graph.states}

    def find(s):
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    for e in graph.edges:
        ra, rb = find(e.lower), find(e.upper)
        if ra != rb:
            parent[ra] = rb
    groups: dict[State, list[State]] = {}
    for s in graph.states:
        groups.setdefault(find(s), []).append(s)

    components = []
    for members in groups.values():
        member_set = set(members)
        edges = [e for e in graph.edges if e.lower in member_set]
        has_coupling = any(e.field in COUPLING_FIELDS for e in edges)
        extra = [e for e in edges if e in uncoupled] if has_coupling else []
        core = [e for e in edges if e not in extra]
        if has_coupling:
            core_states = {s for e in core for s in (e.lower, e.upper)}
        else:
            core_states = member_set
        kind = _classify(core, extra, sorted(core_states))
        components.append(Component(kind, sorted(members), edges, extra))
    order = {"N": 0, "N+extra": 0, "V": 1, "other": 2, "probe-only": 3, "isolated": 4}
    components.sort(key=lambda c: (order[c.kind], c.states))
    dark = sorted(s for s in graph.states if s.manifold in GROUND and graph.degree(s) == 0)
    return Decomposition(components, uncoupled, dark, graph.basis)


@dataclass
class EffectiveN:
    drives: list[DriveConfig]
    probe_rabi: list[float]
    splittings: list[float]

    @property
    def spread(self) -> float:
        """(max - min) / mean of the Autler-Townes splittings."""
        s = np.asarray(self.splittings)
        return float((s.max() - s.min()) / s.mean())


def effective_n_parameters(decomp: Decomposition, base_rabi: dict, delta1: float = 0.0, delta2: float = 0.0) -> EffectiveN:
    """Per-subsystem Rabi frequencies: base Rabi frequency times the effective CG amplitude.

    ``base_rabi`` maps field names (``C1``, ``C2`` and optionally ``P``) to MHz.
    """
    comps = decomp.n_components
    if not comps:
        raise NotAnNConfiguration("decomposition contains no N configuration")
    drives, probes, splits = [], [], []
    for comp in comps:
        o1 = base_rabi["C1"] * abs(comp.edge("C1").value)
        o2 = base_rabi["C2"] * abs(comp.edge("C2").value)
        drives.append(DriveConfig(o1, o2, delta1, delta2))
        probes.append(base_rabi.get("P", 0.0) * abs(comp.edge("P").value))
        splits.append(float(np.hypot(o1, o2)))
    return EffectiveN(drives, probes, splits)


def analyse_scheme(name: str) -> Decomposition:
    """Decomposition for a named scheme in the basis where its structure is simplest."""
    graph = build_coupling_graph(SCHEMES[name])
    if name == "orthogonal":
        graph = transform_basis(graph)
    return decompose(graph)
