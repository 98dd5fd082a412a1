"""Cluster states of encoded modes: generation, stabilizers and teleportation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .cavity import CavityModel
from .codes import PAULI, BinomialCode, logical_state, loss_code
from .fock import HilbertSpec, StateVector, apply_local
from .gates import entangle, ideal_cz
from .register import BranchRegister, DenseRegister

Strategy = Literal["per-edge", "star-optimized"]

MAX_VERTICES = 5
DENSE_MODE_LIMIT = 3


@dataclass(frozen=True)
class ClusterGraph:
    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    substitutions: dict[int, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        verts = tuple(self.vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertices")
        if len(verts) > MAX_VERTICES:
            raise ValueError(f"at most {MAX_VERTICES} vertices are supported")
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if u not in verts or v not in verts:
                raise ValueError(f"edge ({u}, {v}) uses an unknown vertex")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add(key)
        for v in self.substitutions:
            if v not in verts:
                raise ValueError(f"substitution for unknown vertex {v}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))

    def index(self, vertex: int) -> int:
        return self.vertices.index(vertex)

    def neighbors(self, vertex: int) -> list[int]:
        out = []
        for u, v in self.edges:
            if u == vertex:
                out.append(v)
            elif v == vertex:
                out.append(u)
        return out

    def star_center(self) -> int | None:
        """Center vertex if the graph is a star with at least one edge."""
        if not self.edges:
            return None
        for c in self.vertices:
            if all(c in e for e in self.edges) and len(self.edges) == len(self.vertices) - 1:
                return c
        return None

    def with_substitution(self, vertex: int, theta: float, phi: float) -> "ClusterGraph":
        subs = dict(self.substitutions)
        subs[vertex] = (theta, phi)
        return ClusterGraph(self.vertices, self.edges, subs)


def star_graph(n: int = 5) -> ClusterGraph:
    """Vertex 1 is the center, ``2..n`` are leaves."""
    return ClusterGraph(tuple(range(1, n + 1)), tuple((1, k) for k in range(2, n + 1)))


def chain_graph(n: int = 3) -> ClusterGraph:
    return ClusterGraph(tuple(range(1, n + 1)), tuple((k, k + 1) for k in range(1, n)))


def parse_graph(text: str) -> ClusterGraph:
    """Read ``u v`` edge lines, optionally followed by ``[substitutions]`` with
    ``vertex theta phi`` lines. Blank lines and ``#`` comments are ignored.
    Isolated vertices can be declared as a single number on its own line."""
    vertices: list[int] = []
    edges: list[tuple[int, int]] = []
    subs: dict[int, tuple[float, float]] = {}
    section = "edges"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower() == "[substitutions]":
            section = "subs"
            continue
        parts = line.split()
        try:
            if section == "edges":
                if len(parts) == 1:
                    ids = [int(parts[0])]
                elif len(parts) == 2:
                    ids = [int(parts[0]), int(parts[1])]
                    edges.append((ids[0], ids[1]))
                else:
                    raise ValueError
                for i in ids:
                    if i not in vertices:
                        vertices.append(i)
            else:
                if len(parts) != 3:
                    raise ValueError
                subs[int(parts[0])] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}") from None
    return ClusterGraph(tuple(vertices), tuple(edges), subs)


def format_graph(graph: ClusterGraph) -> str:
    lines = [f"{u} {v}" for u, v in graph.edges]
    used = {x for e in graph.edges for x in e}
    lines += [str(v) for v in graph.vertices if v not in used]
    if graph.substitutions:
        lines.append("[substitutions]")
        lines += [f"{v} {t!r} {p!r}" for v, (t, p) in sorted(graph.substitutions.items())]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# generation


def vertex_state(graph: ClusterGraph, vertex: int, code: BinomialCode) -> np.ndarray:
    theta, phi = graph.substitutions.get(vertex, (np.pi / 4, 0.0))
    return logical_state(code, theta, phi).vector.amplitudes


def product_input(graph: ClusterGraph, code: BinomialCode) -> StateVector:
    v = np.ones(1, dtype=complex)
    for vert in graph.vertices:
        v = np.kron(v, vertex_state(graph, vert, code))
    return StateVector(v, HilbertSpec((code.cutoff,) * len(graph.vertices)))


def ideal_cluster(graph: ClusterGraph, code: BinomialCode | None = None) -> StateVector:
    code = code or loss_code()
    psi = product_input(graph, code)
    v = psi.amplitudes
    dims = psi.spec.dims
    cz = ideal_cz(code)
    for u, w in graph.edges:
        v = apply_local(v, cz, (graph.index(u), graph.index(w)), dims)
    return StateVector(v, psi.spec)


@dataclass
class ClusterState:
    graph: ClusterGraph
    code: BinomialCode
    register: DenseRegister | BranchRegister
    outcome_probabilities: list[dict[str, float]]

    @property
    def spec(self) -> HilbertSpec:
        return self.register.spec


def build_cluster(
    graph: ClusterGraph,
    model: CavityModel,
    strategy: Strategy = "per-edge",
    code: BinomialCode | None = None,
    dense: bool | None = None,
) -> ClusterState:
    """Generate the cluster state of ``graph`` with cavity CZ gates.

    ``per-edge`` spends one atom and one measurement per edge, in edge order.
    ``star-optimized`` entangles one atom with every mode of a star and
    measures it once. Up to three modes a density matrix is used, otherwise
    the state is carried as weighted pure branches.
    """
    code = code or loss_code()
    psi = product_input(graph, code)
    if dense is None:
        dense = len(graph.vertices) <= DENSE_MODE_LIMIT
    reg = DenseRegister.from_state(psi) if dense else BranchRegister.from_state(psi)
    probs = []
    if strategy == "per-edge":
        for u, w in graph.edges:
            run = entangle(reg, model, graph.index(u), (graph.index(w),))
            reg = run.register
            probs.append(run.probabilities)
    elif strategy == "star-optimized":
        center = graph.star_center()
        if center is None:
            raise ValueError("star-optimized generation needs a star graph")
        leaves = [graph.index(v) for v in graph.vertices if v != center]
        run = entangle(reg, model, graph.index(center), leaves)
        reg = run.register
        probs.append(run.probabilities)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return ClusterState(graph, code, reg, probs)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class StabilizerReport:
    values: dict[int, float]

    @property
    def minimum(self) -> float:
        return min(self.values.values())

    def as_list(self) -> list[float]:
        return [self.values[k] for k in sorted(self.values)]


def logical_ops(code: BinomialCode) -> dict[str, np.ndarray]:
    b = code.basis
    return {k: b @ m @ b.conj().T for k, m in PAULI.items()}


def _as_register(state) -> DenseRegister | BranchRegister:
    if isinstance(state, ClusterState):
        return state.register
    if isinstance(state, StateVector):
        return BranchRegister.from_state(state)
    if isinstance(state, (DenseRegister, BranchRegister)):
        return state
    return DenseRegister.from_state(state)


def stabilizer_expectations(state, graph: ClusterGraph, code: BinomialCode | None = None) -> StabilizerReport:
    """``<X_i prod_{j in N(i)} Z_j>`` for every vertex, logical Paulis vanishing off the code space."""
    code = code or (state.code if isinstance(state, ClusterState) else loss_code())
    reg = _as_register(state)
    ops = logical_ops(code)
    norm = reg.trace
    values = {}
    for v in graph.vertices:
        targets = [graph.index(v)] + [graph.index(n) for n in graph.neighbors(v)]
        op = ops["X"]
        for _ in targets[1:]:
            op = np.kron(op, ops["Z"])
        values[v] = float(reg.expectation(op, targets).real / norm)
    return StabilizerReport(values)


# ---------------------------------------------------------------------------
# teleportation


def logical_basis_vectors(code: BinomialCode, basis: str) -> tuple[np.ndarray, np.ndarray]:
    z, o = code.logical_zero.amplitudes, code.logical_one.amplitudes
    if basis == "Z":
        return z, o
    if basis == "X":
        return (z + o) / np.sqrt(2), (z - o) / np.sqrt(2)
    raise ValueError(f"unsupported measurement basis {basis!r}")


def measure_modes(vectors: np.ndarray, dims: Sequence[int], bras: dict[int, np.ndarray]) -> tuple[np.ndarray, list[int]]:
    """Contract the listed subsystems with ``<bra|``; returns vectors on the rest."""
    k = vectors.shape[1]
    t = vectors.reshape(tuple(dims) + (k,))
    order = sorted(bras, reverse=True)
    for idx in order:
        t = np.tensordot(bras[idx].conj(), t, axes=([0], [idx]))
    remaining = [i for i in range(len(dims)) if i not in bras]
    return t.reshape(-1, k), remaining


def logical_unitary(code: BinomialCode, pauli: np.ndarray) -> np.ndarray:
    """Pauli on the code space extended by the identity on its complement."""
    b = code.basis
    return b @ pauli @ b.conj().T + (np.eye(code.cutoff) - code.projector)


@dataclass(frozen=True)
class TeleportResult:
    fidelity: float
    branch_fidelities: dict[tuple[int, ...], float]
    branch_probabilities: dict[tuple[int, ...], float]
    detected_probability: float


TELEPORT_INPUT = (np.pi / 3, -np.pi / 5)


def teleportation_test(
    model: CavityModel,
    strategy: Strategy = "star-optimized",
    code: BinomialCode | None = None,
    input_state: tuple[float, float] = TELEPORT_INPUT,
) -> TeleportResult:
    """Teleport an encoded state through the 5-star from leaf 4 to leaf 5.

    Vertex 1 (center) and vertex 4 (input) are measured in X, leaves 2 and 3
    in Z; the output on vertex 5 is corrected by ``Z^{m4} X^{m1 + z2 + z3}``.
    Measurements are ideal logical projections; outcomes are post-selected
    on the code space.
    """
    code = code or loss_code()
    graph = star_graph(5).with_substitution(4, *input_state)
    cluster = build_cluster(graph, model, strategy, code, dense=False)
    reg = cluster.register
    if isinstance(reg, DenseRegister):
        reg = BranchRegister.from_state(reg.density())
    dims = reg.spec.dims
    pattern = {1: "X", 2: "Z", 3: "Z", 4: "X"}
    basis = {v: logical_basis_vectors(code, b) for v, b in pattern.items()}
    psi_in = logical_state(code, *input_state).vector.amplitudes
    X = logical_unitary(code, PAULI["X"])
    Z = logical_unitary(code, PAULI["Z"])
    fids, probs = {}, {}
    overlap_total = 0.0
    p_total = 0.0
    for outcome in itertools.product((0, 1), repeat=4):
        m = dict(zip((1, 2, 3, 4), outcome))
        bras = {graph.index(v): basis[v][m[v]] for v in pattern}
        out, _ = measure_modes(reg.vectors, dims, bras)
        p = float(np.sum(np.abs(out) ** 2))
        corr = np.eye(code.cutoff, dtype=complex)
        if (m[1] + m[2] + m[3]) % 2:
            corr = X @ corr
        if m[4]:
            corr = Z @ corr
        fixed = corr @ out
        ov = float(np.sum(np.abs(psi_in.conj() @ fixed) ** 2))
        probs[outcome] = p
        fids[outcome] = ov / p if p > 0 else float("nan")
        overlap_total += ov
        p_total += p
    return TeleportResult(overlap_total / p_total, fids, probs, p_total)
