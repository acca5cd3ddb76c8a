"""Measurement-free analysis of the system operator algebra.

Covers closure of the algebra generated by the conditional Hamiltonians,
commutativity and classicality predicates, commutant computation by
null-space methods on the vectorized operator space, effect nondegeneracy,
the level-spacing condition that forces degenerate effects for commuting
families, and the zero-entanglement predicate for dephasing evolutions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PreconditionError
from .linalg import (
    as_complex_matrix,
    check_density,
    check_hermitian,
    commutator,
    frobenius,
    hs_inner,
    orthonormalize_hs,
)
from .model import DephasingModel, MeasurementProtocol, conditional_unitaries
from .tolerances import DEFAULT, Tolerances


@dataclass(frozen=True, eq=False)
class AlgebraBasis:
    """Orthonormal basis of an operator subspace, with closure metadata."""

    generators: tuple[np.ndarray, ...]
    basis: tuple[np.ndarray, ...]
    dimension: int
    closed: bool
    singular_values: np.ndarray | None = None

    def contains(self, op: np.ndarray, residual_tol: float = 1e-8) -> bool:
        return self.projection_residual(op) <= residual_tol

    def projection_residual(self, op: np.ndarray) -> float:
        """Norm of the component of ``op`` outside the spanned subspace."""
        op = np.asarray(op, dtype=complex)
        resid = op.copy()
        for b in self.basis:
            resid = resid - hs_inner(b, op) * b
        return frobenius(resid)


def _common_dimension(ops) -> int:
    mats = [as_complex_matrix(op) for op in ops]
    if not mats:
        raise DimensionError("need at least one operator")
    d = mats[0].shape[0]
    for m in mats[1:]:
        if m.shape[0] != d:
            raise DimensionError(f"mixed operator dimensions: {m.shape[0]} vs {d}")
    return d


def generate_algebra(generators, tol: Tolerances = DEFAULT) -> AlgebraBasis:
    """Close the span of {1} u {generators} under operator products.

    Alternates product formation with Hilbert-Schmidt orthonormalization
    until the dimension stabilizes; terminates at ``d^2`` at the latest.
    """
    gens = tuple(np.asarray(g, dtype=complex) for g in generators)
    d = _common_dimension(gens)
    basis = orthonormalize_hs([np.eye(d, dtype=complex), *gens], tol.rank)
    while True:
        if len(basis) >= d * d:
            break  # the full matrix algebra; products cannot leave it
        products = [a @ b for a, b in itertools.product(basis, repeat=2)]
        grown = orthonormalize_hs(list(basis) + products, tol.rank)
        if len(grown) == len(basis):
            basis = grown
            break
        basis = grown
    return AlgebraBasis(gens, tuple(basis), len(basis), True)


def is_commutative(generators, tol: Tolerances = DEFAULT) -> tuple[bool, float]:
    """Pairwise commutativity of a generator set; sufficient for the whole
    generated algebra when the generators are Hermitian."""
    gens = [as_complex_matrix(g) for g in generators]
    _common_dimension(gens)
    worst = 0.0
    for a, b in itertools.combinations(gens, 2):
        worst = max(worst, frobenius(commutator(a, b)))
    return worst <= tol.commutator, worst


def classical_wrt_state(rho: np.ndarray, algebra: AlgebraBasis, tol: Tolerances = DEFAULT):
    """Whether ``tr(rho [A, B])`` vanishes over the algebra, decided on basis pairs."""
    if not algebra.closed:
        raise PreconditionError("classicality test needs a closed algebra basis")
    rho = check_density(rho, tol)
    worst = 0.0
    for a, b in itertools.combinations(algebra.basis, 2):
        worst = max(worst, abs(complex(np.trace(rho @ commutator(a, b)))))
    return worst <= tol.commutator, worst


def effect_nondegenerate(e: np.ndarray, gap_tol: float | None = None, tol: Tolerances = DEFAULT):
    """Whether all eigenvalues of an effect are separated by more than ``gap_tol``."""
    if gap_tol is None:
        gap_tol = tol.gap
    e = check_hermitian(e, tol, what="effect")
    w = np.linalg.eigvalsh(e)
    if w.size < 2:
        return True, float("inf")
    min_gap = float(np.min(np.diff(w)))
    return min_gap > gap_tol, min_gap


def _simultaneous_eigenbasis(hams, tol: Tolerances) -> np.ndarray:
    """Common eigenbasis of a pairwise-commuting Hermitian family.

    Sequentially refines eigenspaces: diagonalize each Hamiltonian inside
    the joint eigenspaces of the previous ones, splitting blocks at
    eigenvalue gaps.
    """
    d = hams[0].shape[0]
    basis = np.eye(d, dtype=complex)
    blocks = [np.arange(d)]
    for h in hams:
        scale = max(frobenius(h), 1.0)
        cluster = 1e-8 * scale
        refined = []
        for idx in blocks:
            if idx.size == 1:
                refined.append(idx)
                continue
            sub = basis[:, idx].conj().T @ h @ basis[:, idx]
            w, v = np.linalg.eigh((sub + sub.conj().T) / 2)
            basis[:, idx] = basis[:, idx] @ v
            start = 0
            for i in range(1, idx.size + 1):
                if i == idx.size or w[i] - w[start] > cluster:
                    refined.append(idx[start:i])
                    start = i
        blocks = refined
    return basis


def spacing_degeneracy_predicate(hams, tol: Tolerances = DEFAULT) -> list[tuple[int, int]]:
    """Level pairs whose energy spacing is the same for every Hamiltonian.

    Requires a pairwise-commuting family (shared eigenbasis).  A returned
    pair ``(l, l')`` has ``h_l(i) - h_l'(i)`` independent of ``i``, which
    makes the corresponding effect eigenvalues coincide for any preparation,
    meter basis, and step time.  Levels are 0-based indices into the common
    eigenbasis.
    """
    mats = [check_hermitian(h, tol) for h in hams]
    d = _common_dimension(mats)
    ok, worst = is_commutative(mats, tol)
    if not ok:
        raise PreconditionError(
            f"spacing predicate needs commuting Hamiltonians (max commutator {worst:.3e})"
        )
    basis = _simultaneous_eigenbasis(mats, tol)
    levels = np.empty((d, len(mats)))
    for i, h in enumerate(mats):
        levels[:, i] = np.real(np.einsum("al,ab,bl->l", basis.conj(), h, basis))
    pairs = []
    for l1, l2 in itertools.combinations(range(d), 2):
        spacings = levels[l1] - levels[l2]
        if np.max(np.abs(spacings - spacings[0])) <= tol.spacing:
            pairs.append((l1, l2))
    return pairs


def commutant_basis(ops, tol: Tolerances = DEFAULT) -> AlgebraBasis:
    """Orthonormal basis of all operators commuting with every given operator.

    Stacks the vectorized maps ``A -> [A, G]`` and reads the commutant off
    the null space of the stack; singular values below the cut define the
    null space and are recorded on the result.
    """
    mats = [as_complex_matrix(op) for op in ops]
    d = _common_dimension(mats)
    eye = np.eye(d)
    rows = [np.kron(eye, g.T) - np.kron(g, eye) for g in mats]
    stacked = np.concatenate(rows, axis=0)
    _, s, vh = np.linalg.svd(stacked)
    svals = np.zeros(d * d)
    svals[: s.size] = s
    members = [vh[i].conj().reshape(d, d) for i in range(d * d) if svals[i] < tol.nullspace]
    return AlgebraBasis(tuple(mats), tuple(members), len(members), True, svals)


def zero_entanglement_condition(rho: np.ndarray, model: DephasingModel, tol: Tolerances = DEFAULT):
    """Whether dephasing of the probe creates no probe-system entanglement.

    For a qubit probe this holds iff all conditionally evolved states
    coincide; for larger probes the conditional unitaries must additionally
    commute pairwise.  Returns the verdict and the per-pair norms backing it.
    """
    rho = check_density(rho, tol)
    if rho.shape[0] != model.system_dim:
        raise DimensionError(f"state dimension {rho.shape[0]} != system dimension {model.system_dim}")
    us = conditional_unitaries(model)
    evolved = [u @ rho @ u.conj().T for u in us]
    state_norms = {}
    comm_norms = {}
    for i, j in itertools.combinations(range(model.probe_dim), 2):
        state_norms[f"{i},{j}"] = frobenius(evolved[i] - evolved[j])
        if model.probe_dim > 2:
            comm_norms[f"{i},{j}"] = frobenius(commutator(us[i], us[j]))
    worst = max(state_norms.values())
    if comm_norms:
        worst = max(worst, max(comm_norms.values()))
    diagnostics = {"state_mismatch": state_norms}
    if comm_norms:
        diagnostics["unitary_commutators"] = comm_norms
    return worst <= tol.entanglement, diagnostics


@dataclass(frozen=True)
class AlgebraReport:
    """Summary of the operator algebra the probe can sense."""

    dimension: int
    commutative: bool
    max_generator_commutator: float
    commutant_dimension: int
    commutant_singular_values_near_cut: tuple[float, ...]
    effect_nondegeneracy: tuple[dict, ...] | None
    tolerances: dict

    def to_dict(self) -> dict:
        out = {
            "dimension": self.dimension,
            "commutative": self.commutative,
            "max_generator_commutator": self.max_generator_commutator,
            "commutant_dimension": self.commutant_dimension,
            "commutant_singular_values_near_cut": list(self.commutant_singular_values_near_cut),
            "tolerances": self.tolerances,
        }
        if self.effect_nondegeneracy is not None:
            out["effect_nondegeneracy"] = list(self.effect_nondegeneracy)
        return out


def algebra_report(
    model: DephasingModel,
    protocol: MeasurementProtocol | None = None,
    tol: Tolerances = DEFAULT,
) -> AlgebraReport:
    """Analyze the algebra generated by the conditional Hamiltonians.

    When a protocol is given, every step effect is additionally screened for
    eigenvalue degeneracy.
    """
    closed = generate_algebra(model.hamiltonians, tol)
    commutative, worst = is_commutative(model.hamiltonians, tol)
    commutant = commutant_basis(model.hamiltonians, tol)
    svals = commutant.singular_values
    near = tuple(
        float(s) for s in svals if tol.nullspace / 100.0 <= s <= tol.nullspace * 100.0
    )
    nondegeneracy = None
    if protocol is not None:
        rows = []
        for step, measurement in enumerate(protocol.step_measurements, start=1):
            for label, effect in zip(measurement.labels, measurement.effects):
                ok, gap = effect_nondegenerate(effect, tol=tol)
                rows.append(
                    {"step": step, "outcome": label, "nondegenerate": ok, "min_gap": gap}
                )
        nondegeneracy = tuple(rows)
    return AlgebraReport(
        dimension=closed.dimension,
        commutative=commutative,
        max_generator_commutator=worst,
        commutant_dimension=commutant.dimension,
        commutant_singular_values_near_cut=near,
        effect_nondegeneracy=nondegeneracy,
        tolerances=tol.as_dict(),
    )
