"""Sequential-outcome statistics and Kolmogorov-consistency checks.

An outcome sequence is a tuple of integer labels in time order,
``(m_1, ..., m_n)``.  Its history operator is ``Q = R^H R`` with
``R = K_{m_n} ... K_{m_1}`` (later steps applied on the left), and the
sequence probability is ``tr(rho Q)``.

Kolmogorov consistency asks that summing an intermediate outcome of the
n-step distribution reproduces the distribution of the protocol with that
step removed.  The defect is computed both for a fixed state (``delta P``,
a real number) and at operator level (a Hermitian defect matrix ``D`` with
``delta P = tr(rho D)`` for every state), which decides the all-states
question in one finite check.  Marginalizing the *final* step is trivially
consistent by POVM completeness and is therefore rejected rather than
reported as a substantive check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    LabelError,
    NumericalFault,
    PreconditionError,
    ProtocolError,
)
from .linalg import check_density, commutator, frobenius
from .model import DephasingModel, MeasurementProtocol, PreparationState, nonselective_apply
from .tolerances import DEFAULT, Tolerances

OutcomeSequence = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class HistoryOperator:
    """Positive operator whose trace against a state gives a sequence probability."""

    q: np.ndarray
    sequence: OutcomeSequence


@dataclass(frozen=True)
class JointDistribution:
    """Probabilities of all outcome sequences of a fixed length."""

    n: int
    probe_dim: int
    table: dict

    def probability(self, seq: OutcomeSequence) -> float:
        return self.table[tuple(seq)]

    def marginal_over_step(self, j: int) -> dict:
        """Sum out step ``j`` (1-based); keys keep the remaining steps' time order."""
        if not 1 <= j <= self.n:
            raise ProtocolError(f"step {j} out of range 1..{self.n}")
        out: dict = {}
        for seq, p in self.table.items():
            key = seq[: j - 1] + seq[j:]
            out[key] = out.get(key, 0.0) + p
        return out

    def total(self) -> float:
        return float(sum(self.table.values()))


def _validate_sequence(protocol: MeasurementProtocol, seq) -> OutcomeSequence:
    seq = tuple(int(m) for m in seq)
    if not 1 <= len(seq) <= protocol.n_steps:
        raise ProtocolError(
            f"sequence length {len(seq)} not in 1..{protocol.n_steps} for this protocol"
        )
    for k, m in enumerate(seq):
        if not 0 <= m < protocol.probe_dim:
            raise LabelError(f"outcome {m} at step {k + 1} is not in 0..{protocol.probe_dim - 1}")
    return seq


def history_operator(protocol: MeasurementProtocol, seq) -> HistoryOperator:
    """History operator of an outcome sequence, built in step order."""
    seq = _validate_sequence(protocol, seq)
    r = protocol.step_measurements[0].kraus[seq[0]]
    for k in range(1, len(seq)):
        r = protocol.step_measurements[k].kraus[seq[k]] @ r
    q = r.conj().T @ r
    return HistoryOperator((q + q.conj().T) / 2, seq)


def joint_probability(rho: np.ndarray, q, tol: Tolerances = DEFAULT) -> float:
    """Born-rule probability ``tr(rho q)`` with guarded clipping into [0, 1]."""
    mat = q.q if isinstance(q, HistoryOperator) else np.asarray(q, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != mat.shape:
        raise ProtocolError(f"state shape {rho.shape} does not match operator {mat.shape}")
    val = complex(np.trace(rho @ mat))
    if abs(val.imag) > tol.probability_imag:
        raise NumericalFault(f"probability has imaginary residue {val.imag:.3e}")
    p = val.real
    if p < -tol.probability_clip or p > 1.0 + tol.probability_clip:
        raise NumericalFault(f"probability {p} outside [0, 1] beyond tolerance")
    return min(max(p, 0.0), 1.0)


def full_distribution(
    protocol: MeasurementProtocol,
    rho: np.ndarray,
    n: int,
    tol: Tolerances = DEFAULT,
) -> JointDistribution:
    """Enumerate all ``d_P ** n`` sequences of the first ``n`` steps.

    Enumeration is lexicographic in ``(m_1, ..., m_n)`` and reuses prefix
    Kraus products, so tables are byte-stable and cheap for the supported
    sizes.
    """
    if not 1 <= n <= protocol.n_steps:
        raise ProtocolError(f"n = {n} not in 1..{protocol.n_steps}")
    count = protocol.probe_dim**n
    if count > tol.enumeration_cap:
        raise CapacityError(
            f"{protocol.probe_dim}^{n} = {count} sequences exceeds cap {tol.enumeration_cap}"
        )
    rho = check_density(rho, tol)
    d = protocol.system_dim
    table: dict = {}

    def walk(step: int, prefix: OutcomeSequence, r: np.ndarray):
        if step == n:
            q = r.conj().T @ r
            table[prefix] = joint_probability(rho, (q + q.conj().T) / 2, tol)
            return
        kraus = protocol.step_measurements[step].kraus
        for m in range(protocol.probe_dim):
            walk(step + 1, prefix + (m,), kraus[m] @ r)

    walk(0, (), np.eye(d, dtype=complex))
    total = sum(table.values())
    if abs(total - 1.0) > tol.distribution_sum:
        raise NumericalFault(f"distribution sums to {total}, expected 1")
    return JointDistribution(n, protocol.probe_dim, table)


def _check_defect_args(protocol: MeasurementProtocol, n: int, j: int, fixed) -> OutcomeSequence:
    if n < 2 or n > protocol.n_steps:
        raise ProtocolError(f"n = {n} not in 2..{protocol.n_steps}")
    if j == n:
        raise ProtocolError(
            "marginalizing the final step is trivially consistent (POVM completeness); "
            "the defect is exactly 0 and is not a substantive consistency check"
        )
    if not 1 <= j <= n - 1:
        raise ProtocolError(f"j = {j} not in 1..{n - 1}")
    fixed = tuple(int(m) for m in fixed)
    if len(fixed) != n - 1:
        raise ProtocolError(f"need {n - 1} fixed outcomes, got {len(fixed)}")
    for m in fixed:
        if not 0 <= m < protocol.probe_dim:
            raise LabelError(f"outcome {m} is not in 0..{protocol.probe_dim - 1}")
    return fixed


def kc_defect_state(
    protocol: MeasurementProtocol,
    rho: np.ndarray,
    n: int,
    j: int,
    fixed,
    tol: Tolerances = DEFAULT,
) -> float:
    """State-level consistency defect ``sum_{m_j} P_n - P_{n-1}``.

    ``fixed`` lists the outcomes of all steps except ``j`` in time order;
    the ``P_{n-1}`` term uses the protocol with step ``j`` removed and the
    remaining steps unchanged.  Computed from sequence probabilities, not
    from the operator defect, so the two routes stay independent.
    """
    fixed = _check_defect_args(protocol, n, j, fixed)
    rho = check_density(rho, tol)
    total = 0.0
    for m_j in range(protocol.probe_dim):
        seq = fixed[: j - 1] + (m_j,) + fixed[j - 1 :]
        total += joint_probability(rho, history_operator(protocol.prefix(n), seq), tol)
    reduced = protocol.prefix(n).drop_step(j)
    return total - joint_probability(rho, history_operator(reduced, fixed), tol)


def kc_defect_operator(
    protocol: MeasurementProtocol,
    n: int,
    j: int,
    fixed,
    tol: Tolerances = DEFAULT,
) -> np.ndarray:
    """Operator-level defect ``D = sum_{m_j} Q_n - Q_{n-1}``.

    For every state, ``tr(rho D)`` equals :func:`kc_defect_state`, so
    ``D = 0`` decides the all-states consistency question for this
    ``(n, j, fixed)`` in one check.
    """
    fixed = _check_defect_args(protocol, n, j, fixed)
    d = protocol.system_dim
    pre = np.eye(d, dtype=complex)
    for k in range(j - 1):
        pre = protocol.step_measurements[k].kraus[fixed[k]] @ pre
    post = np.eye(d, dtype=complex)
    for k in range(j, n):
        post = protocol.step_measurements[k].kraus[fixed[k - 1]] @ post
    defect = np.zeros((d, d), dtype=complex)
    kraus_j = protocol.step_measurements[j - 1].kraus
    for m_j in range(protocol.probe_dim):
        r = post @ kraus_j[m_j] @ pre
        defect = defect + r.conj().T @ r
    r0 = post @ pre
    defect = defect - r0.conj().T @ r0
    return (defect + defect.conj().T) / 2


@dataclass(frozen=True)
class KCEntry:
    n: int
    j: int
    fixed: OutcomeSequence
    operator_defect: float
    state_defects: tuple[float, ...] | None

    def to_dict(self) -> dict:
        out = {
            "n": self.n,
            "j": self.j,
            "fixed": list(self.fixed),
            "operator_defect": self.operator_defect,
        }
        if self.state_defects is not None:
            out["state_defects"] = list(self.state_defects)
        return out


@dataclass(frozen=True)
class KCReport:
    """Verdict and per-condition defects of a full consistency scan."""

    n_max: int
    entries: tuple[KCEntry, ...]
    verdict: str
    max_operator_defect: float
    max_state_defect: float | None
    decided_by_n2_j1: bool
    tolerances: dict

    @property
    def consistent(self) -> bool:
        return self.verdict == "consistent"

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "verdict": self.verdict,
            "max_operator_defect": self.max_operator_defect,
            "max_state_defect": self.max_state_defect,
            "decided_by_n2_j1": self.decided_by_n2_j1,
            "entries": [e.to_dict() for e in self.entries],
            "tolerances": self.tolerances,
        }


def check_kc_all(
    protocol: MeasurementProtocol,
    n_max: int,
    rho=None,
    tol: Tolerances = DEFAULT,
) -> KCReport:
    """Evaluate every substantive consistency condition up to ``n_max`` steps.

    Scans all ``2 <= n <= n_max``, ``1 <= j <= n-1`` and all assignments of
    the fixed outcomes, in lexicographic order.  The verdict is decided by
    the operator defects alone; if ``rho`` (one state or a sequence of
    states) is supplied, per-state defects ``tr(rho D)`` are recorded
    alongside.  The report also notes whether the ``(n=2, j=1)`` conditions
    already decide the verdict on their own.
    """
    if n_max < 2:
        raise ProtocolError(f"n_max must be at least 2, got {n_max}")
    if n_max > protocol.n_steps:
        raise ProtocolError(f"n_max = {n_max} exceeds protocol length {protocol.n_steps}")
    if protocol.probe_dim**n_max > tol.enumeration_cap:
        raise CapacityError(
            f"{protocol.probe_dim}^{n_max} = {protocol.probe_dim**n_max} sequences "
            f"exceeds cap {tol.enumeration_cap}"
        )
    states: tuple[np.ndarray, ...] | None
    if rho is None:
        states = None
    elif isinstance(rho, np.ndarray):
        states = (check_density(rho, tol),)
    else:
        states = tuple(check_density(r, tol) for r in rho)
    entries = []
    max_defect = 0.0
    max_defect_n2 = 0.0
    max_state = 0.0 if states is not None else None
    for n in range(2, n_max + 1):
        for j in range(1, n):
            for fixed in itertools.product(range(protocol.probe_dim), repeat=n - 1):
                defect = kc_defect_operator(protocol, n, j, fixed, tol)
                norm = frobenius(defect)
                max_defect = max(max_defect, norm)
                if n == 2 and j == 1:
                    max_defect_n2 = max(max_defect_n2, norm)
                state_defects = None
                if states is not None:
                    state_defects = tuple(
                        float(np.trace(r @ defect).real) for r in states
                    )
                    max_state = max(max_state, max(abs(x) for x in state_defects))
                entries.append(KCEntry(n, j, fixed, norm, state_defects))
    verdict = "consistent" if max_defect <= tol.kc else "violated"
    decided = (max_defect_n2 > tol.kc) == (max_defect > tol.kc)
    return KCReport(
        n_max=n_max,
        entries=tuple(entries),
        verdict=verdict,
        max_operator_defect=max_defect,
        max_state_defect=max_state,
        decided_by_n2_j1=decided,
        tolerances=tol.as_dict(),
    )


@dataclass(frozen=True)
class FixedPointResult:
    is_fixed: bool
    commutator_norms: tuple[float, ...]
    map_defect: float


def fixed_point_check(
    a: np.ndarray,
    model: DephasingModel,
    preparation: PreparationState,
    tol: Tolerances = DEFAULT,
) -> FixedPointResult:
    """Test whether ``a`` is invariant under the outcome-averaged dual map.

    For a full-support preparation, invariance is equivalent to ``a``
    commuting with every conditional Hamiltonian; both sides are evaluated
    and a disagreement beyond tolerance raises :class:`NumericalFault`
    (e.g. at resonant step times where the unitaries commute with ``a``
    but the Hamiltonians do not).
    """
    probs = np.abs(preparation.amplitudes) ** 2
    if float(probs.min()) <= 1e-12:
        raise PreconditionError(
            "fixed-point/commutator equivalence needs every preparation amplitude nonzero"
        )
    mapped = nonselective_apply(model, preparation, a, direction="observable")
    map_defect = frobenius(mapped - np.asarray(a, dtype=complex))
    is_fixed = map_defect <= tol.fixed_point
    norms = tuple(frobenius(commutator(h, a)) for h in model.hamiltonians)
    commutes = max(norms) <= tol.commutator
    if is_fixed != commutes:
        raise NumericalFault(
            f"fixed-point predicate ({map_defect:.3e}) and commutator predicate "
            f"(max norm {max(norms):.3e}) disagree"
        )
    return FixedPointResult(is_fixed, norms, map_defect)
