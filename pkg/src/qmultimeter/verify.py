"""Executable checks of the programming no-go facts.

Each check evaluates the hypotheses of one structural statement
numerically and returns a :class:`VerificationReport`.  The statements
are conditionals, so ``not_applicable`` is a first-class verdict: most
inputs simply fail the hypotheses, and only a genuine counterexample
yields ``fail``.

Hypothesis thresholds (what counts as "sharp", "unitary", "distinct") are
separated from the pass tolerances by orders of magnitude so verdicts
cannot flip on rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import (
    channel_distance,
    choi_matrix,
    is_extreme_channel,
    multiplicativity_residual,
)
from .exceptions import ValidationError
from .multimeter import (
    Multimeter,
    induced_channel,
    induced_observable,
    make_model,
)
from .observables import (
    Observable,
    is_extreme,
    make_observable,
    observable_distance,
    sharpness_residual,
)
from .operators import (
    frobenius_norm,
    haar_unitary,
    random_density_operator,
    random_state_vector,
)

#: A device whose sharpness / multiplicativity residual is below this is
#: treated as sharp / unitary in hypothesis checks.
SHARP_RESIDUAL_TOL = 1e-6

#: Devices further apart than this (Frobenius / Choi-Frobenius) are distinct.
DISTINCT_TOL = 1e-3

DEFAULT_SEARCH_THRESHOLDS = {
    "sharp_residual": 1e-6,
    "overlap": 1e-3,
    "distance": 1e-3,
}

_REFINE_STEPS = 200
_REFINE_DECAY = 0.97


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of a single check: verdict, named residuals, commentary."""

    check_name: str
    verdict: str
    residuals: dict = field(default_factory=dict)
    details: str = ""

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "verdict": self.verdict,
            "residuals": dict(self.residuals),
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        return cls(
            check_name=data["check_name"],
            verdict=data["verdict"],
            residuals={k: float(v) for k, v in data["residuals"].items()},
            details=data["details"],
        )


def check_sharp_program_orthogonality(
    m: Multimeter,
    phi1: np.ndarray,
    phi2: np.ndarray,
    tol: float = 1e-9,
    sharp_tol: float = SHARP_RESIDUAL_TOL,
    distance_tol: float = DISTINCT_TOL,
) -> VerificationReport:
    """Distinct sharp observables force orthogonal program vectors.

    Applies to any multimeter when both induced observables are sharp; a
    normal multimeter additionally fires on one sharp and one extreme
    induced observable.  No kernels are involved: the counterexamples
    enabled by post-processing live outside this check's hypotheses.
    """
    name = "sharp_program_orthogonality"
    e1 = induced_observable(make_model(m, phi1))
    e2 = induced_observable(make_model(m, phi2))
    res1 = sharpness_residual(e1)
    res2 = sharpness_residual(e2)
    distance = observable_distance(e1, e2)
    overlap = float(abs(np.vdot(np.asarray(phi1), np.asarray(phi2))))
    residuals = {
        "sharpness_residual_1": res1,
        "sharpness_residual_2": res2,
        "device_distance": distance,
        "overlap": overlap,
    }
    sharp1, sharp2 = res1 <= sharp_tol, res2 <= sharp_tol
    if distance <= distance_tol:
        return VerificationReport(
            name, "not_applicable", residuals, "induced observables are not distinct"
        )
    if sharp1 and sharp2:
        case = "two distinct sharp observables"
    elif m.normal and ((sharp1 and is_extreme(e2)) or (sharp2 and is_extreme(e1))):
        case = "a sharp and an extreme observable on a normal multimeter"
    else:
        return VerificationReport(
            name,
            "not_applicable",
            residuals,
            "hypotheses not met: fewer than two sharp (or sharp+extreme) observables",
        )
    if overlap <= tol:
        return VerificationReport(name, "pass", residuals, f"{case}: program vectors orthogonal")
    return VerificationReport(
        name,
        "fail",
        residuals,
        f"violated: {case} programmed with overlap {overlap:.3e} > {tol:.3e}",
    )


def check_channel_program_orthogonality(
    m: Multimeter,
    phi1: np.ndarray,
    phi2: np.ndarray,
    tol: float = 1e-9,
    unitary_tol: float = SHARP_RESIDUAL_TOL,
    distance_tol: float = DISTINCT_TOL,
) -> VerificationReport:
    """Distinct unitary channels force orthogonal program vectors.

    Unitarity is detected through multiplicativity of the dual map.  On a
    normal multimeter the check also fires on one unitary and one extreme
    induced channel.
    """
    name = "channel_program_orthogonality"
    c1 = induced_channel(make_model(m, phi1))
    c2 = induced_channel(make_model(m, phi2))
    res1 = multiplicativity_residual(c1)
    res2 = multiplicativity_residual(c2)
    distance = channel_distance(c1, c2)
    overlap = float(abs(np.vdot(np.asarray(phi1), np.asarray(phi2))))
    residuals = {
        "multiplicativity_residual_1": res1,
        "multiplicativity_residual_2": res2,
        "device_distance": distance,
        "overlap": overlap,
    }
    unitary1, unitary2 = res1 <= unitary_tol, res2 <= unitary_tol
    if distance <= distance_tol:
        return VerificationReport(
            name, "not_applicable", residuals, "induced channels are not distinct"
        )
    if unitary1 and unitary2:
        case = "two distinct unitary channels"
    elif m.normal and (
        (unitary1 and is_extreme_channel(c2)) or (unitary2 and is_extreme_channel(c1))
    ):
        case = "a unitary and an extreme channel on a normal multimeter"
    else:
        return VerificationReport(
            name,
            "not_applicable",
            residuals,
            "hypotheses not met: fewer than two unitary (or unitary+extreme) channels",
        )
    if overlap <= tol:
        return VerificationReport(name, "pass", residuals, f"{case}: program vectors orthogonal")
    return VerificationReport(
        name,
        "fail",
        residuals,
        f"violated: {case} programmed with overlap {overlap:.3e} > {tol:.3e}",
    )


def _mix_observables(weights, devices) -> Observable:
    ref = devices[0]
    effects = [
        sum(w * dev.effects[i] for w, dev in zip(weights, devices))
        for i in range(len(ref))
    ]
    return make_observable(ref.dim, ref.outcomes, effects, tol=1e-7)


def check_convex_hull(
    m: Multimeter,
    programmed,
    trials: int = 20,
    seed: int = 0,
    tol: float = 1e-10,
) -> VerificationReport:
    """Programming a full orthonormal basis yields exactly the convex hull.

    ``programmed`` lists ``(probe, device)`` pairs, one per basis vector of
    the apparatus; devices are all observables or all channels.  For random
    pure programs the induced device must equal the mixture with weights
    ``|<phi_i, psi>|^2``; for random mixed programs, weights ``<phi_i| xi |phi_i>``.
    """
    name = "convex_hull"
    programmed = list(programmed)
    if len(programmed) != m.dim_k:
        raise ValidationError(
            f"need one programmed device per apparatus dimension ({m.dim_k}), got {len(programmed)}"
        )
    probes = [np.asarray(p, dtype=complex).reshape(-1) for p, _ in programmed]
    devices = [d for _, d in programmed]
    gram = np.array([[np.vdot(a, b) for b in probes] for a in probes])
    if frobenius_norm(gram - np.eye(m.dim_k)) > 1e-9:
        raise ValidationError("program vectors are not orthonormal")
    kind = "observable" if isinstance(devices[0], Observable) else "channel"

    def induce(probe):
        model = make_model(m, probe)
        return induced_observable(model) if kind == "observable" else induced_channel(model)

    def distance(device, weights):
        if kind == "observable":
            return observable_distance(device, _mix_observables(weights, devices))
        target = sum(w * choi_matrix(dev) for w, dev in zip(weights, devices))
        return frobenius_norm(choi_matrix(device) - target)

    base_residual = max(distance(induce(p), np.eye(m.dim_k)[i]) for i, p in enumerate(probes))
    residuals = {"basis_residual": base_residual}
    if base_residual > 1e-7:
        return VerificationReport(
            name, "not_applicable", residuals, "probes do not program the declared devices"
        )
    rng = np.random.default_rng(seed)
    worst_pure = 0.0
    worst_mixed = 0.0
    for _ in range(trials):
        psi = random_state_vector(m.dim_k, rng)
        weights = np.array([abs(np.vdot(p, psi)) ** 2 for p in probes])
        worst_pure = max(worst_pure, distance(induce(psi), weights))
        xi = random_density_operator(m.dim_k, rng)
        weights = np.array([float(np.vdot(p, xi @ p).real) for p in probes])
        worst_mixed = max(worst_mixed, distance(induce(xi), weights))
    residuals.update({"max_pure_residual": worst_pure, "max_mixed_residual": worst_mixed})
    if max(worst_pure, worst_mixed) <= tol:
        return VerificationReport(
            name, "pass", residuals, f"{trials} random programs stay in the convex hull"
        )
    return VerificationReport(
        name,
        "fail",
        residuals,
        f"violated: mixture residual {max(worst_pure, worst_mixed):.3e} > {tol:.3e}",
    )


def check_purification(
    m: Multimeter,
    mixed_probe: np.ndarray,
    tol: float = 1e-10,
    kind: str = "observable",
) -> VerificationReport:
    """Extreme devices never need mixed probes.

    If the device induced by a mixed probe is extreme, every eigenvector of
    the probe must induce that same device, so a pure probe suffices.
    """
    name = "purification"
    xi = np.asarray(mixed_probe, dtype=complex)
    if xi.ndim != 2:
        return VerificationReport(name, "not_applicable", {}, "probe is pure (a vector)")
    eigvals, vecs = np.linalg.eigh(xi)
    components = [
        (lam, vecs[:, i] / np.linalg.norm(vecs[:, i]))
        for i, lam in enumerate(eigvals)
        if lam > 1e-12
    ]
    if len(components) < 2:
        return VerificationReport(name, "not_applicable", {}, "probe has rank below 2")

    def induce(probe):
        model = make_model(m, probe)
        return induced_observable(model) if kind == "observable" else induced_channel(model)

    def distance(a, b):
        return observable_distance(a, b) if kind == "observable" else channel_distance(a, b)

    device = induce(xi)
    extreme = is_extreme(device) if kind == "observable" else is_extreme_channel(device)
    component_devices = [induce(psi) for _, psi in components]
    worst = max(distance(dev, device) for dev in component_devices)
    residuals = {"max_component_distance": worst, "probe_rank": float(len(components))}
    if not extreme:
        gaps = ", ".join(f"{distance(dev, device):.3e}" for dev in component_devices)
        return VerificationReport(
            name,
            "not_applicable",
            residuals,
            f"induced {kind} is not extreme; convex decomposition components at distances [{gaps}]",
        )
    if worst <= tol:
        return VerificationReport(
            name,
            "pass",
            residuals,
            f"extreme {kind}: all {len(components)} probe eigenvectors induce the same device",
        )
    return VerificationReport(
        name,
        "fail",
        residuals,
        f"violated: extreme {kind} but component deviates by {worst:.3e} > {tol:.3e}",
    )


# ---------------------------------------------------------------------------
# randomized counterexample search


def _pointer_blocks(g: np.ndarray, phi: np.ndarray, dim_h: int, dim_k: int) -> list:
    """Effects of the observable induced by coupling g and pure probe phi.

    Computational-basis pointer; fast path used only inside the search.
    """
    m = (g.reshape(dim_h * dim_k, dim_h, dim_k) * phi).sum(axis=2)
    return [
        b.conj().T @ b for b in (m[i::dim_k, :] for i in range(dim_k))
    ]


def _sample_stats(g, phi1, phi2, dim_h, dim_k):
    e1 = _pointer_blocks(g, phi1, dim_h, dim_k)
    e2 = _pointer_blocks(g, phi2, dim_h, dim_k)
    sharp = max(
        max(frobenius_norm(e @ e - e) for e in e1),
        max(frobenius_norm(e @ e - e) for e in e2),
    )
    distance = max(frobenius_norm(a - b) for a, b in zip(e1, e2))
    overlap = float(abs(np.vdot(phi1, phi2)))
    return sharp, overlap, distance


def _structured_coupling(dim_h: int, dim_k: int, rng: np.random.Generator) -> np.ndarray:
    """Coupling that measures a random sharp observable for basis probes."""
    u = haar_unitary(dim_h, rng)
    n = min(dim_h, dim_k)
    sizes = [dim_h // n + (1 if i < dim_h % n else 0) for i in range(n)]
    effects = []
    start = 0
    for size in sizes:
        cols = u[:, start:start + size]
        effects.append(cols @ cols.conj().T)
        start += size
    effects += [np.zeros((dim_h, dim_h), dtype=complex)] * (dim_k - n)
    g = np.zeros((dim_h * dim_k, dim_h * dim_k), dtype=complex)
    for j, eff in enumerate(effects):
        perm = np.eye(dim_k, dtype=complex)
        if j:
            perm[[0, j]] = perm[[j, 0]]
        g += np.kron(eff, perm)
    return g


def _refine(state, thresholds, dim_h, dim_k, rng):
    """Gradient-free descent on the violation objective.

    Coordinate-wise complex perturbations of the probes and of a unitary
    generator for the coupling, with geometric step decay; the objective is
    non-smooth at projection boundaries so no derivatives are assumed.
    """
    g, phi1, phi2 = state

    def objective(st):
        sharp, overlap, distance = _sample_stats(*st, dim_h, dim_k)
        return (
            sharp
            + 10.0 * max(0.0, thresholds["overlap"] - overlap)
            + 10.0 * max(0.0, thresholds["distance"] - distance)
        )

    best = objective(state)
    step = 0.1
    dim = dim_h * dim_k
    for _ in range(_REFINE_STEPS):
        move = rng.integers(0, 3)
        if move < 2:
            phi = (phi1 if move == 0 else phi2).copy()
            j = rng.integers(0, dim_k)
            phi[j] += step * (rng.normal() + 1j * rng.normal())
            phi /= np.linalg.norm(phi)
            cand = (g, phi, phi2) if move == 0 else (g, phi1, phi)
        else:
            h = np.zeros((dim, dim), dtype=complex)
            a, b = rng.integers(0, dim, size=2)
            z = rng.normal() + 1j * rng.normal()
            h[a, b] += z
            h[b, a] += np.conj(z)
            eigvals, vecs = np.linalg.eigh(h)
            u = (vecs * np.exp(1j * step * eigvals)) @ vecs.conj().T
            cand = (g @ u, phi1, phi2)
        val = objective(cand)
        if val < best:
            best = val
            g, phi1, phi2 = cand
        step *= _REFINE_DECAY
    return g, phi1, phi2


def counterexample_search(
    dim_h: int,
    dim_k: int,
    trials: int,
    seed: int,
    thresholds: dict | None = None,
    refine: bool = False,
) -> VerificationReport:
    """Hunt for non-orthogonally programmed pairs of sharp observables.

    Samples normal multimeters with a computational pointer: mostly
    Haar-random couplings with Haar-random probe pairs, interleaved with a
    small fraction of structured couplings that measure two distinct sharp
    observables for two *orthogonal* basis probes.  A violation needs all
    three simultaneously: sharpness residual at most ``sharp_residual``,
    probe overlap at least ``overlap`` and device distance at least
    ``distance``.

    With a strictly positive overlap threshold no violation should ever be
    found; the structured samples sit at overlap exactly zero, so dropping
    the threshold to zero makes them trivial "violations" -- a sanity
    inversion confirming the harness detects threshold conjunctions.  The
    report records the empirical floor of the sharpness residual among
    qualifying samples.
    """
    name = "counterexample_search"
    thr = dict(DEFAULT_SEARCH_THRESHOLDS)
    if thresholds:
        thr.update(thresholds)
    rng = np.random.default_rng(seed)
    basis = np.eye(dim_k, dtype=complex)
    violations = 0
    floor = float("inf")
    floor_overlap = float("inf")
    floor_distance = float("inf")
    best_state = None
    for trial in range(trials):
        if rng.random() < 0.05 and dim_k >= 2:
            g = _structured_coupling(dim_h, dim_k, rng)
            phi1, phi2 = basis[0], basis[1]
        else:
            g = haar_unitary(dim_h * dim_k, rng)
            phi1 = random_state_vector(dim_k, rng)
            phi2 = random_state_vector(dim_k, rng)
        sharp, overlap, distance = _sample_stats(g, phi1, phi2, dim_h, dim_k)
        if overlap >= thr["overlap"] and distance >= thr["distance"]:
            if sharp < floor:
                floor = sharp
                floor_overlap = overlap
                floor_distance = distance
                best_state = (g, phi1, phi2)
            if sharp <= thr["sharp_residual"]:
                violations += 1
    if refine and best_state is not None:
        refined = _refine(best_state, thr, dim_h, dim_k, rng)
        sharp, overlap, distance = _sample_stats(*refined, dim_h, dim_k)
        if overlap >= thr["overlap"] and distance >= thr["distance"]:
            if sharp < floor:
                floor, floor_overlap, floor_distance = sharp, overlap, distance
            if sharp <= thr["sharp_residual"]:
                violations += 1
    residuals = {
        "best_sharp_residual": floor,
        "overlap_at_best": floor_overlap,
        "distance_at_best": floor_distance,
        "violations": float(violations),
    }
    if violations:
        return VerificationReport(
            name,
            "fail",
            residuals,
            (
                f"violated: {violations} sample(s) with sharpness residual <= "
                f"{thr['sharp_residual']:.3e}, overlap >= {thr['overlap']:.3e} and "
                f"device distance >= {thr['distance']:.3e} simultaneously"
            ),
        )
    return VerificationReport(
        name,
        "pass",
        residuals,
        f"{trials} samples, no violation; empirical sharpness floor {floor:.3e}",
    )
