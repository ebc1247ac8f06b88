"""Truncated-basis numerics: matrices, spectra and certification residuals.

Operators are represented on a per-mode harmonic-oscillator number basis of
size ``N`` through the ladder substitution

    x = sqrt(hbar / (2 m0 w0)) (a + a^dag),
    p = i sqrt(m0 w0 hbar / 2) (a^dag - a),

with multi-mode operators assembled as Kronecker products (mode 0 slowest).
The reference scales ``m0, w0`` are free; ``default_basis`` picks per-model
scales under which the truncated matrices behave best.  For the swanson
family the choice ``m0*w0 = m*(sqrt(omega^2+c^2) - c)`` makes the truncated
Hamiltonian exactly upper triangular, so its finite spectrum is exact and
time evolution is stable; the naive scale ``m0*w0 = m`` instead produces
spurious complex eigenvalue pairs whose imaginary parts grow with ``N``.

Truncation corrupts the upper end of every spectrum, so only the lowest
``compare_count <= N//4`` eigenvalues are ever compared, and block-restricted
residuals are used wherever the metric operator appears: ``eta = Omega^dag
Omega`` has condition ``~exp(2|S|)``, far beyond double precision at the
sizes used, so the pseudo-Hermiticity residual ``eta^-1 H^dag eta - H`` is
evaluated with all operators read on the leading ``compare_count`` block
(the violation ``H^dag eta - eta H`` itself is formed at full size first).
The metric's smallest eigenvalue equals ``sigma_min(Omega)^2`` and is
computed from the SVD of ``Omega``, which resolves it far below the noise
floor of a Hermitian eigensolve of ``eta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla

from .dynamics import linear_closure_fit, real_closure_second_order
from .models import ModelSpec, build
from .transform import deduce_hermitian, observable_map, omega_exponent
from .weyl import OperatorPoly, classify

DIM_BUDGET = 4096
CONDITION_BOUND = 1e8


class DimensionBudgetError(ValueError):
    """Raised when the requested tensor-product dimension is too large."""


class EigensolverError(RuntimeError):
    """Raised when the dense eigensolver fails to converge."""


class InvalidStateError(ValueError):
    """Raised for states that are not normalizable under the metric."""


class InvalidObservableError(ValueError):
    """Raised when an observable lacks the required pseudo-Hermiticity."""


@dataclass(frozen=True)
class BasisConfig:
    """Truncation size, per-mode reference scales and comparison depth.

    ``ref_mass`` and ``ref_freq`` may be scalars (broadcast over modes) or
    per-mode sequences.
    """

    size: int
    ref_mass: float | tuple = 1.0
    ref_freq: float | tuple = 1.0
    compare_count: int = 10

    def __post_init__(self):
        if self.size < 8:
            raise ValueError("basis size must be at least 8")
        if not 1 <= self.compare_count <= self.size // 4:
            raise ValueError("compare_count must lie in [1, size//4]")

    def mode_scale(self, mode: int) -> tuple[float, float]:
        m0 = self.ref_mass[mode] if isinstance(self.ref_mass, (tuple, list)) else self.ref_mass
        w0 = self.ref_freq[mode] if isinstance(self.ref_freq, (tuple, list)) else self.ref_freq
        if m0 <= 0 or w0 <= 0:
            raise ValueError("reference scales must be positive")
        return float(m0), float(w0)


def default_basis(spec: ModelSpec, size: int = 64, compare_count: Optional[int] = None) -> BasisConfig:
    """Model-aware reference scales (see the module docstring)."""
    spec.validate()
    if compare_count is None:
        compare_count = min(10, size // 4)
    kind = spec.kind
    if kind == "swanson":
        w = float(spec.omega)
        c = float(spec.c)
        w0 = math.sqrt(w * w + c * c) - c  # truncated matrix becomes triangular
        return BasisConfig(size, float(spec.m), w0, compare_count)
    if kind == "general_x":
        return BasisConfig(size, float(spec.m), 1.0, compare_count)
    if kind == "general_p":
        return BasisConfig(size, 1.0 / float(spec.A), 1.0, compare_count)
    if kind == "pu_I":
        g = float(spec.gamma)
        w1, w2 = float(spec.omega1), float(spec.omega2)
        big = math.sqrt(w1 * w1 + w2 * w2)
        return BasisConfig(size, (g, g), (big, w1 * w2 * big), compare_count)
    if kind == "pu_II":
        m = float(spec.m)
        return BasisConfig(size, (m, m), (abs(float(spec.a1)), abs(float(spec.a2))), compare_count)
    raise ValueError(f"unknown model kind {kind!r}")


def ladder_matrices(cfg: BasisConfig, mode: int, hbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Truncated position and momentum matrices for one mode."""
    N = cfg.size
    a = np.diag(np.sqrt(np.arange(1, N)), 1).astype(complex)
    ad = a.conj().T
    m0, w0 = cfg.mode_scale(mode)
    x = math.sqrt(hbar / (2 * m0 * w0)) * (a + ad)
    p = 1j * math.sqrt(m0 * w0 * hbar / 2) * (ad - a)
    return x, p


def matrix_of(poly: OperatorPoly, cfg: BasisConfig, max_dim: int = DIM_BUDGET) -> np.ndarray:
    """Dense matrix of a normal-ordered polynomial on the truncated basis."""
    M = poly.mode_count
    dim = cfg.size**M
    if dim > max_dim:
        raise DimensionBudgetError(f"total dimension {dim} exceeds budget {max_dim}")
    hbar = float(poly.hbar)
    xs, ps = [], []
    for j in range(M):
        x, p = ladder_matrices(cfg, j, hbar)
        xs.append(x)
        ps.append(p)
    # cache generator powers per mode
    xpow = [{0: np.eye(cfg.size, dtype=complex)} for _ in range(M)]
    ppow = [{0: np.eye(cfg.size, dtype=complex)} for _ in range(M)]

    def power(cache, base, e):
        if e not in cache:
            cache[e] = cache[e - 1] @ base if e - 1 in cache else np.linalg.matrix_power(base, e)
        return cache[e]

    out = np.zeros((dim, dim), dtype=complex)
    for mono, coeff in poly.terms.items():
        word = None
        for j in range(M):
            a, b = mono[2 * j], mono[2 * j + 1]
            factor = power(xpow[j], xs[j], a) @ power(ppow[j], ps[j], b)
            word = factor if word is None else np.kron(word, factor)
        out += complex(coeff) * word
    return out


def spectrum(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense matrix, sorted by (real, imaginary) part."""
    try:
        values = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigensolver failed: {exc}") from exc
    return values[np.lexsort((values.imag, values.real))]


def _eig_sorted(matrix: np.ndarray):
    try:
        values, vectors = np.linalg.eig(matrix)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"dense eigensolver failed: {exc}") from exc
    order = np.lexsort((values.imag, values.real))
    return values[order], vectors[:, order]


def pu_frequencies(spec: ModelSpec) -> tuple[float, float]:
    """Normal-mode frequencies of the two-mode families.

    For ``pu_II`` these come from
    ``w_{1,2}^2 = (a1^2 + a2^2 +- sqrt((a1^2-a2^2)^2 - a3^2)) / 2``
    with the sign assignment chosen by ``spec.branch``.
    """
    if spec.kind == "pu_I":
        return float(spec.omega1), float(spec.omega2)
    if spec.kind == "pu_II":
        s = float(spec.a1**2 + spec.a2**2)
        d = math.sqrt(float((spec.a1**2 - spec.a2**2) ** 2 - spec.a3**2))
        w_plus = math.sqrt((s + d) / 2)
        w_minus = math.sqrt((s - d) / 2)
        return (w_plus, w_minus) if spec.branch == "upper" else (w_minus, w_plus)
    raise ValueError(f"no normal-mode frequencies for kind {spec.kind!r}")


def reference_spectrum(spec: ModelSpec, count: int) -> np.ndarray:
    """Closed-form eigenvalues of the exactly solvable families.

    swanson: ``hbar*sqrt(omega^2+c^2)*(n+1/2)``; two-mode families:
    ``hbar*(w1*(n1+1/2) + w2*(n2+1/2))`` enumerated in ascending order.
    """
    spec.validate()
    hbar = float(spec.hbar)
    if spec.kind == "swanson":
        w_eff = math.sqrt(float(spec.omega**2 + spec.c**2))
        return hbar * w_eff * (np.arange(count) + 0.5)
    if spec.kind in ("pu_I", "pu_II"):
        w1, w2 = pu_frequencies(spec)
        top = count + 2
        sums = sorted(
            hbar * (w1 * (n1 + 0.5) + w2 * (n2 + 0.5))
            for n1 in range(top)
            for n2 in range(top)
        )
        return np.array(sums[:count])
    raise ValueError(f"no reference spectrum for kind {spec.kind!r}")


@dataclass
class SpectralReport:
    """Numerical certification results on a truncated basis.

    ``eigenvalues_h`` holds the Hermitian counterpart's spectrum when one is
    deducible and the closed-form reference values for the two-mode
    families.  Residual fields are ``None`` when the corresponding check was
    not requested or is unsupported for the model kind.
    """

    size: int
    compare_count: int
    eigenvalues_H: np.ndarray
    eigenvalues_h: Optional[np.ndarray] = None
    reference: Optional[np.ndarray] = None
    reality_residual: float = 0.0
    isospectral_residual: Optional[float] = None
    isospectral_relative: Optional[float] = None
    eta_min_eigenvalue: Optional[float] = None
    pseudo_residual: Optional[float] = None
    picture_residual: Optional[float] = None
    norm_drift: Optional[float] = None
    condition_estimate: Optional[float] = None
    conditioning_warning: bool = False
    branch: Optional[str] = None


def _eta_matrices(S: OperatorPoly, cfg: BasisConfig):
    """Similarity operator, metric, metric floor and conditioning estimate."""
    Sm = matrix_of(S, cfg)
    Om = sla.expm(Sm)
    eta = Om.conj().T @ Om
    sv = np.linalg.svd(Om, compute_uv=False)
    eta_min = float(sv.min() ** 2)  # = min eigenvalue of eta, stable via SVD
    cond = float(sv.max() / sv.min()) if sv.min() > 0 else math.inf
    return Om, eta, eta_min, cond


def _pseudo_residual(Hm: np.ndarray, eta: np.ndarray, k: int) -> float:
    """Relative norm of ``eta^-1 H^dag eta - H`` on the leading k-block.

    The intertwining violation ``H^dag eta - eta H`` is formed at full size
    (numerically benign), then the metric inverse is applied within the
    leading block, where the metric is well conditioned.
    """
    violation = Hm.conj().T @ eta - eta @ Hm
    block = np.linalg.solve(eta[:k, :k], violation[:k, :k])
    return float(np.linalg.norm(block, 2) / np.linalg.norm(Hm[:k, :k], 2))


def picture_consistency(
    H: OperatorPoly,
    O: OperatorPoly,
    S: OperatorPoly,
    psi0: np.ndarray,
    times: Sequence[float],
    cfg: BasisConfig,
) -> tuple[float, float]:
    """Largest disagreement between the two picture averages, plus norm drift.

    At each grid time the state-evolution average
    ``<psi(t)| eta O |psi(t)>`` with ``psi(t) = expm(-i H t / hbar) psi0``
    is compared against the operator-evolution average
    ``<psi0| eta O(t) |psi0>`` with ``O(t) = expm(+i H t / hbar) O
    expm(-i H t / hbar)``; the drift is the deviation of the metric norm
    ``<psi(t)| eta |psi(t)>`` from its initial value.
    """
    o_herm = observable_map(O, S, "to_hermitian")
    if not classify(o_herm).is_hermitian:
        raise InvalidObservableError("observable is not pseudo-Hermitian under this metric")
    if observable_map(o_herm, S, "to_pseudo") != O:
        raise InvalidObservableError("observable map does not round-trip")
    hbar = float(H.hbar)
    Hm = matrix_of(H, cfg)
    Om_obs = matrix_of(O, cfg)
    _, eta, _, _ = _eta_matrices(S, cfg)
    norm0 = float(np.real(psi0.conj() @ eta @ psi0))
    if norm0 <= 0:
        raise InvalidStateError("state is not normalizable under the metric")
    psi0 = np.asarray(psi0, dtype=complex) / math.sqrt(norm0)
    eta_psi0 = eta @ psi0
    residual = 0.0
    drift = 0.0
    for t in times:
        U = sla.expm(-1j * Hm * t / hbar)
        Ui = sla.expm(1j * Hm * t / hbar)
        psi_t = U @ psi0
        schro = psi_t.conj() @ eta @ Om_obs @ psi_t
        O_t = Ui @ Om_obs @ U
        heis = eta_psi0.conj() @ O_t @ psi0
        residual = max(residual, abs(schro - heis))
        drift = max(drift, abs(float(np.real(psi_t.conj() @ eta @ psi_t)) - 1.0))
    return residual, drift


def eigenfunction_map(
    phi: np.ndarray, energy: float, S: OperatorPoly, H: OperatorPoly, cfg: BasisConfig
) -> tuple[np.ndarray, float]:
    """Map a counterpart eigenvector back, ``Phi = expm(-S) phi``.

    Returns the mapped vector and the relative eigenpair residual
    ``|H Phi - E Phi| / |Phi|`` on the truncated basis.
    """
    Sm = matrix_of(S, cfg)
    Phi = sla.expm(-Sm) @ np.asarray(phi, dtype=complex)
    Hm = matrix_of(H, cfg)
    residual = float(np.linalg.norm(Hm @ Phi - energy * Phi) / np.linalg.norm(Phi))
    return Phi, residual


DEFAULT_TIME_GRID = np.linspace(0.0, 10.0, 101)


def certify(
    spec: ModelSpec,
    cfg: Optional[BasisConfig] = None,
    checks: Sequence[str] = ("spectrum", "eta", "picture"),
) -> SpectralReport:
    """Run the numerical certification suite for one model instance.

    ``checks`` may contain ``spectrum`` (always computed), ``eta`` and
    ``picture``; the latter two require a similarity exponent and are
    silently skipped for the two-mode families.
    """
    spec.validate()
    if cfg is None:
        cfg = default_basis(spec)
    k = cfg.compare_count
    H = build(spec)
    Hm = matrix_of(H, cfg)
    ev_H = spectrum(Hm)
    report = SpectralReport(
        size=cfg.size,
        compare_count=k,
        eigenvalues_H=ev_H[:k],
        reality_residual=float(np.abs(ev_H[:k].imag).max()),
    )

    if spec.kind in ("pu_I", "pu_II"):
        ref = reference_spectrum(spec, k)
        report.reference = ref
        report.eigenvalues_h = ref.astype(complex)
        report.isospectral_residual = float(np.abs(ev_H[:k] - ref).max())
        report.isospectral_relative = float(
            (np.abs(ev_H[:k] - ref) / np.maximum(1.0, np.abs(ref))).max()
        )
        report.branch = _match_branch(spec, ev_H)
        return report

    # coordinate/momentum families: counterpart spectrum and metric checks
    variable = (0, "p") if spec.kind == "general_p" else (0, "x")
    inertia = 1 / spec.A if spec.kind == "general_p" else spec.m
    eom = real_closure_second_order(H, variable, inertia)
    if eom.real_closed:
        h = deduce_hermitian(eom, inertia)
        # eigenvalues are representation independent, so the Hermitian
        # counterpart is diagonalized on its own matched basis (for swanson
        # the effective frequency differs from the triangularizing scale)
        cfg_h = cfg
        if spec.kind == "swanson":
            w_eff = math.sqrt(float(spec.omega**2 + spec.c**2))
            cfg_h = BasisConfig(cfg.size, float(spec.m), w_eff, cfg.compare_count)
        hm = matrix_of(h, cfg_h)
        ev_h = spectrum(hm)
        report.eigenvalues_h = ev_h[:k]
        diff = np.abs(ev_H[:k] - ev_h[:k])
        report.isospectral_residual = float(diff.max())
        report.isospectral_relative = float(
            (diff / np.maximum(1.0, np.abs(ev_h[:k]))).max()
        )
    if spec.kind == "swanson":
        report.reference = reference_spectrum(spec, k)

    wants_eta = "eta" in checks
    wants_picture = "picture" in checks
    if wants_eta or wants_picture:
        S = omega_exponent(spec)
        Om, eta, eta_min, cond = _eta_matrices(S, cfg)
        report.condition_estimate = cond
        report.conditioning_warning = cond > CONDITION_BOUND
        if wants_eta:
            report.eta_min_eigenvalue = eta_min
            report.pseudo_residual = _pseudo_residual(Hm, eta, k)
        if wants_picture:
            # ground-state-like initial state from the two lowest eigenpairs
            _, vecs = _eig_sorted(Hm)
            psi0 = vecs[:, 0] + vecs[:, 1]
            x_obs = OperatorPoly.x(0, 1, spec.hbar)
            resid, drift = picture_consistency(
                H, x_obs, S, psi0, DEFAULT_TIME_GRID, cfg
            )
            report.picture_residual = resid
            report.norm_drift = drift
    return report


def _match_branch(spec: ModelSpec, ev: np.ndarray) -> str:
    """Record which combination of the two mode energies the lowest
    numerical eigenvalue lands on."""
    hbar = float(spec.hbar)
    w1, w2 = pu_frequencies(spec)
    candidates = {
        "E1+E2": hbar * (w1 + w2) / 2,
        "E1-E2": hbar * (w1 - w2) / 2,
        "-E1+E2": hbar * (w2 - w1) / 2,
    }
    lowest = float(ev[0].real)
    return min(candidates, key=lambda name: abs(candidates[name] - lowest))


@dataclass(frozen=True)
class ExchangeReport:
    distance: float
    invariant: bool
    sum_shift: float
    difference_shift: float


def exchange_invariance_check(
    spec: ModelSpec, cfg: Optional[BasisConfig] = None
) -> ExchangeReport:
    """Compare spectra under the parameter exchange of the two-mode families.

    Swaps ``omega1 <-> omega2`` (pu_I) or ``a1 <-> a2`` (pu_II), compares the
    sorted lowest eigenvalues as multisets, and additionally records how the
    closed-form combinations ``E1+E2`` and ``E1-E2`` (ground labels) move
    under the swap: the sum is invariant, the difference is not.
    """
    if spec.kind == "pu_I":
        swapped = replace(spec, omega1=spec.omega2, omega2=spec.omega1)
    elif spec.kind == "pu_II":
        swapped = replace(spec, a1=spec.a2, a2=spec.a1)
    else:
        raise ValueError("exchange check applies to the two-mode families only")
    cfg1 = cfg or default_basis(spec)
    cfg2 = cfg or default_basis(swapped)
    k = min(cfg1.compare_count, cfg2.compare_count)
    ev1 = spectrum(matrix_of(build(spec), cfg1))[:k]
    ev2 = spectrum(matrix_of(build(swapped), cfg2))[:k]
    distance = float(np.abs(ev1 - ev2).max())
    scale = max(1.0, float(np.abs(ev1).max()))
    hbar = float(spec.hbar)
    w1, w2 = pu_frequencies(spec)
    s1, s2 = pu_frequencies(swapped)
    sum_shift = abs(hbar * (w1 + w2) / 2 - hbar * (s1 + s2) / 2)
    difference_shift = abs(hbar * (w1 - w2) / 2 - hbar * (s1 - s2) / 2)
    return ExchangeReport(
        distance=distance,
        invariant=distance < 1e-6 * scale,
        sum_shift=sum_shift,
        difference_shift=difference_shift,
    )
