"""FIR and parallel ARMA graph filter engines, unquantized and quantized.

Every filter here is realized by repeated neighbor exchanges (matrix-vector
products with a shift operator); matrix powers are never materialized. The
quantized variants pass each transmitted signal through the dithered
quantizer, one message per FIR round and one per ARMA branch per iteration,
and log the injected noise so runs can be audited against the closed-form
error expressions.
"""

from __future__ import annotations

import json
import csv
from dataclasses import dataclass

import numpy as np

from gfquant.graphs import ResModel, ShiftOperator, res_sample
from gfquant.quantization import DitheredQuantizer, QuantizationLedger, quantize

_STABILITY_MARGIN = 1e-9


@dataclass(frozen=True)
class FirCoefficients:
    """Polynomial filter taps phi = (phi_0, ..., phi_K)."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float).reshape(-1)
        if phi.size < 1:
            raise ValueError("need at least phi_0")
        if not np.all(np.isfinite(phi)):
            raise ValueError("coefficients must be finite")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def order(self) -> int:
        return self.phi.size - 1


@dataclass(frozen=True)
class ArmaCoefficients:
    """Parallel one-pole branch coefficients psi_k (poles) and varphi_k (residues)."""

    psi: np.ndarray
    varphi: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float).reshape(-1)
        varphi = np.asarray(self.varphi, dtype=float).reshape(-1)
        if psi.size != varphi.size or psi.size < 1:
            raise ValueError("psi and varphi must have equal positive length")
        if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(varphi))):
            raise ValueError("coefficients must be finite")
        psi.setflags(write=False)
        varphi.setflags(write=False)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "varphi", varphi)

    @property
    def order(self) -> int:
        return self.psi.size

    @property
    def psi_max(self) -> float:
        return float(np.max(np.abs(self.psi)))

    def check_stable(self, bound: float) -> None:
        """Reject psi_max * bound >= 1 - 1e-9 (bound is lambda_max or rho)."""
        if self.psi_max * bound >= 1.0 - _STABILITY_MARGIN:
            raise ValueError(
                f"unstable recursion: psi_max*bound = {self.psi_max * bound:.6g} >= 1"
            )


@dataclass(frozen=True)
class FilterRun:
    """Recorded trajectory of one filter execution.

    outputs holds one row per communication step: for an ARMA run rows are
    y_1 ... y_T; for a FIR run rows are the partial accumulations through
    term k for k = 0 ... K (the last row is the filter output).
    error_trajectory matches outputs row for row with the quantization error
    (quantized minus seed-matched unquantized trajectory); noises logs the
    raw quantization noise vectors as (iteration, link, vector) tuples.
    """

    outputs: np.ndarray
    error_trajectory: np.ndarray | None
    ledger: QuantizationLedger
    seed: int
    noises: tuple = ()

    @property
    def output(self) -> np.ndarray:
        return self.outputs[-1]

    @property
    def error(self) -> np.ndarray | None:
        if self.error_trajectory is None:
            return None
        return self.error_trajectory[-1]


def _as_matrix(S) -> np.ndarray:
    return S.matrix if isinstance(S, ShiftOperator) else np.asarray(S, dtype=float)


def fir_apply(S, c: FirCoefficients, x: np.ndarray) -> np.ndarray:
    """y = sum_k phi_k S^k x via K iterated shifts."""
    m = _as_matrix(S)
    x = np.asarray(x, dtype=float)
    if x.shape[0] != m.shape[0]:
        raise ValueError("signal length must match shift size")
    y = c.phi[0] * x
    z = x
    for k in range(1, c.order + 1):
        z = m @ z
        y = y + c.phi[k] * z
    return y


def fir_freq_response(c: FirCoefficients, lambdas) -> np.ndarray:
    """h(lambda) = sum_k phi_k lambda^k evaluated by Horner's rule."""
    lam = np.asarray(lambdas, dtype=float)
    h = np.full_like(lam, c.phi[-1])
    for k in range(c.order - 1, -1, -1):
        h = h * lam + c.phi[k]
    return h


def fir_apply_quantized(
    S, c: FirCoefficients, x: np.ndarray, q: DitheredQuantizer
) -> FilterRun:
    """Quantized FIR run: round k transmits the quantized previous state.

    x^(0) = x; x^(k) = S * quantize(x^(k-1)) with the round-(k-1) stepsize;
    output y^q = sum_k phi_k x^(k). The recorded error trajectory is the
    difference against the seed-matched unquantized partial sums.
    """
    m = _as_matrix(S)
    x = np.asarray(x, dtype=float)
    q = q.with_range_from(x)
    ledger = QuantizationLedger()
    noises = []
    zq = x
    z = x
    yq = c.phi[0] * x
    y = c.phi[0] * x
    outputs = [yq]
    errors = [yq - y]
    for k in range(1, c.order + 1):
        zq_tilde, noise = quantize(zq, k - 1, q, link_id=0, ledger=ledger)
        noises.append((k - 1, 0, noise))
        zq = m @ zq_tilde
        z = m @ z
        yq = yq + c.phi[k] * zq
        y = y + c.phi[k] * z
        outputs.append(yq)
        errors.append(yq - y)
    return FilterRun(
        np.array(outputs), np.array(errors), ledger, q.seed, tuple(noises)
    )


def fir_apply_tv(shifts, c: FirCoefficients, x: np.ndarray) -> np.ndarray:
    """FIR over a time-varying shift sequence ordered [S_{t-1}, ..., S_{t-K}].

    Round k applies shifts[k-1], so the term of order k is
    S_{t-k} ... S_{t-1} x.
    """
    shifts = list(shifts)
    if len(shifts) != c.order:
        raise ValueError(f"need exactly K={c.order} shifts, got {len(shifts)}")
    x = np.asarray(x, dtype=float)
    y = c.phi[0] * x
    z = x
    for k in range(1, c.order + 1):
        z = _as_matrix(shifts[k - 1]) @ z
        y = y + c.phi[k] * z
    return y


def fir_apply_tv_quantized(
    shifts, c: FirCoefficients, x: np.ndarray, q: DitheredQuantizer
) -> FilterRun:
    """Quantized FIR over a shift sequence ordered [S_{t-1}, ..., S_{t-K}]."""
    shifts = list(shifts)
    if len(shifts) != c.order:
        raise ValueError(f"need exactly K={c.order} shifts, got {len(shifts)}")
    x = np.asarray(x, dtype=float)
    q = q.with_range_from(x)
    ledger = QuantizationLedger()
    noises = []
    zq = x
    z = x
    yq = c.phi[0] * x
    y = c.phi[0] * x
    outputs = [yq]
    errors = [yq - y]
    for k in range(1, c.order + 1):
        m = _as_matrix(shifts[k - 1])
        zq_tilde, noise = quantize(zq, k - 1, q, link_id=0, ledger=ledger)
        noises.append((k - 1, 0, noise))
        zq = m @ zq_tilde
        z = m @ z
        yq = yq + c.phi[k] * zq
        y = y + c.phi[k] * z
        outputs.append(yq)
        errors.append(yq - y)
    return FilterRun(
        np.array(outputs), np.array(errors), ledger, q.seed, tuple(noises)
    )


def draw_res_sequence(m: ResModel, K: int, rng: np.random.Generator) -> list:
    """Draw K RES realizations ordered [S_{t-1}, ..., S_{t-K}] for a TV-FIR run."""
    return [res_sample(m, rng) for _ in range(K)]


def arma_run(
    shift_source,
    c: ArmaCoefficients,
    x: np.ndarray,
    T: int,
    q: DitheredQuantizer | None = None,
    w0: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
) -> FilterRun:
    """Run the parallel ARMA recursion for T iterations.

    Per branch k: w_t = psi_k S_{t-1} (w_{t-1} + n) + varphi_k x, where n is
    the quantization noise of the transmitted branch state (zero when q is
    None) and S_{t-1} is the static shift or a fresh RES realization per
    iteration (rng required then). y_t = sum_k w_t; w0 defaults to zero.
    The error trajectory subtracts the unquantized recursion driven by the
    same shift sequence.
    """
    if T < 1:
        raise ValueError("need T >= 1 iterations")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    K = c.order
    if isinstance(shift_source, ResModel):
        if rng is None:
            raise ValueError("RES shift source needs an rng for topology draws")
        bound = shift_source.base_shift.rho
        draw = lambda: res_sample(shift_source, rng).matrix
    else:
        matrix = _as_matrix(shift_source)
        bound = (
            shift_source.rho
            if isinstance(shift_source, ShiftOperator)
            else np.linalg.norm(matrix, 2)
        )
        draw = lambda: matrix
    c.check_stable(bound)

    if w0 is None:
        w = np.zeros((K, n))
    else:
        w = np.array(w0, dtype=float).reshape(K, n).copy()
    w_ref = w.copy()
    ledger = QuantizationLedger()
    noises = []
    if q is not None:
        q = q.with_range_from(x)
    outputs = np.empty((T, n))
    errors = np.empty((T, n)) if q is not None else None
    for t in range(1, T + 1):
        m = draw()
        if q is not None:
            for k in range(K):
                w_tilde, noise = quantize(w[k], t - 1, q, link_id=k, ledger=ledger)
                noises.append((t - 1, k, noise))
                w[k] = c.psi[k] * (m @ w_tilde) + c.varphi[k] * x
                w_ref[k] = c.psi[k] * (m @ w_ref[k]) + c.varphi[k] * x
            errors[t - 1] = w.sum(axis=0) - w_ref.sum(axis=0)
        else:
            for k in range(K):
                w[k] = c.psi[k] * (m @ w[k]) + c.varphi[k] * x
        outputs[t - 1] = w.sum(axis=0)
    return FilterRun(
        outputs,
        errors,
        ledger,
        q.seed if q is not None else 0,
        tuple(noises),
    )


def arma_steady_state(S, c: ArmaCoefficients, x: np.ndarray) -> np.ndarray:
    """y* = sum_k varphi_k (I - psi_k S)^(-1) x by dense solves.

    Each solve's residual is checked against 1e-10 * ||x||.
    """
    m = _as_matrix(S)
    x = np.asarray(x, dtype=float)
    n = m.shape[0]
    y = np.zeros(n)
    xnorm = np.linalg.norm(x)
    for k in range(c.order):
        a = np.eye(n) - c.psi[k] * m
        try:
            z = np.linalg.solve(a, x)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"singular branch system (psi={c.psi[k]})") from exc
        resid = np.linalg.norm(a @ z - x)
        if resid > 1e-10 * max(xnorm, 1e-300):
            raise ValueError(
                f"branch solve residual {resid:.3g} exceeds tolerance "
                f"(psi={c.psi[k]}; stability violated?)"
            )
        y = y + c.varphi[k] * z
    return y


def trajectory_to_csv(run: FilterRun, path) -> None:
    """Write (t, node, value, error) rows for every trajectory entry."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "node", "value", "error"])
        for t, row in enumerate(run.outputs):
            err = run.error_trajectory[t] if run.error_trajectory is not None else None
            for node, value in enumerate(row):
                writer.writerow(
                    [t, node, repr(float(value)), repr(float(err[node])) if err is not None else ""]
                )


def run_metadata_json(run: FilterRun, coefficients, q: DitheredQuantizer | None, path) -> None:
    """Write run metadata (coefficients, seed, schedule) as JSON."""
    meta = {"seed": run.seed}
    if isinstance(coefficients, FirCoefficients):
        meta["filter"] = {"type": "fir", "phi": [float(v) for v in coefficients.phi]}
    else:
        meta["filter"] = {
            "type": "arma",
            "psi": [float(v) for v in coefficients.psi],
            "varphi": [float(v) for v in coefficients.varphi],
        }
    if q is not None:
        sched = {
            "kind": q.schedule.kind,
            "delta0": q.schedule.delta0,
            "rate": q.schedule.rate,
            "steps": list(q.schedule.steps),
            "max_bits": q.schedule.max_bits,
        }
        meta["schedule"] = sched
        meta["total_bits"] = run.ledger.total_bits
        meta["saturation_events"] = run.ledger.saturation_events
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
