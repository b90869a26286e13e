"""Desk-scale experiment scenarios and report emission.

Four scenarios: ideal low-pass approximation on a random geometric network,
Tikhonov denoising over static links and over randomly failing links,
interpolation of partially observed signals, and a bounds audit comparing
every closed-form MSE claim against Monte Carlo. Each run writes per-variant
CSVs with the fixed header (axis, nse_mean, nse_ci, bound, bits_total) plus
summary.json and manifest.json keyed by the config hash. Reruns with the
same config and seed are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from gfquant.analysis import (
    arma_mse_bound_dynamic,
    arma_mse_bound_fixed,
    fir_mse_bound_dynamic,
    fir_mse_bounds_fixed,
    fir_mse_exact,
    fir_mse_printed,
    fir_res_mse_bound,
    monte_carlo,
    nse,
)
from gfquant.design import (
    DesignConstraints,
    fir_ls_design,
    fir_quantization_aware_design,
    fir_robust_res_design,
    interpolation_arma1,
    tikhonov_arma1,
)
from gfquant.filters import (
    FirCoefficients,
    arma_run,
    draw_res_sequence,
    fir_apply,
    fir_apply_quantized,
    fir_apply_tv_quantized,
)
from gfquant.graphs import (
    RES_KINDS,
    SHIFT_KINDS,
    ShiftOperator,
    build_shift,
    eigendecompose,
    gft,
    graph_from_csv,
    igft,
    knn_graph,
    random_geometric,
    res_model,
)
from gfquant.quantization import (
    DitheredQuantizer,
    StepsizeSchedule,
    effective_stepsize,
)

SCENARIOS = ("lowpass", "denoise", "interpolate", "bounds-audit")
SWEEP_AXES = ("K", "p", "chi", "missing-fraction")
CSV_HEADER = "axis,nse_mean,nse_ci,bound,bits_total"

_VARIANT_IDS = {
    "unquantized": 0,
    "fixed": 1,
    "dynamic": 2,
    "arma_fixed": 3,
    "arma_dynamic": 4,
    "fir_fixed": 5,
    "fir_dynamic": 6,
    "res_arma": 7,
    "res_fir_ls": 8,
    "res_fir_robust": 9,
    "interp": 10,
    "audit": 11,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved scenario settings; one sweep axis, everything else fixed."""

    scenario: str
    seed: int
    trials: int
    iterations: int
    graph: dict
    shift_kind: str
    fir_order: int
    arma_w: float
    bits_fixed: int
    bits_init: int
    chi: int
    rate: float | None
    res_p: float | None
    sigma2: float
    robust_gamma: float
    design_epsilon: float | None
    sweep_axis: str
    sweep_grid: tuple
    out_dir: str
    dataset: dict | None
    knn_k: int

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {self.sweep_axis!r}")
        if not self.sweep_grid:
            raise ValueError("sweep grid is empty")
        if self.shift_kind not in SHIFT_KINDS:
            raise ValueError(f"unknown shift kind {self.shift_kind!r}")
        if self.res_p is not None and not 0.0 < self.res_p <= 1.0:
            raise ValueError("res p must be in (0, 1]")
        if self.chi < 1:
            raise ValueError("chi must be >= 1")
        for path in self._referenced_files():
            if not os.path.isfile(path):
                raise ValueError(f"referenced file does not exist: {path}")
        object.__setattr__(self, "sweep_grid", tuple(self.sweep_grid))

    def _referenced_files(self):
        paths = []
        for key in ("edges", "coords"):
            if key in self.graph:
                paths.append(self.graph[key])
        if self.dataset is not None:
            paths.extend(self.dataset[k] for k in ("coords", "signals", "masks"))
        return paths

    def canonical(self) -> dict:
        """JSON-ready dict of every resolved field, for hashing and manifests."""
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "trials": self.trials,
            "iterations": self.iterations,
            "graph": dict(self.graph),
            "shift_kind": self.shift_kind,
            "fir_order": self.fir_order,
            "arma_w": self.arma_w,
            "bits_fixed": self.bits_fixed,
            "bits_init": self.bits_init,
            "chi": self.chi,
            "rate": self.rate,
            "res_p": self.res_p,
            "sigma2": self.sigma2,
            "robust_gamma": self.robust_gamma,
            "design_epsilon": self.design_epsilon,
            "sweep_axis": self.sweep_axis,
            "sweep_grid": list(self.sweep_grid),
            "out_dir": self.out_dir,
            "dataset": dict(self.dataset) if self.dataset else None,
            "knn_k": self.knn_k,
        }


def config_sha256(cfg: ExperimentConfig) -> str:
    payload = json.dumps(cfg.canonical(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def _scenario_defaults(scenario: str, has_res: bool) -> dict:
    base = {
        "shift_kind": "normalized-laplacian",
        "fir_order": 10,
        "arma_w": 0.3,
        "chi": 25,
        "iterations": 100,
        "sweep": ("K", (2, 4, 6, 8, 10, 12, 15)),
        "sigma2": 0.2,
    }
    if scenario == "lowpass":
        base.update(chi=32, sigma2=0.0, iterations=1)
    elif scenario == "denoise" and has_res:
        base.update(shift_kind="scaled-laplacian", arma_w=0.25, chi=15, iterations=60)
    elif scenario == "interpolate":
        base.update(
            chi=15,
            iterations=60,
            sweep=("missing-fraction", (0.1, 0.2, 0.3, 0.4, 0.5)),
        )
    elif scenario == "bounds-audit":
        base.update(fir_order=4, sweep=("K", (4,)), chi=25)
    return base


def config_from_dict(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Resolve a parsed config file against scenario defaults and CLI flags."""
    overrides = overrides or {}
    scenario = overrides.get("scenario") or raw.get("scenario")
    if scenario is None:
        raise ValueError("config needs a scenario (or pass --scenario)")
    res_tbl = raw.get("res", {})
    res_p = res_tbl.get("p")
    defaults = _scenario_defaults(scenario, res_p is not None)

    sweep_tbl = raw.get("sweep", {})
    if len(sweep_tbl) > 1:
        raise ValueError(f"exactly one sweep axis expected, got {sorted(sweep_tbl)}")
    if sweep_tbl:
        axis, grid = next(iter(sweep_tbl.items()))
    else:
        axis, grid = defaults["sweep"]
    if axis in ("K", "chi"):
        grid = tuple(int(v) for v in grid)
    else:
        grid = tuple(float(v) for v in grid)

    graph = dict(raw.get("graph", {}))
    graph.setdefault("n", 50)
    graph.setdefault("side", 150.0)
    graph.setdefault("radius", 50.0)

    filt = raw.get("filter", {})
    sched = raw.get("schedule", {})
    dataset = raw.get("dataset")
    if dataset is not None:
        missing = [k for k in ("coords", "signals", "masks") if k not in dataset]
        if missing:
            raise ValueError(f"dataset table missing keys: {missing}")
        dataset = {k: dataset[k] for k in ("coords", "signals", "masks")}

    return ExperimentConfig(
        scenario=scenario,
        seed=int(overrides.get("seed", raw.get("seed", 0))),
        trials=int(overrides.get("trials", raw.get("trials", 1000))),
        iterations=int(raw.get("iterations", defaults["iterations"])),
        graph=graph,
        shift_kind=raw.get("shift", {}).get("kind", defaults["shift_kind"]),
        fir_order=int(filt.get("fir_order", defaults["fir_order"])),
        arma_w=float(filt.get("arma_w", defaults["arma_w"])),
        bits_fixed=int(sched.get("bits_fixed", 8)),
        bits_init=int(sched.get("bits_init", 4)),
        chi=int(sched.get("chi", defaults["chi"])),
        rate=float(sched["rate"]) if "rate" in sched else None,
        res_p=float(res_p) if res_p is not None else None,
        sigma2=float(raw.get("noise", {}).get("sigma2", defaults["sigma2"])),
        robust_gamma=float(raw.get("design", {}).get("robust_gamma", 1.0)),
        design_epsilon=(
            float(raw["design"]["epsilon"])
            if "epsilon" in raw.get("design", {})
            else None
        ),
        sweep_axis=axis,
        sweep_grid=grid,
        out_dir=str(overrides.get("out_dir", raw.get("output", {}).get("dir", "out"))),
        dataset=dataset,
        knn_k=int(raw.get("graph", {}).get("knn_k", 5)),
    )


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse a TOML or JSON config file into a resolved ExperimentConfig."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if str(path).endswith(".json"):
        raw = json.loads(blob.decode())
    else:
        raw = tomllib.loads(blob.decode())
    return config_from_dict(raw, overrides)


@dataclass(frozen=True)
class DatasetBundle:
    """Sensor dataset: coordinates, signal snapshots, observation masks."""

    coords: np.ndarray
    signals: np.ndarray
    masks: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        signals = np.asarray(self.signals, dtype=float)
        masks = np.asarray(self.masks, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError("coords must be (N, 2)")
        n = coords.shape[0]
        if signals.ndim != 2 or signals.shape[0] != n:
            raise ValueError("signals must be (N, snapshots)")
        if masks.shape != signals.shape:
            raise ValueError("masks must match the signal matrix shape")
        if not np.all((masks == 0.0) | (masks == 1.0)):
            raise ValueError("mask entries must be 0 or 1")
        for name, arr in (("coords", coords), ("signals", signals), ("masks", masks)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def snapshots(self) -> int:
        return self.signals.shape[1]


def _read_long_csv(path, value_name):
    rows = {}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        expected = ["node", "snapshot", value_name]
        if header != expected:
            raise ValueError(f"{path}: expected header {','.join(expected)}")
        for line in fh:
            if not line.strip():
                continue
            node, snap, value = line.strip().split(",")
            rows[(int(node), int(snap))] = float(value)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    n = max(k[0] for k in rows) + 1
    t = max(k[1] for k in rows) + 1
    out = np.full((n, t), np.nan)
    for (i, j), v in rows.items():
        out[i, j] = v
    if np.any(np.isnan(out)):
        raise ValueError(f"{path}: missing (node, snapshot) entries")
    return out


def bundle_from_csv(coords_path, signals_path, masks_path) -> DatasetBundle:
    """Load a dataset from node,x,y / node,snapshot,value / node,snapshot,observed CSVs."""
    coords = []
    with open(coords_path) as fh:
        header = fh.readline().strip().split(",")
        if header != ["node", "x", "y"]:
            raise ValueError(f"{coords_path}: expected header node,x,y")
        for line in fh:
            if not line.strip():
                continue
            node, x, y = line.strip().split(",")
            coords.append((int(node), float(x), float(y)))
    coords.sort()
    if [c[0] for c in coords] != list(range(len(coords))):
        raise ValueError(f"{coords_path}: node ids must be 0..N-1")
    signals = _read_long_csv(signals_path, "value")
    masks = _read_long_csv(masks_path, "observed")
    return DatasetBundle(np.array([(x, y) for _, x, y in coords]), signals, masks)


def bundle_to_csv(bundle: DatasetBundle, coords_path, signals_path, masks_path) -> None:
    with open(coords_path, "w") as fh:
        fh.write("node,x,y\n")
        for i, (x, y) in enumerate(bundle.coords):
            fh.write(f"{i},{float(x)!r},{float(y)!r}\n")
    with open(signals_path, "w") as fh:
        fh.write("node,snapshot,value\n")
        for i in range(bundle.n):
            for j in range(bundle.snapshots):
                fh.write(f"{i},{j},{float(bundle.signals[i, j])!r}\n")
    with open(masks_path, "w") as fh:
        fh.write("node,snapshot,observed\n")
        for i in range(bundle.n):
            for j in range(bundle.snapshots):
                fh.write(f"{i},{j},{int(bundle.masks[i, j])}\n")


def synthetic_bundle(
    n: int = 32,
    snapshots: int = 4,
    seed: int = 0,
    side: float = 150.0,
    missing_fraction: float = 0.2,
    knn_k: int = 5,
) -> DatasetBundle:
    """Synthetic stand-in dataset: smooth field over a kNN graph plus masks.

    The signal lives on the low end of the graph spectrum, so interpolation
    by smoothness regularization has something to recover; masks drop a
    missing_fraction of nodes independently per snapshot.
    """
    rng = np.random.default_rng([seed, 71])
    coords = rng.uniform(0.0, side, size=(n, 2))
    g = knn_graph(coords, k=knn_k)
    dec = eigendecompose(build_shift(g, "normalized-laplacian"))
    profile = np.exp(-6.0 * dec.eigvals / max(dec.lambda_max, 1e-12))
    signals = np.empty((n, snapshots))
    masks = np.empty((n, snapshots))
    for j in range(snapshots):
        zhat = profile * rng.normal(size=n)
        z = igft(dec, zhat)
        z *= math.sqrt(n) / max(float(np.linalg.norm(z)), 1e-12)
        signals[:, j] = z
        masks[:, j] = (rng.random(n) >= missing_fraction).astype(float)
        if masks[:, j].sum() == 0:
            masks[0, j] = 1.0
    return DatasetBundle(coords, signals, masks)


def validate_bundle(bundle: DatasetBundle, knn_k: int = 5) -> dict:
    """Dimension, mask, and graph-connectivity report for a dataset."""
    g = knn_graph(bundle.coords, k=knn_k)
    report = {
        "nodes": bundle.n,
        "snapshots": bundle.snapshots,
        "knn_k": knn_k,
        "knn_connected": bool(g.is_connected()),
        "mask_observed_fraction": float(bundle.masks.mean()),
        "signal_min": float(bundle.signals.min()),
        "signal_max": float(bundle.signals.max()),
    }
    if not report["knn_connected"]:
        report["suggestion"] = f"kNN graph disconnected at k={knn_k}; raise k"
    return report


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _guard_nse(values) -> None:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise RuntimeError("non-finite or negative NSE encountered")


def _write_rows(path, rows) -> None:
    """rows of (axis, nse_mean, nse_ci, bound-or-None, bits_total)."""
    lines = [CSV_HEADER]
    for axis, mean, ci, bound, bits in rows:
        _guard_nse(mean)
        lines.append(
            ",".join([_fmt(axis), _fmt(mean), _fmt(ci), _fmt(bound), str(int(bits))])
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _substream(seed: int, variant: str, *keys) -> int:
    words = [seed, _VARIANT_IDS[variant]] + [int(round(k * 1_000_000)) for k in keys]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def _mc_rows(estimator, trials: int, base_seed: int):
    """Per-index mean and 95% halfwidth of estimator(rng) over trials."""
    samples = None
    for i in range(trials):
        value = np.atleast_1d(
            np.asarray(estimator(np.random.default_rng([base_seed, i])), dtype=float)
        )
        if samples is None:
            samples = np.empty((trials, value.size))
        samples[i] = value
    mean = samples.mean(axis=0)
    if trials < 2:
        half = np.zeros_like(mean)
    else:
        half = 1.96 * samples.std(axis=0, ddof=1) / math.sqrt(trials)
    return mean, half


def resolve_graph(cfg: ExperimentConfig):
    if "edges" in cfg.graph:
        return graph_from_csv(cfg.graph["edges"], cfg.graph.get("coords"))
    return random_geometric(
        int(cfg.graph["n"]),
        float(cfg.graph["side"]),
        float(cfg.graph["radius"]),
        seed=cfg.seed,
    )


def fir_round_ranges(S, x, K: int, margin: float = 2.0) -> tuple:
    """Per-round quantizer ranges from an unquantized dry run.

    Round k transmits roughly S^k x, whose entries can outgrow a fixed
    range when the shift is expansive; the returned range covers the dry-run
    peak with a multiplicative margin for quantization-noise growth.
    """
    ranges = []
    z = np.asarray(x, dtype=float)
    m = S.matrix if hasattr(S, "matrix") else np.asarray(S, dtype=float)
    for _ in range(K):
        peak = float(np.max(np.abs(z)))
        ranges.append(2.0 * margin * peak if peak > 0 else 1.0)
        z = m @ z
    return tuple(ranges)


def _fixed_schedule(cfg: ExperimentConfig, x_scale: float) -> StepsizeSchedule:
    return StepsizeSchedule.fixed(2.0 * x_scale / 2**cfg.bits_fixed, max_bits=cfg.chi)


def _dynamic_schedule(
    cfg: ExperimentConfig, x_scale: float, contraction: float
) -> StepsizeSchedule:
    rate = cfg.rate if cfg.rate is not None else contraction
    rate = min(max(rate, 1e-6), 1.0 - 1e-9)
    return StepsizeSchedule.geometric(
        2.0 * x_scale / 2**cfg.bits_init, rate, max_bits=cfg.chi
    )


def _effective_explicit(schedule: StepsizeSchedule, ranges) -> StepsizeSchedule:
    deltas = [effective_stepsize(schedule, t, r)[0] for t, r in enumerate(ranges)]
    return StepsizeSchedule.explicit(tuple(deltas))


def _write_reports(cfg: ExperimentConfig, out_dir: str, files: list, summary: dict) -> None:
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
        fh.write("\n")
    manifest = {
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "config_sha256": config_sha256(cfg),
        "outputs": sorted(files + ["summary.json"]),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def run_lowpass(cfg: ExperimentConfig) -> dict:
    """Ideal low-pass approximation: spectral NSE against the ideal response.

    For each filter order in the sweep, designs FIR taps toward the
    indicator of the lower half-spectrum under the linear accumulated-noise
    cap and runs them quantized. The fixed and geometric schedules share the
    initial stepsize, so the geometric one spends more bits per later round
    (capped at chi) in exchange for less accumulated noise; the unquantized
    variant isolates the pure approximation error of the plain LS fit.
    """
    if cfg.sweep_axis != "K":
        raise ValueError("lowpass sweeps the filter order K")
    if cfg.shift_kind != "normalized-laplacian":
        raise ValueError("lowpass uses the normalized laplacian shift")
    g = resolve_graph(cfg)
    S = build_shift(g, cfg.shift_kind)
    dec = eigendecompose(S)
    lam_c = 0.5 * (dec.lambda_min + dec.lambda_max)

    def h_star(lam):
        return 1.0 if lam <= lam_c else 0.0

    x = igft(dec, np.ones(g.n) / math.sqrt(g.n))
    x_norm = float(np.linalg.norm(x))
    y_ideal_hat = np.where(dec.eigvals <= lam_c, 1.0, 0.0) / math.sqrt(g.n)
    ideal_energy = float(np.sum(y_ideal_hat**2))

    epsilon = cfg.design_epsilon
    if epsilon is None:
        epsilon = 0.05 * ideal_energy / g.n

    rows = {"unquantized": [], "fixed": [], "dynamic": []}
    for K in cfg.sweep_grid:
        c_ls = fir_ls_design(h_star, K, dec.eigvals)
        y_fit_hat = gft(dec, fir_apply(S, c_ls, x))
        approx_nse = float(np.sum((y_fit_hat - y_ideal_hat) ** 2)) / ideal_energy
        rows["unquantized"].append((K, approx_nse, 0.0, approx_nse, 0))

        ranges = fir_round_ranges(S, x, K)
        rate = 1.0 / dec.lambda_max if dec.lambda_max > 1.0 else 0.5
        delta0 = 2.0 * x_norm / 2**cfg.bits_fixed
        fixed = StepsizeSchedule.fixed(delta0, max_bits=cfg.chi)
        dynamic = StepsizeSchedule.geometric(delta0, rate, max_bits=cfg.chi)
        for name, sched in (("fixed", fixed), ("dynamic", dynamic)):
            dc = DesignConstraints(
                lambda_grid=dec.eigvals, schedule=sched, epsilon=epsilon
            )
            c = fir_quantization_aware_design(h_star, K, dc).coefficients
            fit_nse = float(
                np.sum((gft(dec, fir_apply(S, c, x)) - y_ideal_hat) ** 2)
            ) / ideal_energy

            def core(rng, c=c, sched=sched):
                qseed = int(rng.integers(2**32))
                q = DitheredQuantizer(sched, range_policy=ranges, seed=qseed)
                run = fir_apply_quantized(S, c, x, q)
                value = float(
                    np.sum((gft(dec, run.output) - y_ideal_hat) ** 2)
                ) / ideal_energy
                return value, run.ledger.total_bits

            bseed = _substream(cfg.seed, name, K)
            mean, half = _mc_rows(lambda rng, f=core: f(rng)[0], cfg.trials, bseed)
            _, bits = core(np.random.default_rng([bseed, 0]))
            mse_pred = fir_mse_exact(S, c, _effective_explicit(sched, ranges))
            bound = fit_nse + g.n * mse_pred / ideal_energy
            rows[name].append((K, float(mean[0]), float(half[0]), bound, bits))

    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    files = []
    for name, data in rows.items():
        fname = f"lowpass_{name}.csv"
        _write_rows(os.path.join(out, fname), data)
        files.append(fname)
    summary = {
        "scenario": "lowpass",
        "lambda_c": lam_c,
        "orders": list(cfg.sweep_grid),
        "trials": cfg.trials,
        "final_order_nse": {
            name: data[-1][1] for name, data in rows.items()
        },
    }
    _write_reports(cfg, out, files, summary)
    return {"files": files, "summary": summary, "exit_code": 0}


def _smooth_field(dec, seed: int, n: int) -> np.ndarray:
    rng = np.random.default_rng([seed, 101])
    profile = np.exp(-4.0 * dec.eigvals / max(abs(dec.lambda_max), 1e-12))
    z = igft(dec, profile * rng.normal(size=n))
    return z * math.sqrt(n) / max(float(np.linalg.norm(z)), 1e-12)


def _denoise_static(cfg: ExperimentConfig) -> dict:
    """Tikhonov denoising on a fixed graph: quantized vs unquantized outputs.

    ARMA variants report NSE per iteration; FIR variants report NSE per
    filter order from the sweep grid, with taps fitted to 1/(1 + w lambda).
    """
    g = resolve_graph(cfg)
    S = build_shift(g, cfg.shift_kind)
    dec = eigendecompose(S)
    w = cfg.arma_w
    c1 = tikhonov_arma1(w, S)
    z = _smooth_field(dec, cfg.seed, g.n)
    x_scale = math.sqrt(g.n * (1.0 + cfg.sigma2))
    T = cfg.iterations

    fixed = _fixed_schedule(cfg, x_scale)
    dynamic = _dynamic_schedule(cfg, x_scale, w * S.rho)
    sigma_q2 = {
        "arma_fixed": effective_stepsize(fixed, 0, 2.0 * x_scale)[0] ** 2 / 12.0
    }

    def draw_input(rng):
        return z + rng.normal(0.0, math.sqrt(cfg.sigma2), size=g.n)

    rows = {}
    bits_used = {}
    for name, sched in (("arma_fixed", fixed), ("arma_dynamic", dynamic)):

        def core(rng, sched=sched):
            x = draw_input(rng)
            qseed = int(rng.integers(2**32))
            q = DitheredQuantizer(sched, seed=qseed)
            run = arma_run(S, c1, x, T, q=q)
            refs = run.outputs - run.error_trajectory
            nse_t = np.sum(run.error_trajectory**2, axis=1) / np.sum(refs**2, axis=1)
            return np.concatenate([nse_t, np.sum(refs**2, axis=1)]), run.ledger.total_bits

        bseed = _substream(cfg.seed, name)
        mean, half = _mc_rows(lambda rng, f=core: f(rng)[0], cfg.trials, bseed)
        _, bits = core(np.random.default_rng([bseed, 0]))
        nse_mean, ref_energy = mean[:T], mean[T:]
        nse_half = half[:T]
        data = []
        for t in range(1, T + 1):
            if name == "arma_fixed":
                mse = arma_mse_bound_fixed(1, sigma_q2[name], w, S.rho, t)
            else:
                mse = arma_mse_bound_dynamic(
                    1, dynamic.delta0, w, S.rho, t
                )
            bound = g.n * mse / ref_energy[t - 1]
            data.append((t, float(nse_mean[t - 1]), float(nse_half[t - 1]), bound, bits))
        rows[name] = data
        bits_used[name] = bits

    lam_grid = dec.eigvals
    for name, sched in (("fir_fixed", fixed), ("fir_dynamic", dynamic)):
        data = []
        for K in cfg.sweep_grid:
            dc = DesignConstraints(lambda_grid=lam_grid, schedule=sched)
            design = fir_quantization_aware_design(
                lambda lam: 1.0 / (1.0 + w * lam), K, dc
            )
            c = design.coefficients

            def core(rng, c=c, sched=sched, K=K):
                x = draw_input(rng)
                ranges = fir_round_ranges(S, x, K)
                qseed = int(rng.integers(2**32))
                q = DitheredQuantizer(sched, range_policy=ranges, seed=qseed)
                run = fir_apply_quantized(S, c, x, q)
                ref = run.output - run.error
                return (
                    np.array([nse(run.output, ref), float(np.sum(ref**2))]),
                    run.ledger.total_bits,
                )

            bseed = _substream(cfg.seed, name, K)
            mean, half = _mc_rows(lambda rng, f=core: f(rng)[0], cfg.trials, bseed)
            _, bits = core(np.random.default_rng([bseed, 0]))
            ranges0 = fir_round_ranges(S, z, K)
            mse_pred = fir_mse_exact(S, c, _effective_explicit(sched, ranges0))
            bound = g.n * mse_pred / mean[1]
            data.append((K, float(mean[0]), float(half[0]), bound, bits))
        rows[name] = data

    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    files = []
    for name, data in rows.items():
        fname = f"denoise_{name}.csv"
        _write_rows(os.path.join(out, fname), data)
        files.append(fname)
    summary = {
        "scenario": "denoise",
        "mode": "static",
        "w": w,
        "sigma2": cfg.sigma2,
        "trials": cfg.trials,
        "final_nse": {name: data[-1][1] for name, data in rows.items()},
    }
    _write_reports(cfg, out, files, summary)
    return {"files": files, "summary": summary, "exit_code": 0}


def _denoise_res(cfg: ExperimentConfig) -> dict:
    """Tikhonov denoising under random link failures.

    NSE is measured between the quantized output over the time-varying
    realizations and the unquantized output of the nominal filter on the
    deterministic graph. The sweep axis selects the figure: K (orders and
    iterations), p (link activation probability), or chi (bit cap).
    """
    if cfg.shift_kind not in RES_KINDS:
        raise ValueError(
            f"link-failure runs need shift kind in {RES_KINDS}, got {cfg.shift_kind!r}"
        )
    g = resolve_graph(cfg)
    S = build_shift(g, cfg.shift_kind)
    dec = eigendecompose(S)
    w = cfg.arma_w
    c1 = tikhonov_arma1(w, S)
    z = _smooth_field(dec, cfg.seed, g.n)
    x_scale = math.sqrt(g.n * (1.0 + cfg.sigma2))
    T = cfg.iterations
    p_default = cfg.res_p if cfg.res_p is not None else 0.95

    def draw_input(rng):
        return z + rng.normal(0.0, math.sqrt(cfg.sigma2), size=g.n)

    def arma_core(rng, m, sched):
        x = draw_input(rng)
        qseed = int(rng.integers(2**32))
        q = DitheredQuantizer(sched, seed=qseed)
        run = arma_run(m, c1, x, T, q=q, rng=rng)
        ref = arma_run(S, c1, x, T)
        err = run.outputs - ref.outputs
        nse_t = np.sum(err**2, axis=1) / np.sum(ref.outputs**2, axis=1)
        return nse_t, run.ledger.total_bits

    def fir_core(rng, m, c, c_ref, K, sched):
        x = draw_input(rng)
        ranges = fir_round_ranges(S, x, K)
        qseed = int(rng.integers(2**32))
        q = DitheredQuantizer(sched, range_policy=ranges, seed=qseed)
        shifts = draw_res_sequence(m, K, rng)
        run = fir_apply_tv_quantized(shifts, c, x, q)
        y_ref = fir_apply(S, c_ref, x)
        return np.array([nse(run.output, y_ref)]), run.ledger.total_bits

    def designs_for(m, K, sched):
        dc_ls = DesignConstraints(lambda_grid=dec.eigvals, schedule=sched)
        c_ls = fir_quantization_aware_design(
            lambda lam: 1.0 / (1.0 + w * lam), K, dc_ls
        ).coefficients
        dc_rob = DesignConstraints(
            lambda_grid=dec.eigvals, schedule=sched, gamma=cfg.robust_gamma
        )
        c_rob = fir_robust_res_design(c_ls, S, m, dc_rob).coefficients
        return c_ls, c_rob

    rows = {}
    out_suffix = {"K": "", "p": "_vs_p", "chi": "_vs_chi"}[cfg.sweep_axis]

    if cfg.sweep_axis == "K":
        m = res_model(g, cfg.shift_kind, p_default)
        dynamic = _dynamic_schedule(cfg, x_scale, w * S.rho)
        bseed = _substream(cfg.seed, "res_arma", p_default)
        mean, half = _mc_rows(
            lambda rng: arma_core(rng, m, dynamic)[0], cfg.trials, bseed
        )
        _, bits = arma_core(np.random.default_rng([bseed, 0]), m, dynamic)
        rows["res_arma"] = [
            (t, float(mean[t - 1]), float(half[t - 1]), None, bits)
            for t in range(1, T + 1)
        ]
        fir_sched = _dynamic_schedule(cfg, x_scale, 0.5)
        for name, which in (("res_fir_ls", 0), ("res_fir_robust", 1)):
            data = []
            for K in cfg.sweep_grid:
                pair = designs_for(m, K, fir_sched)
                c = pair[which]
                bseed = _substream(cfg.seed, name, K)
                mean, half = _mc_rows(
                    lambda rng, c=c, K=K: fir_core(rng, m, c, pair[0], K, fir_sched)[0],
                    cfg.trials,
                    bseed,
                )
                _, bits = fir_core(
                    np.random.default_rng([bseed, 0]), m, c, pair[0], K, fir_sched
                )
                data.append((K, float(mean[0]), float(half[0]), None, bits))
            rows[name] = data
    elif cfg.sweep_axis == "p":
        K = cfg.fir_order
        dynamic = _dynamic_schedule(cfg, x_scale, w * S.rho)
        fir_sched = _dynamic_schedule(cfg, x_scale, 0.5)
        arma_data, ls_data, rob_data = [], [], []
        for p in cfg.sweep_grid:
            m = res_model(g, cfg.shift_kind, p)
            bseed = _substream(cfg.seed, "res_arma", p)
            mean, half = _mc_rows(
                lambda rng: arma_core(rng, m, dynamic)[0][-1:], cfg.trials, bseed
            )
            _, bits = arma_core(np.random.default_rng([bseed, 0]), m, dynamic)
            arma_data.append((p, float(mean[0]), float(half[0]), None, bits))
            c_ls, c_rob = designs_for(m, K, fir_sched)
            for name, c, data in (
                ("res_fir_ls", c_ls, ls_data),
                ("res_fir_robust", c_rob, rob_data),
            ):
                bseed = _substream(cfg.seed, name, p)
                mean, half = _mc_rows(
                    lambda rng, c=c: fir_core(rng, m, c, c_ls, K, fir_sched)[0],
                    cfg.trials,
                    bseed,
                )
                _, bits = fir_core(
                    np.random.default_rng([bseed, 0]), m, c, c_ls, K, fir_sched
                )
                data.append((p, float(mean[0]), float(half[0]), None, bits))
        rows["res_arma"] = arma_data
        rows["res_fir_ls"] = ls_data
        rows["res_fir_robust"] = rob_data
    else:
        K = cfg.fir_order
        m = res_model(g, cfg.shift_kind, p_default)
        arma_data, ls_data, rob_data = [], [], []
        for chi in cfg.sweep_grid:
            cfg_chi = replace(cfg, chi=int(chi))
            dynamic = _dynamic_schedule(cfg_chi, x_scale, w * S.rho)
            fir_sched = _dynamic_schedule(cfg_chi, x_scale, 0.5)
            bseed = _substream(cfg.seed, "res_arma", chi)
            mean, half = _mc_rows(
                lambda rng: arma_core(rng, m, dynamic)[0][-1:], cfg.trials, bseed
            )
            _, bits = arma_core(np.random.default_rng([bseed, 0]), m, dynamic)
            arma_data.append((chi, float(mean[0]), float(half[0]), None, bits))
            c_ls, c_rob = designs_for(m, K, fir_sched)
            for name, c, data in (
                ("res_fir_ls", c_ls, ls_data),
                ("res_fir_robust", c_rob, rob_data),
            ):
                bseed = _substream(cfg.seed, name, chi)
                mean, half = _mc_rows(
                    lambda rng, c=c, s=fir_sched: fir_core(rng, m, c, c_ls, K, s)[0],
                    cfg.trials,
                    bseed,
                )
                _, bits = fir_core(
                    np.random.default_rng([bseed, 0]), m, c, c_ls, K, fir_sched
                )
                data.append((chi, float(mean[0]), float(half[0]), None, bits))
        rows["res_arma"] = arma_data
        rows["res_fir_ls"] = ls_data
        rows["res_fir_robust"] = rob_data

    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    files = []
    for name, data in rows.items():
        fname = f"denoise_{name}{out_suffix}.csv"
        _write_rows(os.path.join(out, fname), data)
        files.append(fname)
    summary = {
        "scenario": "denoise",
        "mode": "res",
        "w": w,
        "p": p_default if cfg.sweep_axis != "p" else list(cfg.sweep_grid),
        "chi": cfg.chi if cfg.sweep_axis != "chi" else list(cfg.sweep_grid),
        "trials": cfg.trials,
        "final_nse": {name: data[-1][1] for name, data in rows.items()},
    }
    _write_reports(cfg, out, files, summary)
    return {"files": files, "summary": summary, "exit_code": 0}


def run_denoise(cfg: ExperimentConfig) -> dict:
    if cfg.res_p is None and cfg.sweep_axis in ("p", "chi"):
        raise ValueError("sweeping p or chi needs the res table")
    if cfg.res_p is not None:
        return _denoise_res(cfg)
    if cfg.sweep_axis != "K":
        raise ValueError("static denoising sweeps the filter order K")
    return _denoise_static(cfg)


def run_interpolate(cfg: ExperimentConfig, bundle: DatasetBundle | None = None) -> dict:
    """Interpolation of partially observed signals by smoothness regularization.

    For each missing fraction, wipes signal values at random per trial, runs
    the quantized one-pole recursion on the interpolation shift, and reports
    the NSE against the unquantized run per iteration plus the reconstruction
    NSE against the true signal after 20 iterations (with a zero-fill
    baseline in the summary).
    """
    if cfg.sweep_axis != "missing-fraction":
        raise ValueError("interpolation sweeps the missing fraction")
    if bundle is None:
        if cfg.dataset is not None:
            bundle = bundle_from_csv(
                cfg.dataset["coords"], cfg.dataset["signals"], cfg.dataset["masks"]
            )
        else:
            bundle = synthetic_bundle(
                n=int(cfg.graph["n"]), seed=cfg.seed, knn_k=cfg.knn_k
            )
    g = knn_graph(bundle.coords, k=cfg.knn_k)
    if not g.is_connected():
        raise ValueError(f"kNN graph disconnected at k={cfg.knn_k}; raise knn_k")
    S = build_shift(g, cfg.shift_kind)
    w = cfg.arma_w
    x_true = np.asarray(bundle.signals[:, 0], dtype=float)
    T = cfg.iterations
    t_recon = min(20, T)
    x_norm = float(np.linalg.norm(x_true))

    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    files = []
    recon_rows = []
    baselines = {}
    for frac in cfg.sweep_grid:
        if not 0.0 <= frac < 1.0:
            raise ValueError("missing fraction must be in [0, 1)")

        def core(rng, frac=frac):
            keep = rng.random(g.n) >= frac
            if not keep.any():
                keep[int(rng.integers(g.n))] = True
            mask = keep.astype(float)
            s_tilde, c = interpolation_arma1(mask, w, S)
            x_prime = x_true * mask
            sched = _dynamic_schedule(cfg, x_norm, s_tilde.rho)
            qseed = int(rng.integers(2**32))
            q = DitheredQuantizer(sched, seed=qseed)
            run = arma_run(s_tilde, c, x_prime, T, q=q)
            refs = run.outputs - run.error_trajectory
            nse_t = np.sum(run.error_trajectory**2, axis=1) / np.sum(
                refs**2, axis=1
            )
            recon = nse(run.outputs[t_recon - 1], x_true)
            zero_fill = nse(x_prime, x_true) if frac > 0 else 0.0
            return (
                np.concatenate([nse_t, [recon, zero_fill]]),
                run.ledger.total_bits,
            )

        bseed = _substream(cfg.seed, "interp", frac)
        mean, half = _mc_rows(lambda rng: core(rng)[0], cfg.trials, bseed)
        _, bits = core(np.random.default_rng([bseed, 0]))
        traj = [
            (t, float(mean[t - 1]), float(half[t - 1]), None, bits)
            for t in range(1, T + 1)
        ]
        pct = int(round(100 * frac))
        fname = f"interpolate_traj_m{pct:02d}.csv"
        _write_rows(os.path.join(out, fname), traj)
        files.append(fname)
        recon_rows.append((frac, float(mean[T]), float(half[T]), None, bits))
        baselines[str(pct)] = {
            "reconstruction_nse": float(mean[T]),
            "zero_fill_nse": float(mean[T + 1]),
        }

    _write_rows(os.path.join(out, "interpolate_reconstruction.csv"), recon_rows)
    files.append("interpolate_reconstruction.csv")
    summary = {
        "scenario": "interpolate",
        "w": w,
        "iterations": T,
        "reconstruction_at": t_recon,
        "trials": cfg.trials,
        "baseline_comparison": baselines,
        "synthetic": cfg.dataset is None,
    }
    _write_reports(cfg, out, files, summary)
    return {"files": files, "summary": summary, "exit_code": 0}


def run_bounds_audit(cfg: ExperimentConfig) -> dict:
    """Audit every closed-form MSE claim against Monte Carlo on a small graph.

    Emits one report CSV per claim. Upper bounds must dominate the empirical
    estimate at the 95% level; exactness claims must match within three
    standard errors. The exit code is nonzero iff any claim is violated.
    The printed static-noise formula is compared against the exact oracle
    for sign-mixed taps and the discrepancy is reported, not failed.
    """
    if cfg.trials < 2:
        raise ValueError("bounds audit needs at least 2 trials")
    n = min(int(cfg.graph["n"]), 50)
    g = random_geometric(n, float(cfg.graph["side"]), float(cfg.graph["radius"]), seed=cfg.seed)
    K = cfg.fir_order
    T = min(cfg.iterations, 100)
    S_lap = build_shift(g, "laplacian")
    S_scl = build_shift(g, "scaled-laplacian")
    dec_lap = eigendecompose(S_lap)

    phi_pos = FirCoefficients(np.array([0.6**k for k in range(K + 1)]))
    phi_mixed = FirCoefficients(np.array([(-0.6) ** k for k in range(K + 1)]))
    x = igft(dec_lap, np.ones(n) / math.sqrt(n))
    base_seed = cfg.seed
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    files = []
    verdicts = {}
    total_violations = 0

    def fir_mse_estimator(S, c, sched, ranges):
        def estimator(rng):
            qseed = int(rng.integers(2**32))
            q = DitheredQuantizer(sched, range_policy=ranges, seed=qseed)
            run = fir_apply_quantized(S, c, x, q)
            return float(np.sum(run.error**2)) / n

        return estimator

    def record(claim, report, kind, extra=None):
        nonlocal total_violations
        fname = f"audit_{claim}.csv"
        report.to_csv(os.path.join(out, fname))
        files.append(fname)
        if kind == "bound":
            bad = len(report.violations())
        else:
            se = report.mc_halfwidth / 1.96
            bad = int(
                np.count_nonzero(
                    np.abs(report.mc_estimate - report.formula_value) > 3.0 * se
                )
            )
        total_violations += bad
        entry = {"violations": bad, "kind": kind}
        if extra:
            entry.update(extra)
        verdicts[claim] = entry

    # exactness of the full-covariance formula, fixed stepsize
    sched = StepsizeSchedule.fixed(0.25)
    ranges = fir_round_ranges(S_lap, x, K, margin=4.0)
    exact = fir_mse_exact(S_lap, phi_mixed, _effective_explicit(sched, ranges))
    report = monte_carlo(
        fir_mse_estimator(S_lap, phi_mixed, sched, ranges),
        cfg.trials,
        _substream(base_seed, "audit", 1),
        formula=exact,
    )
    printed = fir_mse_printed(dec_lap, phi_mixed, 0.25**2 / 12.0)
    record(
        "fir-exact",
        report,
        "match",
        extra={
            "printed_formula": printed,
            "exact_formula": exact,
            "printed_vs_exact_gap": abs(printed - exact),
            "note": "printed static-noise formula differs for sign-mixed taps; informational",
        },
    )

    # sandwich of the printed formula for nonnegative taps
    exact_pos = fir_mse_exact(S_lap, phi_pos, _effective_explicit(sched, ranges))
    printed_pos = fir_mse_printed(dec_lap, phi_pos, 0.25**2 / 12.0)
    lo, hi = fir_mse_bounds_fixed(dec_lap.lambda_max, phi_pos, 0.25**2 / 12.0, n)
    report = monte_carlo(
        fir_mse_estimator(S_lap, phi_pos, sched, ranges),
        cfg.trials,
        _substream(base_seed, "audit", 2),
        formula=exact_pos,
        bound_lower=lo,
        bound_upper=hi,
    )
    sandwich_ok = lo <= printed_pos <= hi
    record(
        "fir-fixed-sandwich",
        report,
        "bound",
        extra={"printed_in_sandwich": bool(sandwich_ok)},
    )
    if not sandwich_ok:
        total_violations += 1

    # Decreasing-stepsize FIR bound. The closed form is linear in the filter
    # taps and absorbs the per-round amplification into a spectral-norm chain
    # that is only tight when the top eigenvalue sits close to one, so the
    # audit rescales the Laplacian to lambda_max = 1.25 (the premise needs
    # lambda_max > 1, not a large spectral spread).
    lam = 1.25
    S_dyn = ShiftOperator(
        (lam / dec_lap.lambda_max) * S_lap.matrix,
        "custom",
        lam * (1.0 + 1e-9),
        symmetric=True,
    )
    delta0 = 0.5
    dyn = StepsizeSchedule.geometric(delta0, 1.0 / lam)
    ranges_dyn = fir_round_ranges(S_dyn, x, K, margin=4.0)
    bound = fir_mse_bound_dynamic(lam, phi_pos, delta0)
    exact_dyn = fir_mse_exact(S_dyn, phi_pos, _effective_explicit(dyn, ranges_dyn))
    report = monte_carlo(
        fir_mse_estimator(S_dyn, phi_pos, dyn, ranges_dyn),
        cfg.trials,
        _substream(base_seed, "audit", 3),
        formula=exact_dyn,
        bound_upper=bound,
    )
    record("fir-dynamic-bound", report, "bound")

    # ARMA fixed-stepsize trajectory bound; contraction 0.9 keeps the dynamic
    # bound above the float64 floor of the empirical estimate through t = 100
    w = 0.9 / S_lap.rho
    c1 = tikhonov_arma1(w, S_lap)
    delta_f = 0.25
    sched_f = StepsizeSchedule.fixed(delta_f)
    a = c1.psi_max * S_lap.rho
    x_arma = x / max(float(np.max(np.abs(x))), 1e-12)

    def arma_err_estimator(source, sched, needs_rng=False):
        def estimator(rng):
            qseed = int(rng.integers(2**32))
            q = DitheredQuantizer(sched, range_policy=4.0 * float(np.linalg.norm(x_arma)), seed=qseed)
            run = arma_run(source, c1, x_arma, T, q=q, rng=rng if needs_rng else None)
            return np.sum(run.error_trajectory**2, axis=1) / n

        return estimator

    sq2 = delta_f**2 / 12.0
    bounds_t = np.array(
        [arma_mse_bound_fixed(1, sq2, c1.psi_max, S_lap.rho, t) for t in range(1, T + 1)]
    )
    report = monte_carlo(
        arma_err_estimator(S_lap, sched_f),
        cfg.trials,
        _substream(base_seed, "audit", 4),
        bound_upper=bounds_t,
    )
    record("arma-fixed-bound", report, "bound")

    # ARMA dynamic-stepsize trajectory bound (delta0 kept <= 1)
    d0 = 0.5
    sched_d = StepsizeSchedule.geometric(d0, a)
    bounds_t = np.array(
        [arma_mse_bound_dynamic(1, d0, c1.psi_max, S_lap.rho, t) for t in range(1, T + 1)]
    )
    report = monte_carlo(
        arma_err_estimator(S_lap, sched_d),
        cfg.trials,
        _substream(base_seed, "audit", 5),
        bound_upper=bounds_t,
    )
    record("arma-dynamic-bound", report, "bound")

    # FIR over random link failures, fixed stepsize
    p = cfg.res_p if cfg.res_p is not None else 0.9
    m = res_model(g, "scaled-laplacian", p)
    phi_scl = FirCoefficients(np.array([0.6**k for k in range(K + 1)]))
    sched_res = StepsizeSchedule.fixed(0.25)
    ranges_res = fir_round_ranges(S_scl, x, K, margin=4.0)
    bound = fir_res_mse_bound(S_scl.rho, phi_scl, _effective_explicit(sched_res, ranges_res))

    def fir_res_estimator(rng):
        qseed = int(rng.integers(2**32))
        q = DitheredQuantizer(sched_res, range_policy=ranges_res, seed=qseed)
        shifts = draw_res_sequence(m, K, rng)
        run = fir_apply_tv_quantized(shifts, phi_scl, x, q)
        return float(np.sum(run.error**2)) / n

    report = monte_carlo(
        fir_res_estimator,
        cfg.trials,
        _substream(base_seed, "audit", 6),
        bound_upper=bound,
    )
    record("fir-res-bound", report, "bound")

    # ARMA over random link failures: fixed and dynamic stepsize bounds
    w_scl = 0.9
    c_scl = tikhonov_arma1(w_scl, S_scl)
    a_scl = c_scl.psi_max * S_scl.rho

    def arma_res_estimator(sched):
        def estimator(rng):
            qseed = int(rng.integers(2**32))
            q = DitheredQuantizer(
                sched, range_policy=4.0 * float(np.linalg.norm(x_arma)), seed=qseed
            )
            run = arma_run(m, c_scl, x_arma, T, q=q, rng=rng)
            return np.sum(run.error_trajectory**2, axis=1) / n

        return estimator

    bounds_t = np.array(
        [
            arma_mse_bound_fixed(1, sq2, c_scl.psi_max, S_scl.rho, t, res=True)
            for t in range(1, T + 1)
        ]
    )
    report = monte_carlo(
        arma_res_estimator(StepsizeSchedule.fixed(delta_f)),
        cfg.trials,
        _substream(base_seed, "audit", 7),
        bound_upper=bounds_t,
    )
    record("arma-res-fixed-bound", report, "bound")

    bounds_t = np.array(
        [
            arma_mse_bound_dynamic(1, d0, c_scl.psi_max, S_scl.rho, t, res=True)
            for t in range(1, T + 1)
        ]
    )
    report = monte_carlo(
        arma_res_estimator(StepsizeSchedule.geometric(d0, a_scl)),
        cfg.trials,
        _substream(base_seed, "audit", 8),
        bound_upper=bounds_t,
    )
    record("arma-res-dynamic-bound", report, "bound")

    exit_code = 0 if total_violations == 0 else 1
    summary = {
        "scenario": "bounds-audit",
        "n": n,
        "K": K,
        "trials": cfg.trials,
        "total_violations": total_violations,
        "verdicts": verdicts,
    }
    _write_reports(cfg, out, files, summary)
    return {"files": files, "summary": summary, "exit_code": exit_code}


def run_scenario(cfg: ExperimentConfig) -> dict:
    """Dispatch a resolved config to its scenario runner."""
    runner = {
        "lowpass": run_lowpass,
        "denoise": run_denoise,
        "interpolate": run_interpolate,
        "bounds-audit": run_bounds_audit,
    }[cfg.scenario]
    return runner(cfg)
