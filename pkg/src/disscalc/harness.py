"""Experiment configuration, seeded trial sweeps, records and replay.

Each experiment is a function ``trial(cfg, idx) -> (record, ok)``. Trials
draw their matrices from streams keyed by ``(seed, idx, k)``, so any record
can be recomputed on its own. Records carry only deterministic fields;
timestamps and wall times go in the header line of the JSON-lines file.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .besov import WINDOW_ID, build_window, decompose
from .errors import ConfigInvalid, VersionMismatch, ZeroPerturbation
from .matrix_core import PRNG_VERSION, random_dissipative, schatten_norm
from .perturbation import (
    K_EMP,
    convex_perturbation,
    elementary_bound_check,
    identity_first,
    identity_full,
    identity_second,
    lipschitz_ratio,
    regularization_contract_ok,
    regularization_convergence,
    residual_schedule_ok,
    schatten_certificates,
    standard_functions,
)
from .scalar_functions import (
    TWO_PI,
    AnalyticExpSum2D,
    cardinal_reconstruct_1d,
    cardinal_row_sumsq,
    load_function,
)

EXPERIMENTS = (
    "window-check",
    "cardinal-check",
    "besov-norm",
    "identity-check",
    "regularization-check",
    "lipschitz-sweep",
    "p-sweep",
    "bound-check",
)
ORDERS = ("first", "second", "ab12", "ba21")
SUP_MODES = ("coef_sum", "grid")

# per-experiment defaults layered under the user config
DEFAULTS = {
    "window-check": {"trials": 1},
    "cardinal-check": {"trials": 1, "truncations": [1024, 4096]},
    "besov-norm": {"trials": 1},
    "identity-check": {"trials": 20, "dims": [4]},
    "regularization-check": {"trials": 50, "dims": [2, 3, 4, 5, 6]},
    "lipschitz-sweep": {"trials": 100, "dims": [2, 3, 4, 5, 6], "p": [1, 2]},
    "p-sweep": {"trials": 5, "dims": [2, 4, 8, 16, 32], "p": ["inf"]},
    "bound-check": {"trials": 20, "dims": [4], "truncations": [2048]},
}


def _parse_p(value, where):
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(where, f"expected a number >= 1 or 'inf', got {value!r}")
    if not value >= 1:
        raise ConfigInvalid(where, f"Schatten index must be >= 1, got {value}")
    return float(value)


def _p_label(p):
    return "inf" if math.isinf(p) else (int(p) if float(p).is_integer() else p)


def _pos_int(value, where, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigInvalid(where, f"expected an integer >= {minimum}, got {value!r}")
    return value


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 1
    dims: list = field(default_factory=lambda: [4])
    p: list = field(default_factory=lambda: [2])
    truncations: list = field(default_factory=lambda: [256, 512, 1024, 2048])
    trials: int = 1
    function: object = None
    sup_mode: str = "coef_sum"
    grid_res: int = 4096
    order: str = "first"
    perturbation: float = 0.1
    eps: list = field(default_factory=lambda: [0.1, 1e-2, 1e-3, 1e-4])
    k_emp: float = K_EMP
    dd_sign: float = -1.0
    certificates: bool = True
    output: str = "runs"

    @classmethod
    def from_dict(cls, data: dict, experiment: str | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("config", "top level must be a JSON object")
        name = experiment or data.get("experiment")
        if name not in EXPERIMENTS:
            raise ConfigInvalid("experiment", f"unknown experiment {name!r}")
        known = set(cls.__dataclass_fields__)
        for key in data:
            if key not in known:
                raise ConfigInvalid(key, "unknown field")
        merged = {**DEFAULTS[name], **{k: v for k, v in data.items() if k != "experiment"}}
        cfg = cls(experiment=name, **merged)
        cfg.validate()
        return cfg

    def validate(self):
        _pos_int(self.seed, "seed")
        _pos_int(self.trials, "trials")
        _pos_int(self.grid_res, "grid_res", minimum=2)
        if not isinstance(self.dims, list) or not self.dims:
            raise ConfigInvalid("dims", "expected a nonempty list")
        for i, n in enumerate(self.dims):
            _pos_int(n, f"dims[{i}]")
        if not isinstance(self.p, list) or not self.p:
            raise ConfigInvalid("p", "expected a nonempty list")
        self.p = [_parse_p(v, f"p[{i}]") for i, v in enumerate(self.p)]
        if not isinstance(self.truncations, list) or not self.truncations:
            raise ConfigInvalid("truncations", "expected a nonempty list")
        for i, N in enumerate(self.truncations):
            _pos_int(N, f"truncations[{i}]")
            if N & (N - 1):
                raise ConfigInvalid(f"truncations[{i}]", f"{N} is not a power of two")
        if self.sup_mode not in SUP_MODES:
            raise ConfigInvalid("sup_mode", f"expected one of {SUP_MODES}")
        if self.order not in ORDERS:
            raise ConfigInvalid("order", f"expected one of {ORDERS}")
        if isinstance(self.perturbation, bool) or not isinstance(self.perturbation, (int, float)) \
                or not 0 <= self.perturbation <= 1:
            raise ConfigInvalid("perturbation", "expected a number in [0, 1]")
        if not isinstance(self.eps, list) or len(self.eps) < 2:
            raise ConfigInvalid("eps", "expected at least two values")
        if any(not (isinstance(e, (int, float)) and e > 0) for e in self.eps) \
                or any(b >= a for a, b in zip(self.eps, self.eps[1:])):
            raise ConfigInvalid("eps", "values must be positive and strictly decreasing")
        if self.dd_sign not in (-1, 1, -1.0, 1.0):
            raise ConfigInvalid("dd_sign", "expected -1 or 1")
        if not isinstance(self.k_emp, (int, float)) or not self.k_emp > 0:
            raise ConfigInvalid("k_emp", "expected a positive number")
        if self.function is not None:
            try:
                self._function = load_function(self.function)
            except (OSError, ValueError) as exc:
                raise ConfigInvalid("function", str(exc)) from None
        else:
            self._function = None

    def canonical(self) -> dict:
        """The fields that determine the numerics, in a JSON-ready form."""
        out = asdict(self)
        out.pop("output")
        out["p"] = [_p_label(p) for p in self.p]
        if self._function is not None:
            out["function"] = self._function.to_json()
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def functions(self):
        if self._function is not None:
            return [("custom", self._function)]
        return list(standard_functions().items())


# ---------------------------------------------------------------------------
# trials


def _matrix(cfg, idx, stream, n, hermitian=False):
    return random_dissipative(n, (cfg.seed, idx, stream), hermitian=hermitian).matrix


def _dim(cfg, idx):
    return cfg.dims[idx % len(cfg.dims)]


def _pick_function(cfg, idx):
    funcs = cfg.functions()
    return funcs[idx % len(funcs)]


def _trial_window(cfg, idx):
    win = build_window()
    t = np.logspace(-10, 10, 10_000, base=2.0)
    total = sum(win(t / 2.0**n) for n in range(-20, 21))
    dev = float(np.max(np.abs(total - 1.0)))
    return {"max_deviation": dev}, dev <= 1e-12


def _trial_cardinal(cfg, idx):
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, idx]))
    x = rng.uniform(-10.0, 10.0, 100)
    l2 = float(np.max(np.abs(cardinal_row_sumsq(x, 10_000) - 1.0)))
    z = rng.uniform(-10.0, 10.0, 50)
    exact = np.exp(0.5j * z)
    errs = {}
    for N in cfg.truncations:
        approx = cardinal_reconstruct_1d(lambda n: np.exp(0.5j * TWO_PI * n), 1.0, z, N)
        errs[str(N)] = float(np.max(np.abs(approx - exact)))
    vals = [errs[str(N)] for N in cfg.truncations]
    ok = l2 <= 1e-3 and vals[-1] <= 5e-3
    if len(vals) > 1:
        ok = ok and vals[-1] <= vals[0] / 2
    return {"l2_identity_deviation": l2, "reconstruction_errors": errs, "N": cfg.truncations}, ok


def besov_summary(f: AnalyticExpSum2D, mode="coef_sum", grid_res=4096) -> dict:
    dec = decompose(f, sup_mode=mode, max_resolution=grid_res)
    pieces = [{"n": n, "sup_norm": dec.sup_norms[n]} for n in sorted(dec.sup_norms)]
    return {
        "sigma": f.band_radius(),
        "norm_inhomogeneous": dec.norm_inhomogeneous,
        "norm_homogeneous": dec.norm_homogeneous,
        "sup_f0": dec.sup_f0,
        "pieces": pieces,
    }


def _trial_besov(cfg, idx):
    name, f = _pick_function(cfg, idx)
    rec = besov_summary(f, cfg.sup_mode, cfg.grid_res)
    rec["function"] = name
    return rec, bool(np.isfinite(rec["norm_inhomogeneous"]))


def _identity_inputs(cfg, idx, n):
    L1 = _matrix(cfg, idx, 0, n)
    M1 = _matrix(cfg, idx, 1, n)
    L2 = convex_perturbation(L1, _matrix(cfg, idx, 2, n), cfg.perturbation)
    M2 = convex_perturbation(M1, _matrix(cfg, idx, 3, n), cfg.perturbation)
    return L1, L2, M1, M2


def _trial_identity(cfg, idx):
    name, f = _pick_function(cfg, idx)
    n = _dim(cfg, idx)
    L1, L2, M1, M2 = _identity_inputs(cfg, idx, n)
    dL, dM = schatten_norm(L1 - L2, 2), schatten_norm(M1 - M2, 2)
    residuals, additivity, certs = [], [], []
    for N in cfg.truncations:
        if cfg.order == "first":
            res = identity_first(f, L1, L2, M1, N, cfg.dd_sign)
            scale = dL
        elif cfg.order == "second":
            res = identity_second(f, L1, M1, M2, N, cfg.dd_sign)
            scale = dM
        else:
            res = identity_full(f, L1, L2, M1, M2, N, cfg.order, cfg.dd_sign)
            scale = max(dL, dM)
            if cfg.order == "ab12":
                parts = (identity_first(f, L1, L2, M1, N, cfg.dd_sign)["rhs"]
                         + identity_second(f, L2, M1, M2, N, cfg.dd_sign)["rhs"])
            else:
                parts = (identity_first(f, L1, L2, M2, N, cfg.dd_sign)["rhs"]
                         + identity_second(f, L1, M1, M2, N, cfg.dd_sign)["rhs"])
            additivity.append(float(np.max(np.abs(res["rhs"] - parts))))
        residuals.append(res["residual_s2"])
        if cfg.certificates:
            certs.extend(
                {"N": N, **c}
                for c in schatten_certificates(f, L1, L2, M1, M2, N, ps=(1, 2),
                                               sign=cfg.dd_sign)
            )
    ok = residual_schedule_ok(residuals, scale)
    rec = {
        "function": name,
        "order": cfg.order,
        "residuals": residuals,
        "norms": {"dL_s2": dL, "dM_s2": dM, "scale": scale},
    }
    if additivity:
        rec["additivity"] = additivity
        ok = ok and max(additivity) <= 1e-12
    if certs:
        rec["certificates"] = certs
        rec["certificates_ok"] = all(c["ok"] for c in certs)
        ok = ok and rec["certificates_ok"]
    return rec, bool(ok)


def _trial_regularization(cfg, idx):
    n = _dim(cfg, idx)
    L1 = _matrix(cfg, idx, 0, n)
    L2 = _matrix(cfg, idx, 1, n)
    rows = regularization_convergence(L1, L2, cfg.eps)
    errs = [r["err"] for r in rows]
    ok = regularization_contract_ok(rows) and all(b <= a for a, b in zip(errs, errs[1:]))
    return {"eps": cfg.eps, "residuals": errs,
            "norms": {"dL_s2": schatten_norm(L1 - L2, 2)}}, bool(ok)


def _trial_lipschitz(cfg, idx, hermitian=False, check=True):
    name, f = _pick_function(cfg, idx)
    n = _dim(cfg, idx)
    L1 = _matrix(cfg, idx, 0, n, hermitian)
    M1 = _matrix(cfg, idx, 1, n, hermitian)
    D = _matrix(cfg, idx, 2, n, hermitian)
    E = _matrix(cfg, idx, 3, n, hermitian)
    t = cfg.perturbation
    L2, M2 = convex_perturbation(L1, D, t), convex_perturbation(M1, E, t)
    L2h, M2h = convex_perturbation(L1, D, t / 2), convex_perturbation(M1, E, t / 2)
    out = {"function": name, "ratio": {}, "numerator": {}, "halving": {}, "status": "ok"}
    ok = True
    for p in cfg.p:
        key = str(_p_label(p))
        try:
            full = lipschitz_ratio(f, L1, M1, L2, M2, p, cfg.sup_mode)
            half = lipschitz_ratio(f, L1, M1, L2h, M2h, p, cfg.sup_mode)
        except ZeroPerturbation:
            out["status"] = "zero-perturbation"
            continue
        out["ratio"][key] = full["ratio"]
        out["numerator"][key] = full["numerator"]
        h = half["numerator"] / full["numerator"] if full["numerator"] > 0 else None
        out["halving"][key] = h
        if check:
            ok = ok and math.isfinite(full["ratio"]) and full["ratio"] <= 100.0
            ok = ok and (h is None or 0.35 <= h <= 0.75)
    return out, bool(ok)


def _trial_psweep(cfg, idx):
    rec, _ = _trial_lipschitz(cfg, idx, hermitian=True, check=False)
    return rec, True


def _trial_bound(cfg, idx):
    name, f = _pick_function(cfg, idx)
    n = _dim(cfg, idx)
    L1, L2, M1, M2 = _identity_inputs(cfg, idx, n)
    N = cfg.truncations[-1]
    rows = {}
    ok = True
    for p in cfg.p:
        chk = elementary_bound_check(f, L1, L2, M1, p, N, cfg.k_emp)
        rows[str(_p_label(p))] = {k: chk[k] for k in ("lhs_norm", "bound", "k_min", "rep_bound")}
        ok = ok and chk["ok"]
    certs = schatten_certificates(f, L1, L2, M1, M2, N, sign=cfg.dd_sign)
    ok = ok and all(c["ok"] for c in certs)
    return {"function": name, "N": N, "norms": rows, "certificates": certs}, bool(ok)


TRIALS = {
    "window-check": _trial_window,
    "cardinal-check": _trial_cardinal,
    "besov-norm": _trial_besov,
    "identity-check": _trial_identity,
    "regularization-check": _trial_regularization,
    "lipschitz-sweep": _trial_lipschitz,
    "p-sweep": _trial_psweep,
    "bound-check": _trial_bound,
}


def n_trials(cfg) -> int:
    if cfg.experiment == "identity-check" or cfg.experiment == "bound-check":
        return cfg.trials * len(cfg.functions())
    if cfg.experiment == "p-sweep":
        return cfg.trials * len(cfg.dims)
    return cfg.trials


def _dims_for(cfg, idx):
    if cfg.experiment == "p-sweep":
        return cfg.dims[idx // cfg.trials]
    if cfg.experiment in ("window-check", "cardinal-check", "besov-norm"):
        return None
    return _dim(cfg, idx)


def run_trial(cfg: ExperimentConfig, idx: int):
    """One record with its pass flag and wall time in milliseconds."""
    t0 = time.perf_counter()
    if cfg.experiment == "p-sweep":
        sub = ExperimentConfig(**{**asdict(cfg), "dims": [_dims_for(cfg, idx)]})
        sub._function = cfg._function
        body, ok = _trial_psweep(sub, idx)
    else:
        body, ok = TRIALS[cfg.experiment](cfg, idx)
    wall = (time.perf_counter() - t0) * 1e3
    rec = {
        "experiment": cfg.experiment,
        "trial": idx,
        "seed": [cfg.seed, idx],
        "dims": _dims_for(cfg, idx),
        "p": [_p_label(p) for p in cfg.p],
        "N": cfg.truncations,
        **body,
        "ok": ok,
        "prng_version": PRNG_VERSION,
        "window_id": WINDOW_ID,
        "config_hash": cfg.config_hash(),
        "version": __version__,
    }
    return _jsonable(rec), wall


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# running and reporting


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list
    wall_ms: list
    header: dict

    @property
    def ok(self):
        return all(r["ok"] for r in self.records)

    @property
    def exit_code(self):
        return 0 if self.ok else 1


def run(cfg: ExperimentConfig, threads: int = 1, out_dir=None) -> RunResult:
    """Run every trial, ordered by index, and optionally write the outputs."""
    count = n_trials(cfg)
    started = datetime.now(timezone.utc).isoformat()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda i: run_trial(cfg, i), range(count)))
    else:
        results = [run_trial(cfg, i) for i in range(count)]
    records = [r for r, _ in results]
    walls = [w for _, w in results]
    header = {
        "header": True,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "wall_time_ms": walls,
        "threads": threads,
        "config": cfg.canonical(),
        "config_hash": cfg.config_hash(),
        "version": __version__,
        "prng_version": PRNG_VERSION,
    }
    result = RunResult(cfg, records, walls, header)
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def dumps_record(rec) -> str:
    return json.dumps(rec, sort_keys=True, separators=(",", ":"), allow_nan=True)


def write_outputs(result: RunResult, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = result.config.experiment
    if stem == "identity-check":
        stem = f"{stem}-{result.config.order}"
    lines = [dumps_record(result.header)] + [dumps_record(r) for r in result.records]
    (out / f"{stem}.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_summary(result, out / f"{stem}_summary.csv")
    return out / f"{stem}.jsonl"


def _metrics(rec) -> dict:
    """Scalar summary metrics of one record."""
    m = {}
    if "residuals" in rec:
        m["residual_final"] = rec["residuals"][-1]
    if "additivity" in rec:
        m["additivity"] = max(rec["additivity"])
    if "certificates" in rec:
        m["certificate_ratio"] = max(
            (c["lhs"] / c["bound"] if c["bound"] > 0 else 0.0) for c in rec["certificates"]
        )
    for key in ("max_deviation", "l2_identity_deviation", "norm_inhomogeneous"):
        if key in rec:
            m[key] = rec[key]
    if "reconstruction_errors" in rec:
        m["reconstruction_error"] = list(rec["reconstruction_errors"].values())[-1]
    for key in ("ratio", "halving"):
        for p, v in rec.get(key, {}).items() if isinstance(rec.get(key), dict) else ():
            if v is not None:
                m[f"{key}_p{p}"] = v
    if rec.get("experiment") == "bound-check":
        for p, row in rec["norms"].items():
            m[f"k_min_p{p}"] = row["k_min"]
    return m


def summarize(records) -> list[dict]:
    groups: dict[tuple, list] = {}
    for rec in records:
        for key, val in _metrics(rec).items():
            groups.setdefault((rec["experiment"], key), []).append(val)
    rows = []
    for (exp, key), vals in sorted(groups.items()):
        rows.append({
            "experiment": exp,
            "metric": key,
            "count": len(vals),
            "max": max(vals),
            "median": statistics.median(vals),
            "failures": sum(1 for r in records if not r["ok"] and r["experiment"] == exp),
        })
    return rows


def write_summary(result: RunResult, path):
    rows = summarize(result.records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["experiment", "metric", "count", "max",
                                                "median", "failures"])
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


# ---------------------------------------------------------------------------
# replay


def read_records(path):
    header, records = None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("header"):
            header = obj
        else:
            records.append(obj)
    if header is None:
        raise ConfigInvalid("records", "missing header line")
    return header, records


def _first_divergence(expected, got, prefix=""):
    if isinstance(expected, dict) and isinstance(got, dict):
        for key in sorted(set(expected) | set(got)):
            if key not in expected or key not in got:
                return prefix + key
            d = _first_divergence(expected[key], got[key], f"{prefix}{key}.")
            if d:
                return d
        return None
    if isinstance(expected, list) and isinstance(got, list):
        if len(expected) != len(got):
            return prefix.rstrip(".")
        for i, (a, b) in enumerate(zip(expected, got)):
            d = _first_divergence(a, b, f"{prefix}{i}.")
            if d:
                return d
        return None
    # bit-exact: compare the serialised form so floats must match exactly
    if json.dumps(expected) != json.dumps(got):
        return prefix.rstrip(".")
    return None


def replay(path) -> dict:
    """Recompute every record and report the first divergent field of each."""
    header, records = read_records(path)
    cfg_data = dict(header["config"])
    name = cfg_data.pop("experiment")
    cfg = ExperimentConfig.from_dict(cfg_data, name)
    report = {"records": len(records), "divergences": [], "version_mismatch": []}
    if cfg.config_hash() != header["config_hash"]:
        report["divergences"].append({"trial": None, "field": "config_hash"})
    for rec in records:
        for key, current in (("prng_version", PRNG_VERSION), ("version", __version__)):
            if rec.get(key) != current:
                report["version_mismatch"].append(
                    str(VersionMismatch(f"trial {rec.get('trial')}: {key} {rec.get(key)!r} "
                                        f"!= {current!r}"))
                )
        if report["version_mismatch"]:
            continue
        fresh, _ = run_trial(cfg, rec["trial"])
        field_name = _first_divergence(rec, fresh)
        if field_name:
            report["divergences"].append({"trial": rec["trial"], "field": field_name})
    report["ok"] = not report["divergences"]
    return report


__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "RunResult",
    "besov_summary",
    "read_records",
    "replay",
    "run",
    "run_trial",
    "summarize",
    "write_outputs",
]
