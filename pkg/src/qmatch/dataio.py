"""Dataset CSV files and JSON fit reports.

A dataset is a small CSV with a `q,x` header, one row per quantile, and a
`# meta:` comment line carrying the hidden sample size N (and optionally
the scale divisor).  Reports are JSON with a fixed key order and every
float printed at 17 significant digits, so parse/serialize round-trips
are lossless and a rerun with the same seed produces byte-identical
files.  All writes go through a temp-file-then-rename step.
"""

from __future__ import annotations

import json
import math
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .inference import Diagnostics, PosteriorDraws
from .orderstats import QuantileObservation
from .predictive import FitReport, ParamSummary, PredictiveQuantile, Score

__all__ = [
    "DataError",
    "read_dataset",
    "dataset_text",
    "write_dataset",
    "report_to_json",
    "report_from_json",
    "ranking_to_json",
    "ranking_from_json",
    "write_text",
]

_META_RE = re.compile(r"#\s*meta:\s*(.*)$")


class DataError(ValueError):
    """A file could not be parsed; the message names file and line."""


def write_text(path, text: str) -> None:
    """Write atomically: temp file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# datasets

def _parse_meta(path, lineno: int, body: str, meta: dict) -> None:
    for token in body.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise DataError(f"{path}:{lineno}: malformed meta entry "
                            f"{token!r}, expected key=value")
        if key not in ("N", "scale_divisor"):
            raise DataError(f"{path}:{lineno}: unknown meta key {key!r}")
        meta[key] = (lineno, value)


def read_dataset(path, *, n_total: int | None = None,
                 scale_divisor: float | None = None) -> QuantileObservation:
    """Parse a dataset CSV; explicit arguments override `# meta:` values."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror or exc}") from exc

    meta: dict = {}
    rows: list[tuple[float, float]] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _META_RE.match(line)
            if m:
                _parse_meta(path, lineno, m.group(1), meta)
            continue
        if not header_seen:
            if line != "q,x":
                raise DataError(
                    f"{path}:{lineno}: expected header 'q,x', got {line!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected two comma-separated "
                            f"fields, got {len(parts)}")
        try:
            qv, xv = float(parts[0]), float(parts[1])
        except ValueError:
            raise DataError(
                f"{path}:{lineno}: could not parse {line!r} as numbers")
        if rows and qv <= rows[-1][0]:
            raise DataError(
                f"{path}:{lineno}: quantile levels must be strictly "
                f"increasing ({qv!r} after {rows[-1][0]!r})")
        if rows and xv <= rows[-1][1]:
            raise DataError(
                f"{path}:{lineno}: quantile values must be strictly "
                f"increasing ({xv!r} after {rows[-1][1]!r})")
        rows.append((qv, xv))

    if not header_seen:
        raise DataError(f"{path}: no 'q,x' header found")
    if not rows:
        raise DataError(f"{path}: no data rows after the header")

    if n_total is None and "N" in meta:
        lineno, value = meta["N"]
        try:
            n_total = int(value)
        except ValueError:
            raise DataError(f"{path}:{lineno}: meta N={value!r} is not an "
                            f"integer")
    if n_total is None:
        raise DataError(f"{path}: sample size unknown; add a "
                        f"'# meta: N=...' line or pass it explicitly")
    if scale_divisor is None and "scale_divisor" in meta:
        lineno, value = meta["scale_divisor"]
        try:
            scale_divisor = float(value)
        except ValueError:
            raise DataError(f"{path}:{lineno}: meta scale_divisor={value!r} "
                            f"is not a number")
    if scale_divisor is None:
        scale_divisor = 1.0

    try:
        return QuantileObservation(
            q=tuple(q for q, _ in rows),
            x=tuple(x for _, x in rows),
            n_total=n_total,
            scale_divisor=scale_divisor,
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _number_token(v: float) -> str:
    v = float(v)
    return str(int(v)) if v == int(v) else repr(v)


def dataset_text(obs: QuantileObservation) -> str:
    meta = f"# meta: N={_number_token(obs.n_total)}"
    if obs.scale_divisor != 1.0:
        meta += f" scale_divisor={_number_token(obs.scale_divisor)}"
    lines = [meta, "q,x"]
    lines.extend(f"{q!r},{x!r}" for q, x in zip(obs.q, obs.x))
    return "\n".join(lines) + "\n"


def write_dataset(path, obs: QuantileObservation) -> None:
    write_text(path, dataset_text(obs))


# ---------------------------------------------------------------------------
# JSON emission with fixed float formatting

def _float_token(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    return format(v, ".17g")


def _emit(obj, indent: int, out: list) -> None:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float_token(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, value) in enumerate(obj.items()):
            out.append(f"{inner}{json.dumps(key)}: ")
            _emit(value, indent + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        nested = any(isinstance(v, (list, tuple, np.ndarray, dict))
                     for v in items)
        if nested:
            out.append("[\n")
            for i, value in enumerate(items):
                out.append(inner)
                _emit(value, indent + 1, out)
                out.append(",\n" if i < len(items) - 1 else "\n")
            out.append(pad + "]")
        else:
            parts = []
            for value in items:
                sub: list = []
                _emit(value, 0, sub)
                parts.append("".join(sub))
            out.append("[" + ", ".join(parts) + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dumps(payload: dict) -> str:
    out: list = []
    _emit(payload, 0, out)
    return "".join(out) + "\n"


# ---------------------------------------------------------------------------
# fit reports

_FORMAT_REPORT = "qmatch-report"
_FORMAT_RANKING = "qmatch-ranking"
_VERSION = 1


def _obs_payload(obs: QuantileObservation) -> dict:
    return {
        "q": [float(v) for v in obs.q],
        "x": [float(v) for v in obs.x],
        "n_total": int(obs.n_total),
        "scale_divisor": float(obs.scale_divisor),
    }


def _report_body(report: FitReport) -> dict:
    body = {
        "family": report.family,
        "likelihood_kind": report.likelihood_kind,
        "sigma_noise": float(report.sigma_noise),
        "seed": int(report.seed),
        "observation": _obs_payload(report.obs),
        "params": [
            {"name": p.name, "mean": p.mean, "sd": p.sd,
             "q05": p.q05, "q50": p.q50, "q95": p.q95}
            for p in report.params
        ],
        "diagnostics": None if report.diag is None else {
            "r_hat": None if report.diag.r_hat is None
            else [float(v) for v in report.diag.r_hat],
            "ess": [float(v) for v in report.diag.ess],
        },
        "score": {"mean": report.score.mean, "minus": report.score.minus,
                  "plus": report.score.plus},
        "predictive": [
            {"p": pq.p, "value": pq.value, "lo": pq.lo, "hi": pq.hi}
            for pq in report.predictive
        ],
        "draws": None,
    }
    pd = report.draws
    if pd is not None:
        body["draws"] = {
            "values": pd.draws,
            "chain_id": pd.chain_id,
            "log_likelihood": pd.log_likelihood,
            "warmup": int(pd.warmup),
            "acceptance_rate": [float(v) for v in pd.acceptance_rate],
        }
    return body


def report_to_json(report: FitReport) -> str:
    return _dumps({"format": _FORMAT_REPORT, "version": _VERSION,
                   **_report_body(report)})


def _parse_obs(payload: dict) -> QuantileObservation:
    return QuantileObservation(
        q=tuple(float(v) for v in payload["q"]),
        x=tuple(float(v) for v in payload["x"]),
        n_total=int(payload["n_total"]),
        scale_divisor=float(payload["scale_divisor"]),
    )


def _report_from_body(body: dict) -> FitReport:
    diag_payload = body["diagnostics"]
    diag = None
    if diag_payload is not None:
        r_hat = diag_payload["r_hat"]
        diag = Diagnostics(
            r_hat=None if r_hat is None else tuple(float(v) for v in r_hat),
            ess=tuple(float(v) for v in diag_payload["ess"]),
        )
    draws = None
    if body["draws"] is not None:
        d = body["draws"]
        draws = PosteriorDraws(
            draws=np.asarray(d["values"], dtype=float),
            chain_id=np.asarray(d["chain_id"], dtype=np.intp),
            log_likelihood=np.asarray(d["log_likelihood"], dtype=float),
            seed=int(body["seed"]),
            warmup=int(d["warmup"]),
            acceptance_rate=tuple(float(v) for v in d["acceptance_rate"]),
        )
    return FitReport(
        family=body["family"],
        likelihood_kind=body["likelihood_kind"],
        sigma_noise=float(body["sigma_noise"]),
        params=tuple(
            ParamSummary(name=p["name"], mean=float(p["mean"]),
                         sd=float(p["sd"]), q05=float(p["q05"]),
                         q50=float(p["q50"]), q95=float(p["q95"]))
            for p in body["params"]),
        diag=diag,
        score=Score(mean=float(body["score"]["mean"]),
                    minus=float(body["score"]["minus"]),
                    plus=float(body["score"]["plus"])),
        predictive=tuple(
            PredictiveQuantile(p=float(e["p"]), value=float(e["value"]),
                               lo=float(e["lo"]), hi=float(e["hi"]))
            for e in body["predictive"]),
        obs=_parse_obs(body["observation"]),
        seed=int(body["seed"]),
        draws=draws,
    )


def _load_payload(text: str, expected_format: str) -> dict:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"not valid JSON: line {exc.lineno}: {exc.msg}")
    if not isinstance(payload, dict):
        raise DataError("report must be a JSON object")
    got = payload.get("format")
    if got != expected_format:
        raise DataError(f"expected a {expected_format!r} file, "
                        f"got format={got!r}")
    if payload.get("version") != _VERSION:
        raise DataError(f"unsupported report version "
                        f"{payload.get('version')!r}")
    return payload


def report_from_json(text: str) -> FitReport:
    payload = _load_payload(text, _FORMAT_REPORT)
    try:
        return _report_from_body(payload)
    except (KeyError, TypeError) as exc:
        raise DataError(f"report is missing or mis-typed field: {exc}")


def ranking_to_json(ranked, failures=()) -> str:
    """Serialize compare results: ranked reports plus recorded failures."""
    ranked = tuple(ranked)
    return _dumps({
        "format": _FORMAT_RANKING,
        "version": _VERSION,
        "observation": _obs_payload(ranked[0].obs),
        "best": ranked[0].family,
        "ranking": [_report_body(r) for r in ranked],
        "failures": [{"family": f, "error": e} for f, e in failures],
    })


def ranking_from_json(text: str):
    """Parse a ranking file to (reports, failures, best family name)."""
    payload = _load_payload(text, _FORMAT_RANKING)
    try:
        reports = tuple(_report_from_body(b) for b in payload["ranking"])
        failures = [(f["family"], f["error"]) for f in payload["failures"]]
        return reports, failures, payload["best"]
    except (KeyError, TypeError) as exc:
        raise DataError(f"ranking is missing or mis-typed field: {exc}")
