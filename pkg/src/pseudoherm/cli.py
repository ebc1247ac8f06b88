"""Batch front-end: parse a run configuration, execute the requested checks
in dependency order and emit a machine-readable report.

Exit codes: 0 when every requested check passes its tolerance, 1 when a
check fails (numerical failures of one check never abort the symbolic
results of another), 2 for configuration or parameter errors.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy

from . import __version__
from .dynamics import linear_closure_fit, real_closure_second_order
from .models import KINDS, InvalidParameterError, ModelSpec, build, series_radius
from .spectral import (
    BasisConfig,
    certify,
    default_basis,
    exchange_invariance_check,
)
from .transform import deduce_hermitian, omega_exponent, verify_similarity
from .weyl import OperatorPoly, classify

SYMBOLIC_CHECKS = ("classify", "closure", "counterpart", "similarity")
NUMERIC_CHECKS = ("spectrum", "eta", "picture", "exchange")
ALL_CHECKS = SYMBOLIC_CHECKS + NUMERIC_CHECKS

_RATIONAL_RE = re.compile(r"^[+-]?\d+(/\d+)?$")


class ConfigError(ValueError):
    """Raised for malformed configuration input."""


def _rational(text) -> Fraction:
    """Exact rational from config input; floats are rejected."""
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        raise ConfigError(f"floats are rejected in the symbolic layer: {text!r}")
    text = str(text).strip()
    if not _RATIONAL_RE.match(text):
        raise ConfigError(f"expected an exact rational like 3/2, got {text!r}")
    return Fraction(text)


_TERM_RE = re.compile(
    r"^([+-])?\s*(\d+(?:/\d+)?)?\s*(?:\*?\s*([xp])(?:\^(\d+))?)?$"
)


def parse_potential(text: str) -> tuple[Fraction, ...]:
    """Coefficient list from a polynomial string like ``1/2 x^2 - x + 3``."""
    chunks = re.findall(r"[+-]?[^+-]+", text.strip())
    if not chunks:
        raise ConfigError(f"empty potential {text!r}")
    coeffs: dict[int, Fraction] = {}
    for chunk in chunks:
        m = _TERM_RE.match(chunk.strip())
        if not m or (m.group(2) is None and m.group(3) is None):
            raise ConfigError(f"cannot parse potential term {chunk!r}")
        sign, coeff, var, power = m.groups()
        value = Fraction(coeff) if coeff else Fraction(1)
        if sign == "-":
            value = -value
        degree = (int(power) if power else 1) if var else 0
        coeffs[degree] = coeffs.get(degree, Fraction(0)) + value
    top = max(coeffs)
    return tuple(coeffs.get(d, Fraction(0)) for d in range(top + 1))


def parse_series(text: str) -> tuple[Fraction, ...]:
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if not parts:
        raise ConfigError(f"empty series {text!r}")
    return tuple(_rational(p) for p in parts)


@dataclass
class RunConfig:
    model: Optional[ModelSpec]
    checks: list
    hamiltonian: Optional[OperatorPoly] = None  # custom-model path
    size: int = 64
    ref_mass: Optional[float] = None
    ref_freq: Optional[float] = None
    compare_count: Optional[int] = None
    output: Optional[str] = None
    fmt: str = "json"
    csv: Optional[str] = None

    def supported_checks(self) -> tuple:
        if self.model is None:
            return ("classify", "closure")
        if self.model.kind in ("pu_I", "pu_II"):
            return ("classify", "closure", "spectrum", "exchange")
        return ("classify", "closure", "counterpart", "similarity", "spectrum", "eta", "picture")

    def resolve_checks(self) -> list:
        supported = self.supported_checks()
        if self.checks == ["all"]:
            return list(supported)
        for name in self.checks:
            if name not in ALL_CHECKS:
                raise ConfigError(f"unknown check {name!r}")
            if name not in supported:
                kind = self.model.kind if self.model else "custom"
                raise ConfigError(f"check {name!r} is not supported for model kind {kind!r}")
        return list(self.checks)

    def basis_for(self, spec: ModelSpec) -> BasisConfig:
        base = default_basis(spec, self.size, self.compare_count)
        if self.ref_mass is not None or self.ref_freq is not None:
            base = BasisConfig(
                self.size,
                self.ref_mass if self.ref_mass is not None else base.ref_mass,
                self.ref_freq if self.ref_freq is not None else base.ref_freq,
                base.compare_count,
            )
        return base


def tolerances_for(kind: Optional[str]) -> dict:
    tol = {
        "reality": 1e-8 if kind in ("swanson", "pu_I", "pu_II") else 1e-6,
        "isospectral_relative": 1e-6,
        "pseudo": 1e-6,
        "eta_min": 0.0,
        "picture": 1e-8,
        "norm_drift": 1e-8,
        "exchange": 1e-6,
    }
    if kind == "swanson":
        tol["reference_relative"] = 1e-8
    if kind in ("pu_I", "pu_II"):
        tol["reference_absolute"] = 1e-5
    return tol


def _fmt_frac(value) -> Optional[str]:
    return None if value is None else str(value)


def _complex_list(values) -> list:
    return [{"re": float(v.real), "im": float(v.imag)} for v in values]


def _model_block(config: RunConfig) -> dict:
    if config.model is None:
        return {"kind": "custom", "hamiltonian": config.hamiltonian.to_text()}
    spec = config.model
    block = {"kind": spec.kind, "hbar": str(spec.hbar)}
    for name in ("m", "omega", "c", "gamma", "omega1", "omega2", "a1", "a2", "a3", "A"):
        value = getattr(spec, name)
        if value is not None:
            block[name] = str(value)
    if spec.V is not None:
        block["V"] = [str(v) for v in spec.V]
    if spec.series is not None:
        block["series"] = [str(v) for v in spec.series]
        block["n"] = spec.n
        radius = series_radius(spec.series)
        block["series_radius"] = "inf" if radius == math.inf else str(radius)
    if spec.kind == "pu_II":
        block["branch"] = spec.branch
    return block


def run(config: RunConfig) -> tuple[dict, int]:
    """Execute the requested checks; returns (report, exit_code)."""
    checks = config.resolve_checks()
    if config.model is not None:
        config.model.validate()
        H = build(config.model)
        kind = config.model.kind
    else:
        H = config.hamiltonian
        kind = None

    report: dict = {"model": _model_block(config)}
    passed: dict[str, bool] = {}
    tolerances = tolerances_for(kind)

    if "classify" in checks:
        flags = classify(H)
        report["classification"] = {
            "is_hermitian": flags.is_hermitian,
            "is_pt_symmetric": flags.is_pt_symmetric,
        }
        passed["classify"] = True

    eom = None
    if "closure" in checks:
        if kind in ("pu_I", "pu_II"):
            eom = linear_closure_fit(H, (0, "x"), 4)
            alpha, beta = eom.linear_coeffs
            eom_block = {
                "variable": "x0",
                "order": 4,
                "real_closed": eom.real_closed,
                "force_poly": None,
                "alpha": _fmt_frac(alpha),
                "beta": _fmt_frac(beta),
                "residual": eom.residual.to_text(),
            }
        else:
            variable = (0, "p") if kind == "general_p" else (0, "x")
            inertia = _closure_inertia(config.model) if config.model else Fraction(1)
            eom = real_closure_second_order(H, variable, inertia)
            eom_block = {
                "variable": f"{variable[1]}{variable[0]}",
                "order": 2,
                "real_closed": eom.real_closed,
                "force_poly": eom.force_poly.to_text() if eom.force_poly else None,
                "alpha": None,
                "beta": None,
                "residual": eom.residual.to_text(),
            }
        report["eom"] = eom_block
        passed["closure"] = eom.real_closed

    h = None
    if "counterpart" in checks:
        if eom is not None and eom.real_closed and eom.order == 2:
            h = deduce_hermitian(eom, _closure_inertia(config.model))
            hermitian = classify(h).is_hermitian
            report["counterpart"] = {"h": h.to_text(), "is_hermitian": hermitian}
            passed["counterpart"] = hermitian
        else:
            report["counterpart"] = {"h": None, "error": "equation of motion is not real closed"}
            passed["counterpart"] = False

    if "similarity" in checks:
        if h is not None:
            S = omega_exponent(config.model)
            cert = verify_similarity(H, h, S)
            report["similarity"] = {
                "omega_exponent": S.to_text(),
                "bch_depth": cert.bch_depth,
                "verified": cert.verified,
                "residual": cert.residual.to_text(),
            }
            passed["similarity"] = cert.verified
        else:
            report["similarity"] = {"verified": False, "error": "no Hermitian counterpart"}
            passed["similarity"] = False

    numeric_requested = [c for c in checks if c in ("spectrum", "eta", "picture")]
    if numeric_requested:
        try:
            cfg = config.basis_for(config.model)
            spectral = certify(config.model, cfg, checks=tuple(numeric_requested))
            block = {
                "N": spectral.size,
                "compare_count": spectral.compare_count,
                "ref_mass": _scales_list(cfg.ref_mass),
                "ref_freq": _scales_list(cfg.ref_freq),
                "eigenvalues_H": _complex_list(spectral.eigenvalues_H),
                "eigenvalues_h": _complex_list(spectral.eigenvalues_h)
                if spectral.eigenvalues_h is not None
                else None,
                "reference": [float(v) for v in spectral.reference]
                if spectral.reference is not None
                else None,
                "reality_residual": spectral.reality_residual,
                "isospectral_residual": spectral.isospectral_residual,
                "isospectral_relative": spectral.isospectral_relative,
                "eta_min_eigenvalue": spectral.eta_min_eigenvalue,
                "pseudo_residual": spectral.pseudo_residual,
                "picture_residual": spectral.picture_residual,
                "norm_drift": spectral.norm_drift,
                "condition_estimate": spectral.condition_estimate,
                "conditioning_warning": spectral.conditioning_warning,
                "branch": spectral.branch,
            }
            report["spectral"] = block
            if "spectrum" in checks:
                passed["spectrum"] = _spectrum_passes(kind, spectral, tolerances)
            if "eta" in checks:
                passed["eta"] = (
                    spectral.eta_min_eigenvalue is not None
                    and spectral.eta_min_eigenvalue > tolerances["eta_min"]
                    and spectral.pseudo_residual is not None
                    and spectral.pseudo_residual < tolerances["pseudo"]
                )
            if "picture" in checks:
                passed["picture"] = (
                    spectral.picture_residual is not None
                    and spectral.picture_residual < tolerances["picture"]
                    and spectral.norm_drift is not None
                    and spectral.norm_drift < tolerances["norm_drift"]
                )
        except Exception as exc:  # numerical failure must not hide symbolic results
            report["spectral"] = {"error": f"{type(exc).__name__}: {exc}"}
            for name in numeric_requested:
                passed[name] = False

    if "exchange" in checks:
        try:
            cfg = config.basis_for(config.model)
            exch = exchange_invariance_check(config.model, cfg)
            exch_block = {
                "distance": exch.distance,
                "invariant": exch.invariant,
                "sum_shift": exch.sum_shift,
                "difference_shift": exch.difference_shift,
            }
            report.setdefault("spectral", {})["exchange"] = exch_block
            passed["exchange"] = exch.distance < tolerances["exchange"]
        except Exception as exc:
            report.setdefault("spectral", {})["exchange"] = {
                "error": f"{type(exc).__name__}: {exc}"
            }
            passed["exchange"] = False

    report["tolerances"] = tolerances
    report["versions"] = {
        "pseudoherm": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    report["checks"] = {name: passed[name] for name in checks if name in passed}
    exit_code = 0 if all(passed.values()) else 1
    return report, exit_code


def _closure_inertia(spec: ModelSpec) -> Fraction:
    return 1 / spec.A if spec.kind == "general_p" else spec.m


def _scales_list(value):
    if isinstance(value, (tuple, list)):
        return [float(v) for v in value]
    return float(value)


def _spectrum_passes(kind, spectral, tol) -> bool:
    if spectral.reality_residual > tol["reality"]:
        return False
    ref = spectral.reference
    ev = spectral.eigenvalues_H
    if kind == "swanson" and ref is not None:
        rel = (np.abs(ev - ref) / np.abs(ref)).max()
        return bool(rel < tol["reference_relative"])
    if kind in ("pu_I", "pu_II") and ref is not None:
        return bool(np.abs(ev - ref).max() < tol["reference_absolute"])
    if spectral.isospectral_relative is None:
        return False
    return bool(spectral.isospectral_relative < tol["isospectral_relative"])


# ----------------------------------------------------------------- formatting

def _format_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return json.dumps(str(value))
        return f"{value:.17g}"
    return json.dumps(value)


def dumps_report(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits and keys in
    insertion order."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        rows = [f"{inner}{json.dumps(str(k))}: {dumps_report(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(rows) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{inner}{dumps_report(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + f"\n{pad}]"
    return _format_scalar(obj)


def _text_lines(obj, prefix: str = "") -> list:
    lines = []
    if isinstance(obj, dict):
        for key, value in obj.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            lines.extend(_text_lines(value, path))
    elif isinstance(obj, (list, tuple)):
        for i, value in enumerate(obj):
            lines.extend(_text_lines(value, f"{prefix}[{i}]"))
    else:
        lines.append((prefix, _format_scalar(obj)))
    return lines


def report_text(report: dict) -> str:
    rows = _text_lines(report)
    width = max(len(path) for path, _ in rows)
    return "\n".join(f"{path.ljust(width)}  {value}" for path, value in rows)


def eigenvalue_csv(report: dict) -> str:
    spectral = report.get("spectral") or {}
    values = spectral.get("eigenvalues_H") or []
    lines = ["index,re,im"]
    for i, v in enumerate(values):
        lines.append(f"{i},{v['re']:.17g},{v['im']:.17g}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- configuration

_MODEL_FIELDS = ("m", "omega", "c", "gamma", "omega1", "omega2", "a1", "a2", "a3", "A")


def _spec_from_mapping(data: dict) -> ModelSpec:
    kind = data.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"unknown or missing model kind {kind!r}")
    kwargs = {"kind": kind}
    if "hbar" in data:
        kwargs["hbar"] = _rational(data["hbar"])
    for name in _MODEL_FIELDS:
        if data.get(name) is not None:
            kwargs[name] = _rational(data[name])
    if data.get("V") is not None:
        v = data["V"]
        kwargs["V"] = parse_potential(v) if isinstance(v, str) else tuple(_rational(e) for e in v)
    if data.get("series") is not None:
        s = data["series"]
        kwargs["series"] = parse_series(s) if isinstance(s, str) else tuple(_rational(e) for e in s)
    if data.get("n") is not None:
        kwargs["n"] = int(data["n"])
    if data.get("branch") is not None:
        kwargs["branch"] = str(data["branch"])
    try:
        return ModelSpec(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _config_from_args(args) -> RunConfig:
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
        model_data = data.get("model") or {}
        spec = None
        hamiltonian = None
        if model_data.get("kind") == "custom":
            hamiltonian = OperatorPoly.from_text(model_data["hamiltonian"])
        else:
            spec = _spec_from_mapping(model_data)
        basis = data.get("basis") or {}
        return RunConfig(
            model=spec,
            hamiltonian=hamiltonian,
            checks=list(data.get("checks") or ["all"]),
            size=int(basis.get("N", 64)),
            ref_mass=basis.get("ref_mass"),
            ref_freq=basis.get("ref_freq"),
            compare_count=basis.get("compare_count"),
            output=data.get("output"),
            fmt=data.get("format", "json"),
            csv=data.get("csv"),
        )

    spec = None
    hamiltonian = None
    if args.model == "custom":
        if not args.hamiltonian:
            raise ConfigError("--model custom requires --hamiltonian")
        hamiltonian = OperatorPoly.from_text(args.hamiltonian)
    else:
        data = {"kind": args.model}
        for name in ("hbar",) + _MODEL_FIELDS + ("V", "series", "n", "branch"):
            value = getattr(args, name if name != "A" else "big_a", None)
            if value is not None:
                data[name] = value
        spec = _spec_from_mapping(data)
    checks = [c.strip() for c in args.checks.split(",")] if args.checks else ["all"]
    return RunConfig(
        model=spec,
        hamiltonian=hamiltonian,
        checks=checks,
        size=args.N,
        ref_mass=args.ref_mass,
        ref_freq=args.ref_freq,
        compare_count=args.compare_count,
        output=args.output,
        fmt=args.format,
        csv=args.csv,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pseudoherm",
        description="Real-closure analysis and spectral certification for "
        "non-Hermitian Hamiltonians",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run the pipeline for one model")
    runp.add_argument("--config", help="JSON run configuration file")
    runp.add_argument("--model", choices=KINDS + ("custom",))
    runp.add_argument("--hbar")
    runp.add_argument("--m")
    runp.add_argument("--omega")
    runp.add_argument("--c")
    runp.add_argument("--gamma")
    runp.add_argument("--omega1")
    runp.add_argument("--omega2")
    runp.add_argument("--a1")
    runp.add_argument("--a2")
    runp.add_argument("--a3")
    runp.add_argument("--A", dest="big_a")
    runp.add_argument("--V", help='potential polynomial, e.g. "1/2 x^2"')
    runp.add_argument("--series", help='series coefficients, e.g. "1, -3/2"')
    runp.add_argument("--n", type=int, help="series exponent offset")
    runp.add_argument("--branch", choices=("upper", "lower"))
    runp.add_argument("--hamiltonian", help="custom Hamiltonian in operator text form")
    runp.add_argument("--N", type=int, default=64, help="basis size per mode")
    runp.add_argument("--ref-mass", dest="ref_mass", type=float)
    runp.add_argument("--ref-freq", dest="ref_freq", type=float)
    runp.add_argument("--compare-count", dest="compare_count", type=int)
    runp.add_argument("--checks", default="all", help='comma list or "all"')
    runp.add_argument("--output", help="write the report to this path")
    runp.add_argument("--format", choices=("json", "text"), default="json")
    runp.add_argument("--csv", help="write the eigenvalue table to this path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        report, code = run(config)
    except (ConfigError, InvalidParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rendered = dumps_report(report) if config.fmt == "json" else report_text(report)
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(rendered + "\n")
    else:
        print(rendered)
    if config.csv:
        with open(config.csv, "w") as fh:
            fh.write(eigenvalue_csv(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
