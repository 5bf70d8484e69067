"""Command-line front end: ``sospca <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .certificate import CertificateParams, build_exact_moment
from .datagen import DataMatrix, ModelParams, empirical_covariance, normalize_rows, sample_h0, sample_hv
from .exceptions import SosPcaError
from .experiments import (
    CALIBRATION_GRID,
    CALIBRATION_SEEDS,
    ExperimentConfig,
    brute_force_kmax,
    calibrate_thresholds,
    result_to_text,
    run_detection_gap,
    run_estimation_distance,
)
from .pseudorandom import ThresholdConfig, check_pseudorandom
from .verifier import verify

DEFAULTS = {
    "p": 40, "n": 16, "k": 14, "lambda": 0.0, "gamma": 1.0, "noise": "rademacher", "seed": 0, "trials": 1,
    "psd_mode": "auto", "tol": 1e-8, "format": "json", "out": None, "input": None, "thresholds": None,
    "theorem_mode": False, "margin": 2.0, "jobs": 1, "discrete": False,
}
_INT_KEYS = {"p", "n", "k", "seed", "trials", "jobs"}
_FLOAT_KEYS = {"lambda", "gamma", "tol", "margin"}
_BOOL_KEYS = {"theorem_mode", "discrete"}


def read_config(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment and dashes in keys become underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        if key in _INT_KEYS:
            out[key] = int(val)
        elif key in _FLOAT_KEYS:
            out[key] = float(val)
        elif key in _BOOL_KEYS:
            out[key] = val.lower() in ("1", "true", "yes", "on")
        else:
            out[key] = val
    return out


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key = value file; flags override it")
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--lambda", dest="lambda", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--noise", choices=["gaussian", "rademacher", "uniform_scaled"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int)
    sp.add_argument("--psd-mode", dest="psd_mode", choices=["eigen", "structural", "both", "auto"])
    sp.add_argument("--tol", type=float)
    sp.add_argument("--format", choices=["json", "csv"])
    sp.add_argument("--out", help="output path (stdout when omitted)")
    sp.add_argument("--input", help="binary data matrix written by 'generate'")
    sp.add_argument("--thresholds", help="threshold config JSON (default: the shipped one)")
    sp.add_argument("--theorem-mode", dest="theorem_mode", action="store_const", const=True,
                    help="gamma = 11*lambda and p = ceil(1.1*gamma*n)")
    sp.add_argument("--jobs", type=int, help="worker processes for multi-trial runs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sospca", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "sample a data matrix (null when lambda = 0)",
        "check-pr": "pseudorandomness statistics P1-P7",
        "certify": "build the certificate and write it as JSON",
        "verify": "build and verify the certificate; exit 0/2/3",
        "detect": "null-hypothesis detection-gap trials",
        "estimate": "planted-spike estimation-distance trials",
        "oracle": "brute-force k-sparse eigenvalue",
        "calibrate": "fit pseudorandomness thresholds",
        "report": "aggregate detect/estimate JSON outputs into CSV",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        _common(sp)
        if name == "oracle":
            sp.add_argument("--discrete", action="store_const", const=True)
        if name == "calibrate":
            sp.add_argument("--margin", type=float)
        if name == "report":
            sp.add_argument("files", nargs="+")
    return ap


def resolve(args: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS)
    if getattr(args, "config", None):
        opts.update(read_config(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            opts[key] = val
    if opts["theorem_mode"]:
        cert, p = CertificateParams.theorem_mode(opts["k"], opts["lambda"], opts["n"])
        opts["gamma"], opts["p"] = cert.gamma, p
    return opts


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _model(o: dict) -> ModelParams:
    return ModelParams(o["p"], o["n"], o["k"], o["lambda"], o["noise"], o["seed"])


def _data(o: dict) -> DataMatrix:
    if o["input"]:
        data = DataMatrix.load(o["input"])
    else:
        m = _model(o)
        data = sample_hv(m) if m.lam > 0 else sample_h0(m)
    return normalize_rows(data)


def _cmd_generate(o):
    m = _model(o)
    data = sample_hv(m) if m.lam > 0 else sample_h0(m)
    if not o["out"]:
        raise SosPcaError("generate needs --out")
    if o["format"] == "csv":
        data.to_csv(o["out"])
    else:
        data.save(o["out"])
    return 0


def _cmd_check_pr(o):
    rep = check_pseudorandom(_data(o), ThresholdConfig.load(o["thresholds"]), seed=o["seed"])
    _emit(rep.to_json(), o["out"])
    return 0 if rep.conditioned else 2


def _cmd_certify(o):
    cert = build_exact_moment(_data(o), CertificateParams(o["k"], o["gamma"]))
    _emit(cert.to_json(), o["out"])
    return 0


def _cmd_verify(o):
    data = _data(o)
    cert = build_exact_moment(data, CertificateParams(o["k"], o["gamma"]))
    rep = verify(cert, empirical_covariance(data), o["k"], psd_mode=o["psd_mode"], tol=o["tol"], X=data.X,
                 seed=o["seed"])
    if o["format"] == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["constraint", "value", "bound", "pass", "estimate"])
        for name, c in rep.constraints.items():
            w.writerow([name, c.value, c.bound, c.passed, c.estimate])
        w.writerow(["objective", rep.objective, "", "", ""])
        _emit(buf.getvalue(), o["out"])
    else:
        _emit(rep.to_json(), o["out"])
    return rep.exit_code


def _experiment(o, kind) -> ExperimentConfig:
    psd = "structural" if o["psd_mode"] == "auto" else o["psd_mode"]
    return ExperimentConfig(_model(o), CertificateParams(o["k"], o["gamma"]), o["trials"], psd, kind,
                            o["theorem_mode"], o["out"], o["format"], o["jobs"], o["thresholds"])


def _cmd_detect(o):
    res = run_detection_gap(_experiment(o, "detect_h0"))
    _emit(result_to_text(res, o["format"]), o["out"])
    return 0


def _cmd_estimate(o):
    recs = run_estimation_distance(_experiment(o, "estimate_hv"))
    _emit(result_to_text(recs, o["format"]), o["out"])
    return 0


def _cmd_oracle(o):
    data = _data(o)
    res = brute_force_kmax(empirical_covariance(data), o["k"], discrete=o["discrete"])
    _emit(json.dumps({"value": res.value, "support": list(res.support),
                      "signs": None if res.signs is None else list(res.signs)}), o["out"])
    return 0


def _cmd_calibrate(o):
    cfg = calibrate_thresholds(grid=CALIBRATION_GRID, seeds=CALIBRATION_SEEDS, margin=o["margin"])
    _emit(cfg.to_json(), o["out"])
    return 0


def _cmd_report(o, files):
    buf = io.StringIO()
    w = None
    for f in files:
        data = json.loads(Path(f).read_text())
        if isinstance(data, dict) and "summary" in data:
            row = {"file": f} | data["summary"]
        else:
            recs = data
            row = {"file": f, "trials": len(recs),
                   "feasible": sum(r["feasible"] for r in recs),
                   "meets_target": sum(r["meets_target"] for r in recs),
                   "min_distance": min(r["distance"] for r in recs) if recs else float("nan"),
                   "mean_objective": float(np.mean([r["objective"] for r in recs])) if recs else float("nan")}
        if w is None:
            w = csv.DictWriter(buf, fieldnames=list(row), extrasaction="ignore")
            w.writeheader()
        w.writerow(row)
    _emit(buf.getvalue(), o["out"])
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        o = resolve(args)
        cmd = args.command
        if cmd == "report":
            return _cmd_report(o, args.files)
        handler = {
            "generate": _cmd_generate, "check-pr": _cmd_check_pr, "certify": _cmd_certify, "verify": _cmd_verify,
            "detect": _cmd_detect, "estimate": _cmd_estimate, "oracle": _cmd_oracle, "calibrate": _cmd_calibrate,
        }[cmd]
        return handler(o)
    except (SosPcaError, ValueError, OSError) as exc:
        print(f"sospca: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
