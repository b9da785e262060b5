"""Command-line surface: CSV ingestion, fits, comparisons, simulations.

Subcommands
-----------
fit        OLS fit (or the component regression when --d is given).
compare    Three-column coefficient table: OLS, retained-component, and
           omitted-component fits with standard errors and exceedance
           markers, plus the identity residuals in JSON mode.
simulate   Run a seeded simulation config and tabulate predictions
           against observations; alerts when a z-score is out of range.

Exit codes: 0 success, 2 parse/validation, 3 rank deficiency,
4 degrees of freedom, 5 convergence failure, 6 simulation z-alert.
Tables round to 2 significant figures for display; JSON output carries
full precision and is byte-identical across reruns of the same inputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import (
    build_report,
    covariance_agreement,
    pcr_covariance,
    variance_recomposition_check,
)
from .errors import (
    ConvergenceError,
    DataFormatError,
    DegreesOfFreedomError,
    PcregError,
    RankDeficiencyError,
    ValidationError,
)
from .linalg import gram_pseudo_inverse, svd_thin
from .model import (
    Dataset,
    beta_additivity_check,
    fit_ols,
    fit_pcr,
    recover_ols_sigma2,
    sigma2_d_three_forms,
)
from .montecarlo import (
    SimulationConfig,
    adjudicate_rss_dof,
    run_simulation,
    theory_comparison,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RANK = 3
EXIT_DOF = 4
EXIT_CONVERGENCE = 5
EXIT_ALERT = 6

_EXIT_HELP = """\
exit codes:
  0  success
  2  input parse or validation error
  3  rank-deficient design
  4  too few observations (degrees of freedom)
  5  decomposition failed to converge
  6  simulate: a |z| exceeded the alert threshold
"""

STANDARDIZE_MODES = ("none", "center", "zscore")


@dataclass(frozen=True)
class TransformRecord:
    """What standardize() actually did, per design column.

    Exempt columns (the intercept) keep mean 0 and scale 1 so reports can
    disclose the applied preprocessing exactly.
    """

    mode: str
    means: np.ndarray
    scales: np.ndarray


def load_csv(path: str | Path, response: str, add_intercept: bool = True) -> Dataset:
    """Read a header-row CSV into a Dataset.

    Cells must parse as finite decimal numbers ('.' radix, ',' delimiter).
    The response column is excluded from the design; remaining columns
    keep file order, with an all-ones Intercept column prepended when
    ``add_intercept`` is set.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found") from None
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not valid UTF-8: {exc}") from None

    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise DataFormatError(f"{path}: empty file (line 1: header row required)")
    header = [cell.strip() for cell in rows[0]]
    if any(not name for name in header):
        raise DataFormatError(f"{path}: line 1: blank column name in header")
    if len(set(header)) != len(header):
        dupes = sorted({name for name in header if header.count(name) > 1})
        raise DataFormatError(f"{path}: line 1: duplicate column name(s) {dupes}")
    if response not in header:
        raise DataFormatError(
            f"{path}: response column {response!r} not in header {header}"
        )
    if len(rows) == 1:
        raise DataFormatError(f"{path}: no data rows after the header")

    ncol = len(header)
    values = np.empty((len(rows) - 1, ncol))
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != ncol:
            raise DataFormatError(
                f"{path}: line {line_no}: expected {ncol} cells, got {len(row)}"
            )
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row at line {line_no}, column {header[j]!r}: "
                    f"cannot parse {cell.strip()!r} as a number"
                ) from None
            if not math.isfinite(v):
                raise DataFormatError(
                    f"{path}: row at line {line_no}, column {header[j]!r}: "
                    f"non-finite value {cell.strip()!r}"
                )
            values[line_no - 2, j] = v

    resp_idx = header.index(response)
    y = values[:, resp_idx]
    keep = [j for j in range(ncol) if j != resp_idx]
    x = values[:, keep]
    names = [header[j] for j in keep]
    if add_intercept:
        x = np.column_stack([np.ones(x.shape[0]), x])
        names = ["Intercept"] + names
    return Dataset(y=y, x=x, names=tuple(names), intercept_included=add_intercept)


def standardize(data: Dataset, mode: str) -> tuple[Dataset, TransformRecord]:
    """Center or z-score the design columns, intercept exempt.

    ``center`` subtracts column means; ``zscore`` additionally divides by
    the sample standard deviation (n-1 divisor).  A zero-variance column
    under zscore is an error naming the column.  The returned record
    discloses the applied transform.
    """
    if mode not in STANDARDIZE_MODES:
        raise ValidationError(f"unknown standardize mode {mode!r}; choose from {STANDARDIZE_MODES}")
    p = data.p
    means = np.zeros(p)
    scales = np.ones(p)
    if mode == "none":
        return data, TransformRecord(mode="none", means=means, scales=scales)
    x = data.x.copy()
    start = 1 if data.intercept_included else 0
    for j in range(start, p):
        m = float(x[:, j].mean())
        x[:, j] -= m
        means[j] = m
    if mode == "zscore":
        for j in range(start, p):
            s = float(x[:, j].std(ddof=1))
            if s == 0.0:
                raise ValidationError(
                    f"column {data.names[j]!r} has zero variance; zscore undefined"
                )
            x[:, j] /= s
            scales[j] = s
    out = Dataset(y=data.y, x=x, names=data.names, intercept_included=data.intercept_included)
    return out, TransformRecord(mode=mode, means=means, scales=scales)


# ---------------------------------------------------------------------------
# payload builders (shared by table and JSON rendering)


def _transform_dict(record: TransformRecord) -> dict:
    return {
        "mode": record.mode,
        "means": record.means.tolist(),
        "scales": record.scales.tolist(),
    }


def fit_payload(data: Dataset, d: int | None, record: TransformRecord) -> dict:
    """Single-model fit: OLS when d is None, else the component regression."""
    f = svd_thin(data.x)
    config = {
        "n": data.n,
        "p": data.p,
        "names": list(data.names),
        "standardize": _transform_dict(record),
        "d": d,
    }
    if d is None:
        ols = fit_ols(data, factors=f)
        return {
            "config": config,
            "estimates": {
                "beta": ols.beta.tolist(),
                "sigma2": ols.sigma2,
                "rss": ols.rss,
                "dof": ols.dof,
            },
            "standard_errors": {"beta": np.sqrt(np.diag(ols.cov)).tolist()},
            "covariances": {"beta": ols.cov.tolist()},
        }
    ols = fit_ols(data, factors=f)
    pcr = fit_pcr(data, d, factors=f)
    covs = pcr_covariance(f, ols, pcr)
    return {
        "config": config,
        "estimates": {
            "beta_pc_d": pcr.beta_pc_d.tolist(),
            "beta_d": pcr.beta_d.tolist(),
            "beta_k": pcr.beta_k.tolist(),
            "sigma2_d": pcr.sigma2_d,
            "sigma2_k": pcr.sigma2_k,
            "sigma2_q": pcr.sigma2_q.tolist(),
            "rss_d": pcr.rss_d,
        },
        "standard_errors": {"beta_d": np.sqrt(np.diag(covs.direct)).tolist()},
        "covariances": {"beta_d": covs.direct.tolist()},
    }


def compare_payload(data: Dataset, d: int, record: TransformRecord) -> dict:
    """Full OLS / retained / omitted comparison with identity residuals."""
    f = svd_thin(data.x)
    ols = fit_ols(data, factors=f)
    pcr = fit_pcr(data, d, factors=f)
    covs = pcr_covariance(f, ols, pcr)
    report = build_report(f, ols, pcr)

    var_k = gram_pseudo_inverse(f, pcr.split.omitted) * pcr.sigma2_k
    se_k = np.sqrt(np.diag(var_k))
    exceeds_k = se_k > report.se_ols

    forms = sigma2_d_three_forms(data, pcr, ols=ols, factors=f)
    spread = max(abs(v - pcr.sigma2_d) for v in forms)
    recovered = recover_ols_sigma2(data, pcr, factors=f)
    residuals = {
        "beta_additivity": beta_additivity_check(ols, pcr),
        "sigma2_recovery": abs(recovered - ols.sigma2),
        "three_forms_spread": spread,
        "covariance_agreement": covariance_agreement(covs),
        "bias_identity": abs(report.bias_sigma2_plugin - (pcr.sigma2_d - ols.sigma2)),
    }
    if 1 <= d < data.p and not covs.degenerate:
        residuals["variance_recomposition"] = variance_recomposition_check(f, ols, pcr)
    else:
        residuals["variance_recomposition"] = None

    return {
        "config": {
            "n": data.n,
            "p": data.p,
            "d": d,
            "names": list(data.names),
            "standardize": _transform_dict(record),
        },
        "estimates": {
            "ols": ols.beta.tolist(),
            "pcr_d": pcr.beta_d.tolist(),
            "pcr_k": pcr.beta_k.tolist(),
            "beta_pc_d": pcr.beta_pc_d.tolist(),
            "sigma2": {
                "ols": ols.sigma2,
                "pcr_d": pcr.sigma2_d,
                "pcr_k": pcr.sigma2_k,
                "per_component": pcr.sigma2_q.tolist(),
            },
            "rss": {"ols": ols.rss, "pcr_d": pcr.rss_d},
        },
        "standard_errors": {
            "ols": report.se_ols.tolist(),
            "pcr_d": report.se_pcr.tolist(),
            "pcr_k": se_k.tolist(),
        },
        "covariances": {
            "ols": ols.cov.tolist(),
            "pcr_direct": covs.direct.tolist(),
            "pcr_scaled": None if covs.scaled is None else covs.scaled.tolist(),
            "pcr_difference": None if covs.difference is None else covs.difference.tolist(),
            "pcr_k": var_k.tolist(),
        },
        "diagnostics": {
            "inflation_ratio": report.inflation_ratio,
            "loading_diag": report.loading_diag.tolist(),
            "exceeds_ols_d": report.exceeds_ols.tolist(),
            "exceeds_ols_k": exceeds_k.tolist(),
            "bias_beta": report.bias_beta.tolist(),
            "bias_sigma2_plugin": report.bias_sigma2_plugin,
            "degenerate": report.degenerate,
        },
        "residuals": residuals,
    }


def simulate_payload(cfg: SimulationConfig, alert_threshold: float) -> tuple[dict, bool]:
    """Run a simulation and tabulate it; the flag reports a z alert."""
    res = run_simulation(cfg)
    rows = theory_comparison(res)
    adjudication = adjudicate_rss_dof(res)
    alert = any(
        row.asserted and math.isfinite(row.z) and abs(row.z) > alert_threshold
        for row in rows
    )
    payload = {
        "config": {
            "n": cfg.n,
            "p": cfg.p,
            "d": cfg.d,
            "replicates": cfg.replicates,
            "seed": cfg.seed,
            "sigma2_true": cfg.sigma2_true,
            "beta_true": cfg.beta_true.tolist(),
            "generator": res.generator,
            "alert_threshold": alert_threshold,
        },
        "result": {
            "mean_sigma2_d": res.mean_sigma2_d,
            "mean_rss_d": res.mean_rss_d,
            "mean_beta_d": res.mean_beta_d.tolist(),
            "empirical_cov_beta_d": res.empirical_cov_beta_d.tolist(),
            "predicted_cov": res.predicted_cov.tolist(),
            "mcse_sigma2_d": res.mcse_sigma2_d,
            "mcse_rss_d": res.mcse_rss_d,
            "mcse_beta_d": res.mcse_beta_d.tolist(),
        },
        "rows": [
            {
                "claim": row.claim,
                "predicted": row.predicted,
                "observed": row.observed,
                "mcse": row.mcse,
                "z": row.z,
                "asserted": row.asserted,
            }
            for row in rows
        ],
        "adjudication": adjudication,
        "alert": alert,
    }
    return payload, alert


# ---------------------------------------------------------------------------
# rendering


def _sig2(v: float) -> str:
    """Two significant figures for table display; JSON stays unrounded."""
    if v == 0:
        return "0"
    if not math.isfinite(v):
        return str(v)
    return f"{v:.2g}"


def _render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        for j, cell in enumerate(row):
            widths[j] = max(widths[j], len(cell))
    lines = [
        "  ".join(h.ljust(widths[j]) for j, h in enumerate(headers)).rstrip(),
        "  ".join("-" * widths[j] for j in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
    return "\n".join(lines) + "\n"


def _cell(estimate: float, se: float) -> str:
    return f"{_sig2(estimate)} ({_sig2(se)})"


def render_compare_table(payload: dict) -> str:
    est = payload["estimates"]
    se = payload["standard_errors"]
    diag = payload["diagnostics"]
    names = payload["config"]["names"]
    rows = []
    for j, name in enumerate(names):
        markers = ",".join(
            tag
            for tag, flag in (("d", diag["exceeds_ols_d"][j]), ("k", diag["exceeds_ols_k"][j]))
            if flag
        )
        rows.append(
            [
                name,
                _cell(est["ols"][j], se["ols"][j]),
                _cell(est["pcr_d"][j], se["pcr_d"][j]),
                _cell(est["pcr_k"][j], se["pcr_k"][j]),
                markers,
            ]
        )
    d = payload["config"]["d"]
    table = _render_table(
        ["coefficient", "ols", f"pcr_d (d={d})", "pcr_k", "se>ols"], rows
    )
    footer = [
        f"n = {payload['config']['n']}, p = {payload['config']['p']}, d = {d}",
        f"sigma2: ols {est['sigma2']['ols']:.6g}, pcr_d {est['sigma2']['pcr_d']:.6g}, "
        f"pcr_k {est['sigma2']['pcr_k']:.6g}",
        f"inflation ratio (sigma2_d / sigma2): {diag['inflation_ratio']:.6g}",
        f"standardize: {payload['config']['standardize']['mode']}",
        f"covariance agreement residual: {payload['residuals']['covariance_agreement']:.3e}",
    ]
    return table + "\n" + "\n".join(footer) + "\n"


def render_fit_table(payload: dict) -> str:
    names = payload["config"]["names"]
    est = payload["estimates"]
    se = payload["standard_errors"]
    if payload["config"]["d"] is None:
        rows = [
            [name, _cell(est["beta"][j], se["beta"][j])] for j, name in enumerate(names)
        ]
        table = _render_table(["coefficient", "ols"], rows)
        footer = (
            f"sigma2 = {est['sigma2']:.6g}, rss = {est['rss']:.6g}, dof = {est['dof']}"
        )
        return table + "\n" + footer + "\n"
    rows = [
        [name, _cell(est["beta_d"][j], se["beta_d"][j])] for j, name in enumerate(names)
    ]
    table = _render_table(["coefficient", f"pcr_d (d={payload['config']['d']})"], rows)
    footer = (
        f"sigma2_d = {est['sigma2_d']:.6g}, rss_d = {est['rss_d']:.6g}, "
        f"sigma2_k = {est['sigma2_k']:.6g}"
    )
    return table + "\n" + footer + "\n"


def render_simulate_table(payload: dict) -> str:
    rows = [
        [
            row["claim"],
            f"{row['predicted']:.6g}",
            f"{row['observed']:.6g}",
            f"{row['mcse']:.3g}",
            f"{row['z']:+.3f}" if math.isfinite(row["z"]) else "n/a",
            "asserted" if row["asserted"] else "recorded",
        ]
        for row in payload["rows"]
    ]
    table = _render_table(["claim", "predicted", "observed", "mcse", "z", "role"], rows)
    adj = payload["adjudication"]
    footer = [
        f"replicates = {payload['config']['replicates']}, seed = {payload['config']['seed']}, "
        f"generator = {payload['config']['generator']}",
        f"rss dof adjudication: winner = {adj['winner']} "
        f"(z_nd = {adj['z_nd']:+.3f}, z_np = {adj['z_np']:+.3f})",
        f"alert = {payload['alert']}",
    ]
    return table + "\n" + "\n".join(footer) + "\n"


def _json_safe(value):
    # Strict JSON has no NaN/Inf tokens; map non-finite floats to null.
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def render_json(payload: dict) -> str:
    return json.dumps(_json_safe(payload), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def load_simulation_config(path: str | Path, seed_override: int | None = None) -> SimulationConfig:
    """Parse a simulation config JSON file into a validated SimulationConfig."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataFormatError(f"{path}: file not found") from None
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise DataFormatError(f"{path}: expected a JSON object at top level")
    for field in ("x", "beta_true", "sigma2_true", "d", "replicates", "seed"):
        if field not in raw:
            raise DataFormatError(f"{path}: missing field {field!r}")
    try:
        x = np.asarray(raw["x"], dtype=float)
        beta = np.asarray(raw["beta_true"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: field 'x'/'beta_true': {exc}") from None
    seed = int(raw["seed"]) if seed_override is None else seed_override
    return SimulationConfig(
        x=x,
        beta_true=beta,
        sigma2_true=float(raw["sigma2_true"]),
        d=int(raw["d"]),
        replicates=int(raw["replicates"]),
        seed=seed,
    )


def _add_data_args(sub: argparse.ArgumentParser, d_required: bool) -> None:
    sub.add_argument("--input", required=True, help="CSV file (header row, comma separated)")
    sub.add_argument("--response", required=True, help="response column name")
    sub.add_argument(
        "--d",
        type=int,
        required=d_required,
        default=None,
        help="number of leading components to retain",
    )
    sub.add_argument(
        "--standardize",
        choices=STANDARDIZE_MODES,
        default="none",
        help="design preprocessing (intercept exempt); default none",
    )
    sub.add_argument(
        "--no-intercept",
        action="store_true",
        help="do not prepend an all-ones intercept column",
    )
    sub.add_argument("--format", choices=("table", "json"), default="table")
    sub.add_argument("--out", default=None, help="write output to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcreg",
        description="Principal component regression with variance and bias diagnostics.",
        epilog=_EXIT_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit OLS, or the component regression with --d")
    _add_data_args(fit, d_required=False)

    compare = sub.add_parser("compare", help="OLS versus component regression, side by side")
    _add_data_args(compare, d_required=True)

    simulate = sub.add_parser("simulate", help="run a seeded simulation config")
    simulate.add_argument("--config", required=True, help="simulation config JSON file")
    simulate.add_argument("--seed", type=int, default=None, help="override the config seed")
    simulate.add_argument(
        "--alert-threshold",
        type=float,
        default=4.0,
        help="exit with code 6 when any finite |z| exceeds this (default 4)",
    )
    simulate.add_argument("--format", choices=("table", "json"), default="table")
    simulate.add_argument("--out", default=None)
    return parser


def _run_fit(args: argparse.Namespace) -> int:
    data = load_csv(args.input, args.response, add_intercept=not args.no_intercept)
    data, record = standardize(data, args.standardize)
    payload = fit_payload(data, args.d, record)
    payload["config"]["input"] = args.input
    payload["config"]["response"] = args.response
    text = render_json(payload) if args.format == "json" else render_fit_table(payload)
    _emit(text, args.out)
    return EXIT_OK


def _run_compare(args: argparse.Namespace) -> int:
    data = load_csv(args.input, args.response, add_intercept=not args.no_intercept)
    data, record = standardize(data, args.standardize)
    payload = compare_payload(data, args.d, record)
    payload["config"]["input"] = args.input
    payload["config"]["response"] = args.response
    text = render_json(payload) if args.format == "json" else render_compare_table(payload)
    _emit(text, args.out)
    return EXIT_OK


def _run_simulate(args: argparse.Namespace) -> int:
    cfg = load_simulation_config(args.config, seed_override=args.seed)
    payload, alert = simulate_payload(cfg, args.alert_threshold)
    text = render_json(payload) if args.format == "json" else render_simulate_table(payload)
    _emit(text, args.out)
    return EXIT_ALERT if alert else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"fit": _run_fit, "compare": _run_compare, "simulate": _run_simulate}
    try:
        return handlers[args.command](args)
    except (DataFormatError, ValidationError) as exc:
        print(f"pcreg: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankDeficiencyError as exc:
        print(f"pcreg: rank error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except DegreesOfFreedomError as exc:
        print(f"pcreg: dof error: {exc}", file=sys.stderr)
        return EXIT_DOF
    except ConvergenceError as exc:
        print(f"pcreg: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PcregError as exc:  # any future subclass: fail closed, not loudly
        print(f"pcreg: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
