"""Regression and ANOVA over sweep results.

Each outcome (cd or spl) is regressed on the three attribute-diversity
sigmas and their pairwise products:

    y ~ 1 + sigma_d + sigma_rs + sigma_rw
          + sigma_d*sigma_rs + sigma_d*sigma_rw + sigma_rs*sigma_rw

The ANOVA decomposes the model sum of squares sequentially (Type I) in
exactly that predictor order; with a balanced full-factorial sweep the
main-effect attributions are essentially order-free, and the fixed order
keeps the table reproducible.  Rows without a defined spl are excluded
when spl is the response (and counted), which shrinks the Error/Total
degrees of freedom accordingly.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import betainc

from .metrics import RunResult
from .sweep import ResultTable

__all__ = [
    "PREDICTORS",
    "RegressionFit",
    "AnovaRow",
    "AnovaTable",
    "CellAggregate",
    "fit_ols",
    "anova",
    "cell_aggregates",
    "f_survival",
    "format_p",
    "render_regression",
    "render_anova",
    "render_cell_aggregates",
]

PREDICTORS = (
    "sigma_d",
    "sigma_rs",
    "sigma_rw",
    "sigma_d:sigma_rs",
    "sigma_d:sigma_rw",
    "sigma_rs:sigma_rw",
)

_MIN_ROWS = 8  # intercept + six slopes needs at least this many usable rows


@dataclass(frozen=True)
class RegressionFit:
    """Least-squares fit of one outcome on the six diversity terms."""

    response: str
    coefficients: Dict[str, float]  # "intercept" followed by PREDICTORS
    n_used: int
    n_excluded: int
    rss: float
    tss: float

    @property
    def r_squared(self) -> float:
        return 1.0 - self.rss / self.tss if self.tss > 0 else float("nan")

    def predict(self, sigma_d: float, sigma_rs: float, sigma_rw: float) -> float:
        c = self.coefficients
        return (
            c["intercept"]
            + c["sigma_d"] * sigma_d
            + c["sigma_rs"] * sigma_rs
            + c["sigma_rw"] * sigma_rw
            + c["sigma_d:sigma_rs"] * sigma_d * sigma_rs
            + c["sigma_d:sigma_rw"] * sigma_d * sigma_rw
            + c["sigma_rs:sigma_rw"] * sigma_rs * sigma_rw
        )


@dataclass(frozen=True)
class AnovaRow:
    term: str
    ss: float
    df: int
    ms: float
    f: float
    p: float


@dataclass(frozen=True)
class AnovaTable:
    """Sequential-SS ANOVA of the six-term regression, plus Error and Total."""

    response: str
    terms: Tuple[AnovaRow, ...]
    error_ss: float
    error_df: int
    error_ms: float
    total_ss: float
    total_df: int
    n_used: int
    n_excluded: int


@dataclass(frozen=True)
class CellAggregate:
    """Per-cell summary: moments of cd and of the defined spl values."""

    sigma_d: float
    sigma_rs: float
    sigma_rw: float
    n_runs: int
    cd_mean: float
    cd_sd: Optional[float]
    spl_mean: Optional[float]
    spl_sd: Optional[float]
    spl_defined: int
    spl_undefined: int


TableLike = Union[ResultTable, Sequence[RunResult]]


def _rows_of(table: TableLike) -> List[RunResult]:
    if isinstance(table, ResultTable):
        return list(table.rows)
    return list(table)


def _usable_rows(table: TableLike, response: str) -> Tuple[List[RunResult], int]:
    rows = _rows_of(table)
    if response == "cd":
        return rows, 0
    if response == "spl":
        usable = [r for r in rows if r.spl is not None]
        return usable, len(rows) - len(usable)
    raise ValueError(f"response must be 'cd' or 'spl', got {response!r}")


def _design_matrix(rows: Sequence[RunResult]) -> np.ndarray:
    sd = np.array([r.sigma_d for r in rows])
    srs = np.array([r.sigma_rs for r in rows])
    srw = np.array([r.sigma_rw for r in rows])
    return np.column_stack(
        [np.ones(len(rows)), sd, srs, srw, sd * srs, sd * srw, srs * srw]
    )


def _check_rank(design: np.ndarray) -> None:
    names = ("intercept",) + PREDICTORS
    rank = 0
    for k in range(design.shape[1]):
        new_rank = int(np.linalg.matrix_rank(design[:, : k + 1]))
        if new_rank == rank:
            raise ValueError(
                f"design matrix is rank deficient: column {names[k]!r} is "
                "collinear with the preceding columns (each sigma needs at "
                "least two distinct values)"
            )
        rank = new_rank


def fit_ols(table: TableLike, response: str) -> RegressionFit:
    """Ordinary least squares of ``response`` on the six diversity terms.

    Uses an SVD-based solve (numpy lstsq); the 7-column design is benignly
    conditioned for any real sweep.  For response 'spl', rows without a
    defined value are excluded and counted in ``n_excluded``.
    """
    rows, n_excluded = _usable_rows(table, response)
    if len(rows) < _MIN_ROWS:
        raise ValueError(
            f"need at least {_MIN_ROWS} usable rows to fit 7 coefficients, got {len(rows)}"
        )
    design = _design_matrix(rows)
    _check_rank(design)
    y = np.array([r.cd if response == "cd" else r.spl for r in rows])
    theta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ theta
    rss = float(residuals @ residuals)
    centered = y - y.mean()
    tss = float(centered @ centered)
    names = ("intercept",) + PREDICTORS
    return RegressionFit(
        response=response,
        coefficients={name: float(b) for name, b in zip(names, theta)},
        n_used=len(rows),
        n_excluded=n_excluded,
        rss=rss,
        tss=tss,
    )


def f_survival(f_stat: float, df1: int, df2: int) -> float:
    """P(F >= f_stat) for an F(df1, df2) variable, via the regularized
    incomplete beta function: I_{df2/(df2 + df1*f)}(df2/2, df1/2)."""
    if math.isinf(f_stat):
        return 0.0
    if f_stat <= 0.0:
        return 1.0
    x = df2 / (df2 + df1 * f_stat)
    return float(betainc(df2 / 2.0, df1 / 2.0, x))


def anova(table: TableLike, response: str) -> AnovaTable:
    """Sequential (Type I) ANOVA of the six-term regression.

    Each term's sum of squares is the drop in residual SS when that term
    joins the model, in the fixed PREDICTORS order.  F compares the term
    mean square against the full-model error mean square; a zero error
    variance is reported as F = inf, p = 0.
    """
    rows, n_excluded = _usable_rows(table, response)
    if len(rows) < _MIN_ROWS:
        raise ValueError(
            f"need at least {_MIN_ROWS} usable rows to fit 7 coefficients, got {len(rows)}"
        )
    design = _design_matrix(rows)
    _check_rank(design)
    y = np.array([r.cd if response == "cd" else r.spl for r in rows])

    centered = y - y.mean()
    total_ss = float(centered @ centered)
    n = len(rows)

    rss_by_prefix = []
    for k in range(1, design.shape[1] + 1):
        theta, _, _, _ = np.linalg.lstsq(design[:, :k], y, rcond=None)
        residuals = y - design[:, :k] @ theta
        rss_by_prefix.append(float(residuals @ residuals))

    error_ss = rss_by_prefix[-1]
    error_df = n - design.shape[1]
    error_ms = error_ss / error_df if error_df > 0 else float("nan")
    # a residual this far below the total variation is numerical dust from an
    # exact fit: report the zero-error-variance flag (F = inf, p = 0)
    zero_error = error_ss <= 1e-12 * max(total_ss, 1.0)

    term_rows = []
    for i, term in enumerate(PREDICTORS):
        ss = rss_by_prefix[i] - rss_by_prefix[i + 1]
        ss = max(ss, 0.0)  # guard tiny negative float noise
        ms = ss  # df is 1 per term
        if not zero_error and error_ms > 0:
            f_stat = ms / error_ms
        else:
            f_stat = float("inf")
        term_rows.append(
            AnovaRow(term=term, ss=ss, df=1, ms=ms, f=f_stat, p=f_survival(f_stat, 1, error_df))
        )

    return AnovaTable(
        response=response,
        terms=tuple(term_rows),
        error_ss=error_ss,
        error_df=error_df,
        error_ms=error_ms,
        total_ss=total_ss,
        total_df=n - 1,
        n_used=n,
        n_excluded=n_excluded,
    )


def cell_aggregates(table: TableLike) -> List[CellAggregate]:
    """Mean/sd of cd and of the defined spl per (sigma_d, sigma_rs, sigma_rw).

    Sample standard deviations (ddof=1) are None when fewer than two values
    are available; spl_mean is None when no run in the cell has a defined
    spl.  The undefined-spl count is reported per cell.
    """
    rows = _rows_of(table)
    grouped: Dict[Tuple[float, float, float], List[RunResult]] = {}
    for row in rows:
        grouped.setdefault((row.sigma_d, row.sigma_rs, row.sigma_rw), []).append(row)

    aggregates = []
    for key in sorted(grouped):
        cell_rows = grouped[key]
        cd_values = np.array([r.cd for r in cell_rows])
        spl_values = np.array([r.spl for r in cell_rows if r.spl is not None])
        aggregates.append(
            CellAggregate(
                sigma_d=key[0],
                sigma_rs=key[1],
                sigma_rw=key[2],
                n_runs=len(cell_rows),
                cd_mean=float(cd_values.mean()),
                cd_sd=float(cd_values.std(ddof=1)) if len(cd_values) > 1 else None,
                spl_mean=float(spl_values.mean()) if len(spl_values) > 0 else None,
                spl_sd=float(spl_values.std(ddof=1)) if len(spl_values) > 1 else None,
                spl_defined=len(spl_values),
                spl_undefined=len(cell_rows) - len(spl_values),
            )
        )
    return aggregates


# -- report rendering --------------------------------------------------------


def format_p(p: float) -> str:
    """Display p-values the way ANOVA tables conventionally do."""
    if p < 1e-4:
        return "p<.0001"
    return f"p={p:.4f}"


def _equation_text(fit: RegressionFit) -> str:
    c = fit.coefficients
    parts = [f"{c['intercept']:.6g}"]
    for term in PREDICTORS:
        value = c[term]
        sign = "-" if value < 0 else "+"
        parts.append(f"{sign} {abs(value):.6g}*{term}")
    return f"{fit.response} ~ " + " ".join(parts)


def render_regression(fit: RegressionFit, fmt: str = "text") -> str:
    """Render a fit as aligned text, CSV, or a JSON document."""
    if fmt == "json":
        return json.dumps(
            {
                "response": fit.response,
                "coefficients": fit.coefficients,
                "n_used": fit.n_used,
                "n_excluded": fit.n_excluded,
                "rss": fit.rss,
                "tss": fit.tss,
                "r_squared": fit.r_squared,
            },
            indent=2,
        )
    if fmt == "csv":
        out = io.StringIO()
        out.write("term,coefficient\n")
        for name, value in fit.coefficients.items():
            out.write(f"{name},{value!r}\n")
        return out.getvalue()
    if fmt == "text":
        lines = [
            f"OLS regression of {fit.response} "
            f"(n_used={fit.n_used}, excluded={fit.n_excluded}, R^2={fit.r_squared:.4f})",
            "  " + _equation_text(fit),
            "",
            f"  {'term':<18}{'coefficient':>14}",
        ]
        for name, value in fit.coefficients.items():
            lines.append(f"  {name:<18}{value:>14.6f}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def render_anova(table: AnovaTable, fmt: str = "text") -> str:
    """Render an ANOVA table as aligned text, CSV, or a JSON document."""
    if fmt == "json":
        return json.dumps(
            {
                "response": table.response,
                "terms": [
                    {
                        "term": row.term,
                        "ss": row.ss,
                        "df": row.df,
                        "ms": row.ms,
                        "f": row.f,
                        "p": row.p,
                    }
                    for row in table.terms
                ],
                "error": {"ss": table.error_ss, "df": table.error_df, "ms": table.error_ms},
                "total": {"ss": table.total_ss, "df": table.total_df},
                "n_used": table.n_used,
                "n_excluded": table.n_excluded,
            },
            indent=2,
        )
    if fmt == "csv":
        out = io.StringIO()
        out.write("term,ss,df,ms,f,p\n")
        for row in table.terms:
            out.write(f"{row.term},{row.ss!r},{row.df},{row.ms!r},{row.f!r},{row.p!r}\n")
        out.write(f"Error,{table.error_ss!r},{table.error_df},{table.error_ms!r},,\n")
        out.write(f"Total,{table.total_ss!r},{table.total_df},,,\n")
        return out.getvalue()
    if fmt == "text":
        header = f"  {'term':<18}{'SS':>12}{'df':>8}{'MS':>12}{'F':>12}  Sig."
        lines = [
            f"ANOVA of {table.response} regression "
            f"(n_used={table.n_used}, excluded={table.n_excluded})",
            header,
        ]
        for row in table.terms:
            f_text = "inf" if math.isinf(row.f) else f"{row.f:.2f}"
            lines.append(
                f"  {row.term:<18}{row.ss:>12.2f}{row.df:>8}{row.ms:>12.2f}"
                f"{f_text:>12}  {format_p(row.p)}"
            )
        lines.append(
            f"  {'Error':<18}{table.error_ss:>12.2f}{table.error_df:>8}{table.error_ms:>12.2f}"
        )
        lines.append(f"  {'Total':<18}{table.total_ss:>12.2f}{table.total_df:>8}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def render_cell_aggregates(aggregates: Sequence[CellAggregate]) -> str:
    """The per-cell summary as CSV (the tabular basis of surface plots)."""
    out = io.StringIO()
    out.write(
        "sigma_d,sigma_rs,sigma_rw,n_runs,cd_mean,cd_sd,spl_mean,spl_sd,"
        "spl_defined,spl_undefined\n"
    )
    for agg in aggregates:
        fields = [
            repr(agg.sigma_d),
            repr(agg.sigma_rs),
            repr(agg.sigma_rw),
            str(agg.n_runs),
            repr(agg.cd_mean),
            "" if agg.cd_sd is None else repr(agg.cd_sd),
            "" if agg.spl_mean is None else repr(agg.spl_mean),
            "" if agg.spl_sd is None else repr(agg.spl_sd),
            str(agg.spl_defined),
            str(agg.spl_undefined),
        ]
        out.write(",".join(fields) + "\n")
    return out.getvalue()
