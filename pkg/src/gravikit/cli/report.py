"""Report assembly and bit-stable export (JSON with sorted keys and 12
significant digits; CSV with a header row)."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import GravikitError
from .suites import Check, Context, run_checks

FOOTNOTES = [
    "Green's functions use the monopole normalization G = 1/(2|x|) with Laplacian -2 pi delta: "
    "it is the only choice under which the local coefficients 1/(2r) at p and -2/r at q and the "
    "integer fluxes 1 and -4 hold together.",
    "The model near each p is alpha + 1/(2r); the alternative coefficient 2/r is treated as a typo "
    "because it contradicts the flux +1 and the Taub-NUT identification.",
    "The Atiyah-Hitchin correction sigma^AH is set to zero: the q-cores use the pure Taub-NUT model "
    "of mass -4, whose omitted terms are exponentially small in r/eps.",
    "The far-field constants beta = 1/a (rank 1) and pi/A (rank 2) are derived from Gauss's law and "
    "the image-sum oracle, not read off a published value.",
    "The torsion entry printed with index 0 is implemented as a Z2 in H1 when n = 0.",
    "Rank-2 intersection matrices are not tabulated; only Betti numbers are reported there.",
]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class Report:
    suite: str
    checks: list[Check]
    metadata: dict = field(default_factory=dict)
    footnotes: list[str] = field(default_factory=lambda: list(FOOTNOTES))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def exit_code(self) -> int:
        kinds = {c.error_kind for c in self.checks if c.error_kind}
        if "config" in kinds:
            return EXIT_CONFIG
        if kinds & {"numeric", "internal"}:
            return EXIT_NUMERIC
        return EXIT_OK if self.passed else EXIT_FAIL

    def to_dict(self, timings: bool = False) -> dict:
        checks = []
        for c in sorted(self.checks, key=lambda c: c.name):
            d = asdict(c)
            if not timings:
                d.pop("runtime")
            checks.append(d)
        names = [c["name"] for c in checks]
        if len(set(names)) != len(names):
            raise GravikitError("duplicate check names in report")
        return {
            "checks": checks,
            "footnotes": self.footnotes,
            "metadata": self.metadata,
            "status": "pass" if self.passed else "fail",
            "suite": self.suite,
            "summary": {"checks": len(checks), "failed": sum(not c["passed"] for c in checks)},
        }


def run_suite(config, suite: str, context: Context | None = None) -> Report:
    """Run one suite (or "all") on a loaded configuration."""
    ctx = context or Context(config)
    checks = run_checks(ctx, suite)
    meta = {"config_hash": config.digest(), "version": __version__, "config": config.as_dict()}
    return Report(suite, checks, meta)


# -- serialization --------------------------------------------------------------


def _clean(obj):
    """Plain JSON types with floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    return obj


def to_json(report: Report, timings: bool = False) -> str:
    return json.dumps(_clean(report.to_dict(timings)), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


SWEEP_COLUMNS = ("epsilon", "max_gram_error", "f0_sup", "fit_slope_running")


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return f"{float(x):.12g}"


def sweep_csv(check: Check) -> str:
    """Rows per epsilon of a sweep check; the column it does not measure stays empty."""
    d = check.detail
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for i, eps in enumerate(d.get("epsilons", [])):
        gram = d["max_gram_error"][i] if "max_gram_error" in d else None
        f0v = d["f0_sup"][i] if "f0_sup" in d else None
        w.writerow([_fmt(eps), _fmt(gram), _fmt(f0v), _fmt(d["fit_slope_running"][i])])
    return buf.getvalue()


CHECK_COLUMNS = ("name", "criterion", "passed", "measured", "expected", "tolerance", "error")


def checks_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHECK_COLUMNS)
    for c in sorted(report.checks, key=lambda c: c.name):
        row = []
        for key in CHECK_COLUMNS:
            v = getattr(c, key)
            if isinstance(v, (dict, list, tuple)):
                v = json.dumps(_clean(v), sort_keys=True, separators=(",", ":"))
            elif isinstance(v, float):
                v = _fmt(v)
            elif v is None:
                v = ""
            row.append(v)
        w.writerow(row)
    return buf.getvalue()


def export(report: Report, fmt: str, path, timings: bool = False) -> list[Path]:
    """Write the report into directory ``path``; returns the files written.

    json: report.json. csv: checks.csv plus one sweep_<suite>.csv per sweep check.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt == "json":
            f = out / "report.json"
            f.write_text(to_json(report, timings), encoding="utf-8", newline="\n")
            written.append(f)
        elif fmt == "csv":
            f = out / "checks.csv"
            f.write_text(checks_csv(report), encoding="utf-8", newline="\n")
            written.append(f)
            for c in report.checks:
                if c.name.endswith("_sweep.slope") and c.detail.get("epsilons"):
                    f = out / f"sweep_{c.name.split('.')[0]}.csv"
                    f.write_text(sweep_csv(c), encoding="utf-8", newline="\n")
                    written.append(f)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise IoError(f"cannot write report to {out}: {exc.strerror}") from None
    return written


class IoError(GravikitError):
    pass
