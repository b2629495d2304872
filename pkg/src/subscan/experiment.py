"""Simulation harness: planted instances swept over signal multipliers.

Each cell of the experiment grid (size, permutation kind, multiplier,
replicate) generates a fresh planted matrix at theta = multiplier *
theta_crit and runs the configured detection procedure.  Cells derive their
seeds from the base seed and their grid position, so results are identical
for any worker count and any execution order.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

from . import _kernels
from .detect import bonferroni_net, upper_bound_single_pair
from .model import NoiseFamily, generate_instance
from .net import build_net, default_k
from .perm import MCConfig, PermutationKind
from .theory import theta_crit

__all__ = [
    "ExperimentConfig",
    "ResultRow",
    "csv_text",
    "read_rows",
    "run_experiment",
    "write_csv",
]

MODES = ("net-bonferroni", "upper-bound")

_DEFAULT_MULTIPLIERS = tuple(0.625 + 0.125 * i for i in range(8))


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulation run; JSON-serializable."""

    family: str = "gaussian"
    M: int = 200
    N: int = 100
    sizes: tuple = ((10, 15), (30, 10))
    kinds: tuple = ("unidimensional", "bidimensional")
    multipliers: tuple = _DEFAULT_MULTIPLIERS
    B: int = 500
    reps: int = 100
    k_M: int | None = None
    k_N: int | None = None
    seed: int = 0
    restarts: int = 20
    max_iters: int = 100
    mode: str = "net-bonferroni"
    share_permutations: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", NoiseFamily.parse(self.family).value)
        object.__setattr__(
            self, "sizes", tuple((int(m), int(n)) for m, n in self.sizes)
        )
        object.__setattr__(
            self, "kinds", tuple(PermutationKind.parse(k).value for k in self.kinds)
        )
        object.__setattr__(
            self, "multipliers", tuple(float(x) for x in self.multipliers)
        )
        if self.M < 1 or self.N < 1:
            raise ValueError("M and N must be positive")
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        for m, n in self.sizes:
            if not (1 <= m <= self.M and 1 <= n <= self.N):
                raise ValueError(f"size ({m}, {n}) is out of bounds")
        if not self.kinds:
            raise ValueError("kinds must be nonempty")
        if not self.multipliers:
            raise ValueError("multipliers must be nonempty")
        if any(x <= 0 for x in self.multipliers):
            raise ValueError("multipliers must be positive")
        if list(self.multipliers) != sorted(self.multipliers):
            raise ValueError("multipliers must be sorted ascending")
        if self.B < 1 or self.reps < 1:
            raise ValueError("B and reps must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")

    @property
    def effective_k(self) -> tuple[int, int]:
        kM = default_k(self.M) if self.k_M is None else int(self.k_M)
        kN = default_k(self.N) if self.k_N is None else int(self.k_N)
        return kM, kN

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("experiment config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        data = {k: tuple(map(tuple, v)) if k == "sizes" else v for k, v in data.items()}
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResultRow:
    """One detection result; the CSV schema mirrors these fields."""

    family: str
    M: int
    N: int
    m: int
    n: int
    kind: str
    multiplier: float
    theta: float
    rep: int
    B: int
    k_M: int
    k_N: int
    card_M: int
    card_N: int
    pvalue: float
    floor: float
    millis: float | None
    seed: int


_INT_COLS = {"M", "N", "m", "n", "rep", "B", "k_M", "k_N", "card_M", "card_N", "seed"}
_FLOAT_COLS = {"multiplier", "theta", "pvalue", "floor"}


def _columns(timing: bool) -> list[str]:
    cols = [f for f in ResultRow.__dataclass_fields__]
    if not timing:
        cols.remove("millis")
    return cols


def _cells(cfg: ExperimentConfig):
    for size in cfg.sizes:
        for kind in cfg.kinds:
            for multiplier in cfg.multipliers:
                for rep in range(cfg.reps):
                    yield size, kind, multiplier, rep


def _run_cell(cfg: ExperimentConfig, index: int, cell, timing: bool) -> ResultRow:
    (m, n), kind, multiplier, rep = cell
    kM, kN = cfg.effective_k
    card_M = len(build_net(cfg.M, kM))
    card_N = len(build_net(cfg.N, kN))
    cell_seed = _kernels.derive(_kernels.derive(cfg.seed, _kernels.DOM_CELL), index)
    gen_seed = _kernels.derive(cell_seed, 1)
    test_seed = _kernels.derive(cell_seed, 2)
    theta = multiplier * theta_crit(cfg.M, cfg.N, m, n)
    instance = generate_instance(cfg.M, cfg.N, m, n, theta, cfg.family, gen_seed)
    mc = MCConfig(
        B=cfg.B,
        kind=kind,
        seed=test_seed,
        restarts=cfg.restarts,
        max_iters=cfg.max_iters,
    )
    start = time.perf_counter()
    if cfg.mode == "net-bonferroni":
        outcome = bonferroni_net(
            instance.data, kM, kN, mc, share_permutations=cfg.share_permutations
        )
        pvalue = outcome.corrected_pvalue
    else:
        pvalue = upper_bound_single_pair(instance.data, m, n, kM, kN, mc)
    elapsed = (time.perf_counter() - start) * 1000.0
    factor = card_M * card_N
    return ResultRow(
        family=cfg.family,
        M=cfg.M,
        N=cfg.N,
        m=m,
        n=n,
        kind=kind,
        multiplier=multiplier,
        theta=theta,
        rep=rep,
        B=cfg.B,
        k_M=kM,
        k_N=kN,
        card_M=card_M,
        card_N=card_N,
        pvalue=pvalue,
        floor=min(factor / (cfg.B + 1), 1.0),
        millis=elapsed if timing else None,
        seed=cell_seed,
    )


def run_experiment(
    cfg: ExperimentConfig,
    out_path=None,
    workers: int = 1,
    timing: bool = True,
) -> list[ResultRow]:
    """Run every grid cell and return rows in fixed lexicographic order.

    Row order and content are independent of ``workers``; with ``timing``
    disabled the output is byte-reproducible.
    """
    workers = max(1, int(workers))
    cells = list(_cells(cfg))
    if workers == 1:
        rows = [_run_cell(cfg, i, c, timing) for i, c in enumerate(cells)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(lambda ic: _run_cell(cfg, ic[0], ic[1], timing), enumerate(cells))
            )
    if out_path is not None:
        write_csv(rows, out_path, cfg, timing=timing)
    return rows


def _format(col: str, value) -> str:
    if col in _FLOAT_COLS:
        return repr(float(value))
    if col == "millis":
        return f"{value:.3f}"
    return str(value)


def csv_text(rows, cfg: ExperimentConfig, timing: bool = True) -> str:
    """CSV body with the effective config echoed as '#' comment lines."""
    cols = _columns(timing)
    kM, kN = cfg.effective_k
    echo = cfg.to_dict()
    echo["k_M"], echo["k_N"] = kM, kN
    lines = [f"# {key} = {json.dumps(echo[key])}" for key in echo]
    lines.append(",".join(cols))
    for row in rows:
        values = {f: getattr(row, f) for f in ResultRow.__dataclass_fields__}
        lines.append(",".join(_format(c, values[c]) for c in cols))
    return "\n".join(lines) + "\n"


def write_csv(rows, path, cfg: ExperimentConfig, timing: bool = True) -> None:
    """Serialize rows to ``path``; see :func:`csv_text` for the format."""
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(rows, cfg, timing=timing))


def read_rows(path) -> tuple[dict, list[ResultRow]]:
    """Parse a results CSV back into (config echo, rows); exact round-trip."""
    echo: dict = {}
    rows: list[ResultRow] = []
    header: list[str] | None = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                try:
                    key, value = line[1:].split("=", 1)
                    echo[key.strip()] = json.loads(value.strip())
                except ValueError as exc:
                    raise ValueError(f"line {lineno}: bad config comment") from exc
                continue
            parts = line.split(",")
            if header is None:
                header = parts
                missing = set(_columns(False)) - set(header)
                if missing:
                    raise ValueError(f"line {lineno}: missing columns {sorted(missing)}")
                continue
            if len(parts) != len(header):
                raise ValueError(
                    f"line {lineno}: expected {len(header)} fields, got {len(parts)}"
                )
            record: dict = {"millis": None}
            try:
                for col, text in zip(header, parts):
                    if col in _INT_COLS:
                        record[col] = int(text)
                    elif col in _FLOAT_COLS or col == "millis":
                        record[col] = float(text)
                    else:
                        record[col] = text
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from exc
            rows.append(ResultRow(**record))
    if header is None:
        raise ValueError("no header row found")
    return echo, rows
