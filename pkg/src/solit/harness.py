"""Monte Carlo experiment runner, rate fitting and results serialization.

For every noise level the runner builds the candidate grid and thresholds
once, computes the deterministic tables (pairwise biases and variances, the
oracle index and the oracle-inequality constants), then replays seeded
realizations: each run evaluates all candidate estimators, the empirical
pairwise-distance table, and every requested selector's squared error.
Everything is reproducible from the master seed.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .candidates import CandidateGrid, build_grid, weak_variance_u
from .errors import InvalidParameterError
from .filters import FilterSpec, filter_weight
from .selectors import (
    build_thresholds,
    lepskii_select,
    noise_level_select,
    optimal_select,
    oracle_constants,
    oracle_select,
    price_of_adaptation,
    solit_select,
)
from .sequence_model import SpectralProblem, simulate_data
from .testproblems import get_problem

SELECTOR_NAMES = ("solit", "lepskii", "oracle", "optimal", "noise-level")


@dataclass
class ExperimentConfig:
    problem: str
    filter_kind: str
    selectors: tuple[str, ...] = SELECTOR_NAMES
    theta: float = 2.0
    beta: float = 1.0
    gamma: float = 1.0
    sigma_start: float = 3e-2
    sigma_stop: float = 1e-5
    sigma_count: int = 8
    runs: int = 200
    seed: int = 42
    kappa_tune: float = 1.0
    problem_params: dict = field(default_factory=dict)
    landweber_step: float | None = None
    noise_free: bool = False

    def __post_init__(self):
        self.selectors = tuple(self.selectors)
        unknown = set(self.selectors) - set(SELECTOR_NAMES)
        if unknown:
            raise InvalidParameterError(f"unknown selectors: {sorted(unknown)}")
        if self.runs < 1:
            raise InvalidParameterError("at least one Monte Carlo run is required")
        if not (0 < self.sigma_stop < self.sigma_start):
            raise InvalidParameterError("need sigma_start > sigma_stop > 0")
        if self.sigma_count < 1:
            raise InvalidParameterError("sigma_count must be positive")

    def sigma_grid(self) -> np.ndarray:
        """Strictly decreasing geometric noise-level grid."""
        if self.sigma_count == 1:
            return np.asarray([self.sigma_start])
        return np.geomspace(self.sigma_start, self.sigma_stop, self.sigma_count)


@dataclass
class SelectorSummary:
    mse: float
    stderr: float
    histogram: np.ndarray  # counts of selected indices, length m_max + 1


@dataclass
class SigmaCell:
    sigma: float
    grid: CandidateGrid
    m_star: int
    r_mstar: float
    c1: float
    c2: float
    poa: float
    selectors: dict[str, SelectorSummary]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list[SigmaCell]


def _run_seed(master: int, sigma_index: int, run_index: int) -> int:
    ss = np.random.SeedSequence((master, sigma_index, run_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _pairwise_distance_table(rows: np.ndarray) -> np.ndarray:
    """Full symmetric table of Euclidean distances between matrix rows.

    Differences are formed directly (no Gram shortcut): distances far below
    the row norms would otherwise drown in cancellation.
    """
    diff = rows[:, None, :] - rows[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def deterministic_tables(
    problem: SpectralProblem, spec: FilterSpec, grid: CandidateGrid
) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free pairwise bias table and pairwise variance table for a grid.

    Biases are distances between mean estimators (built from the exact data);
    variances are sigma^2 sum lam (q_a - q_b)^2, assembled from the same
    weight rows used by the estimators.
    """
    lam = problem.eigenvalues
    w_rows = np.vstack(
        [filter_weight(spec, a, lam) * np.sqrt(lam) for a in grid.alphas]
    )
    mean_rows = w_rows * problem.data_truth
    b_table = _pairwise_distance_table(mean_rows)
    v_table = (grid.sigma * _pairwise_distance_table(w_rows)) ** 2
    return b_table, v_table


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run the full Monte Carlo sweep described by ``config``."""
    problem = get_problem(config.problem, **config.problem_params)
    step = config.landweber_step
    if config.filter_kind == "landweber" and step is None:
        step = 1.0 / float(problem.eigenvalues[0])
    spec = FilterSpec.from_name(config.filter_kind, landweber_step=step)

    cells: list[SigmaCell] = []
    for si, sigma in enumerate(config.sigma_grid()):
        sigma = float(sigma)
        grid = build_grid(problem, spec, sigma, config.theta)
        thresholds = build_thresholds(problem, spec, grid, config.beta, config.gamma)
        mm = grid.m_max
        lam = problem.eigenvalues
        w_rows = np.vstack(
            [filter_weight(spec, a, lam) * np.sqrt(lam) for a in grid.alphas]
        )
        b_table, v_table = deterministic_tables(problem, spec, grid)
        m_star = oracle_select(b_table, v_table, config.beta)
        u_star = weak_variance_u(problem, spec, grid.alphas[m_star], sigma)
        c1, c2 = oracle_constants(grid, m_star, u_star, config.beta, config.gamma)
        fixed_choices = {
            "oracle": m_star,
            "noise-level": noise_level_select(grid, sigma),
        }

        truth = problem.truth
        sq_errors = {name: np.empty(config.runs) for name in config.selectors}
        histograms = {name: np.zeros(mm + 1, dtype=int) for name in config.selectors}
        r_runs = np.empty(config.runs)
        for r in range(config.runs):
            try:
                if config.noise_free:
                    y = problem.data_truth
                else:
                    y = simulate_data(problem, sigma, _run_seed(config.seed, si, r)).y
                f_rows = w_rows * y
                bhat = _pairwise_distance_table(f_rows)
                diff = f_rows - truth
                err_sq = np.einsum("ij,ij->i", diff, diff)
                for name in config.selectors:
                    if name == "solit":
                        idx = solit_select(bhat, thresholds)
                    elif name == "lepskii":
                        idx = lepskii_select(bhat, grid, sigma, config.kappa_tune)
                    elif name == "optimal":
                        idx = optimal_select(err_sq)
                    else:
                        idx = fixed_choices[name]
                    sq_errors[name][r] = err_sq[idx]
                    histograms[name][idx] += 1
                r_runs[r] = err_sq[m_star]
            except FloatingPointError as exc:  # pragma: no cover
                raise RuntimeError(
                    f"numeric failure in run {r} at sigma index {si} (sigma={sigma:g})"
                ) from exc

        summaries = {}
        for name in config.selectors:
            vals = sq_errors[name]
            mse = math.fsum(vals) / config.runs
            stderr = (
                float(np.std(vals, ddof=1) / math.sqrt(config.runs))
                if config.runs > 1
                else 0.0
            )
            summaries[name] = SelectorSummary(
                mse=mse, stderr=stderr, histogram=histograms[name]
            )
        r_mstar = math.fsum(r_runs) / config.runs
        cells.append(
            SigmaCell(
                sigma=sigma,
                grid=grid,
                m_star=int(m_star),
                r_mstar=r_mstar,
                c1=c1,
                c2=c2,
                poa=price_of_adaptation(r_mstar, c2),
                selectors=summaries,
            )
        )
    return ExperimentResult(config=config, cells=cells)


def fit_rate(sigmas, mses, model: str) -> tuple[float, float]:
    """Least-squares slope and intercept of log MSE against log sigma
    ("poly") or against log(-log sigma) ("log")."""
    s = np.asarray(sigmas, dtype=float)
    m = np.asarray(mses, dtype=float)
    if s.size != m.size or s.size < 3:
        raise InvalidParameterError("rate fits need at least 3 matching points")
    if np.any(s <= 0) or np.any(m <= 0):
        raise InvalidParameterError("rate fits need positive sigmas and MSEs")
    if model == "poly":
        x = np.log(s)
    elif model == "log":
        if np.any(s >= 1):
            raise InvalidParameterError("log-model fits need sigma < 1")
        x = np.log(-np.log(s))
    else:
        raise InvalidParameterError(f"unknown rate model {model!r}")
    slope, intercept = np.polyfit(x, np.log(m), 1)
    return float(slope), float(intercept)


@dataclass(frozen=True)
class OracleInequalityRow:
    sigma: float
    mse_solit: float
    bound: float
    margin: float

    @property
    def ok(self) -> bool:
        return self.margin >= 0.0


@dataclass(frozen=True)
class OracleInequalityReport:
    rows: tuple[OracleInequalityRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.ok for row in self.rows)


def verify_oracle_inequality(result: ExperimentResult) -> OracleInequalityReport:
    """Check MSE(solit) <= C1 R_{m*} + (sqrt(R_{m*}) + C2)^2 per noise level,
    with 3 combined standard errors of Monte Carlo slack."""
    rows = []
    for cell in result.cells:
        if "solit" not in cell.selectors or "oracle" not in cell.selectors:
            raise InvalidParameterError(
                "oracle-inequality verification needs both solit and oracle rows"
            )
        sol = cell.selectors["solit"]
        orc = cell.selectors["oracle"]
        slack = 3.0 * math.sqrt(sol.stderr**2 + orc.stderr**2)
        bound = cell.c1 * cell.r_mstar + price_of_adaptation(cell.r_mstar, cell.c2) + slack
        rows.append(
            OracleInequalityRow(
                sigma=cell.sigma, mse_solit=sol.mse, bound=bound, margin=bound - sol.mse
            )
        )
    return OracleInequalityReport(rows=tuple(rows))


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------

RESULTS_HEADER = ["sigma", "selector", "mse", "stderr", "m_star", "R_mstar", "C1", "C2", "poa"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_results(result: ExperimentResult, path: str) -> None:
    """Write results.csv, one grid_XYZ.csv per noise level, selections.csv
    with the selected-index histograms, and meta.json echoing the config."""
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, "results.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for cell in result.cells:
            for name in result.config.selectors:
                s = cell.selectors[name]
                writer.writerow(
                    [
                        _fmt(cell.sigma),
                        name,
                        _fmt(s.mse),
                        _fmt(s.stderr),
                        cell.m_star,
                        _fmt(cell.r_mstar),
                        _fmt(cell.c1),
                        _fmt(cell.c2),
                        _fmt(cell.poa),
                    ]
                )
    for i, cell in enumerate(result.cells):
        with open(os.path.join(path, f"grid_{i:03d}.csv"), "w") as fh:
            fh.write(cell.grid.to_csv())
    with open(os.path.join(path, "selections.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sigma", "selector", "index", "count"])
        for cell in result.cells:
            for name in result.config.selectors:
                hist = cell.selectors[name].histogram
                for idx in np.nonzero(hist)[0]:
                    writer.writerow([_fmt(cell.sigma), name, int(idx), int(hist[idx])])
    meta = {
        "config": asdict(result.config),
        "seed": result.config.seed,
        "sigmas": [cell.sigma for cell in result.cells],
        "grids": [
            {
                "sigma": cell.grid.sigma,
                "theta1": cell.grid.theta1,
                "theta2": cell.grid.theta2,
                "theta2_requested": cell.grid.theta2_requested,
                "theta2_enlarged": cell.grid.theta2_enlarged,
                "truncation_tail_ratio": cell.grid.truncation_tail_ratio,
            }
            for cell in result.cells
        ],
    }
    with open(os.path.join(path, "meta.json"), "w") as fh:
        json.dump(meta, fh, indent=2, allow_nan=True)


def read_results(path: str) -> ExperimentResult:
    """Reconstruct an ExperimentResult from a directory written by
    ``write_results``."""
    with open(os.path.join(path, "meta.json")) as fh:
        meta = json.load(fh)
    cfg_dict = dict(meta["config"])
    cfg_dict["selectors"] = tuple(cfg_dict["selectors"])
    config = ExperimentConfig(**cfg_dict)

    grids = []
    for i, ginfo in enumerate(meta["grids"]):
        alphas, vs = [], []
        with open(os.path.join(path, f"grid_{i:03d}.csv")) as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                alphas.append(float(row["alpha"]))
                vs.append(float(row["v_m"]))
        grids.append(
            CandidateGrid(
                alphas=np.asarray(alphas),
                v=np.asarray(vs),
                theta1=ginfo["theta1"],
                theta2=ginfo["theta2"],
                sigma=ginfo["sigma"],
                theta2_requested=ginfo["theta2_requested"],
                theta2_enlarged=ginfo["theta2_enlarged"],
                truncation_tail_ratio=(
                    float("nan")
                    if ginfo["truncation_tail_ratio"] is None
                    else ginfo["truncation_tail_ratio"]
                ),
            )
        )

    per_sigma: dict[float, dict] = {}
    order: list[float] = []
    with open(os.path.join(path, "results.csv")) as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            sig = float(row["sigma"])
            if sig not in per_sigma:
                per_sigma[sig] = {
                    "m_star": int(row["m_star"]),
                    "r_mstar": float(row["R_mstar"]),
                    "c1": float(row["C1"]),
                    "c2": float(row["C2"]),
                    "poa": float(row["poa"]),
                    "selectors": {},
                }
                order.append(sig)
            per_sigma[sig]["selectors"][row["selector"]] = SelectorSummary(
                mse=float(row["mse"]), stderr=float(row["stderr"]), histogram=None
            )
    with open(os.path.join(path, "selections.csv")) as fh:
        reader = csv.DictReader(fh)
        hist_rows = [(float(r["sigma"]), r["selector"], int(r["index"]), int(r["count"])) for r in reader]

    cells = []
    for i, sig in enumerate(order):
        info = per_sigma[sig]
        grid = grids[i]
        for name, summary in info["selectors"].items():
            hist = np.zeros(grid.m_max + 1, dtype=int)
            for hsig, hname, idx, count in hist_rows:
                if hsig == sig and hname == name:
                    hist[idx] = count
            summary.histogram = hist
        cells.append(
            SigmaCell(
                sigma=sig,
                grid=grid,
                m_star=info["m_star"],
                r_mstar=info["r_mstar"],
                c1=info["c1"],
                c2=info["c2"],
                poa=info["poa"],
                selectors=info["selectors"],
            )
        )
    return ExperimentResult(config=config, cells=cells)
