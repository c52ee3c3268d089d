"""
Main orchestration logic for eigenvalue sweeps.

Validates a grid file, reuses cached points, solves the rest (optionally in
parallel) and returns records in grid order regardless of completion order.
"""

import csv
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple

from rich.console import Console
from rich.panel import Panel
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from .fingerprint import generate_fingerprint
from .schrodinger_solver import EigenResult, UnsupportedParameterError, asymptotic_E, solve_E
from .state_manager import SweepStore
from .utils import (
    compute_file_hash,
    format_duration,
    generate_run_id,
    parse_rational,
    render_decimal,
    render_rational,
)
from .validator import validate_grid_file, validate_result_records

logger = logging.getLogger(__name__)

CSV_HEADER = ["p", "B", "N", "E_rational", "E_decimal", "asymptotic", "scaled_error"]


@dataclass(frozen=True, order=True)
class GridPoint:
    """One (B, p, N) point; ordering is the output order."""

    B: Fraction
    p: int
    N: int


@dataclass(frozen=True)
class SweepSettings:
    """Solver settings shared by every point of a sweep."""

    tol: Fraction
    bracket: Optional[Tuple[Fraction, Fraction]] = None
    scan_points: int = 0


def build_grid(data: Dict[str, Any], default_truncation: int) -> List[GridPoint]:
    """
    Expand a validated grid file into sorted grid points.

    Args:
        data: Validated grid data
        default_truncation: N used when the file lists no truncations

    Returns:
        Grid points sorted by (B, p, N)
    """
    couplings = [parse_rational(b) for b in data["couplings"]]
    truncations = data.get("truncations") or [default_truncation]
    return sorted(
        GridPoint(B, p, N) for B in couplings for p in data["primes"] for N in truncations
    )


def build_settings(data: Dict[str, Any], config: Dict[str, Any]) -> SweepSettings:
    """Sweep settings from the grid file, falling back to configuration."""
    bracket = None
    if "bracket" in data:
        bracket = (parse_rational(data["bracket"]["lo"]), parse_rational(data["bracket"]["hi"]))
    return SweepSettings(
        tol=parse_rational(data.get("tolerance", config["solve_tolerance"])),
        bracket=bracket,
        scan_points=data.get("scan_points", config["scan_points"]),
    )


def solve_point(point: GridPoint, settings: SweepSettings) -> EigenResult:
    """Solve one grid point; module level so worker processes can run it."""
    return solve_E(
        point.p,
        point.B,
        bracket=settings.bracket,
        tol=settings.tol,
        N=point.N,
        scan_points=settings.scan_points,
    )


def point_fingerprint(point: GridPoint, settings: SweepSettings) -> str:
    return generate_fingerprint(
        point.p, point.B, point.N, settings.tol, settings.bracket, settings.scan_points
    )


def stored_columns(result: EigenResult, settings: SweepSettings) -> Dict[str, Any]:
    """Database columns for a solved point; the residual is stored as a decimal."""
    return {
        "p": result.p,
        "B": render_rational(result.B),
        "N": result.truncation,
        "tol": render_rational(settings.tol),
        "E": render_rational(result.E),
        "bracket_lo": render_rational(result.bracket[0]),
        "bracket_hi": render_rational(result.bracket[1]),
        "initial_lo": render_rational(result.initial_bracket[0]),
        "initial_hi": render_rational(result.initial_bracket[1]),
        "residual": render_decimal(result.determinant_residual),
        "iterations": result.iterations,
    }


def result_from_row(row: Dict[str, Any]) -> EigenResult:
    """Rebuild an EigenResult from a stored point."""
    p, B = row["p"], Fraction(row["B"])
    try:
        asymptotic: Optional[Fraction] = asymptotic_E(p, B)
    except UnsupportedParameterError:
        asymptotic = None
    return EigenResult(
        p=p,
        B=B,
        E=Fraction(row["E"]),
        bracket=(Fraction(row["bracket_lo"]), Fraction(row["bracket_hi"])),
        initial_bracket=(Fraction(row["initial_lo"]), Fraction(row["initial_hi"])),
        determinant_residual=Fraction(row["residual"]),
        truncation=row["N"],
        asymptotic=asymptotic,
        iterations=row["iterations"],
    )


def result_record(result: EigenResult, cached: bool = False) -> Dict[str, Any]:
    """
    JSON record for one solved point.

    Rationals are "a/b" strings and authoritative; *_decimal fields carry 15
    significant digits.
    """
    scaled = result.scaled_error
    return {
        "p": result.p,
        "B": render_rational(result.B),
        "N": result.truncation,
        "E_rational": render_rational(result.E),
        "E_decimal": render_decimal(result.E),
        "asymptotic": None if result.asymptotic is None else render_rational(result.asymptotic),
        "scaled_error": None if scaled is None else render_decimal(scaled),
        "residual": render_decimal(result.determinant_residual),
        "iterations": result.iterations,
        "bracket": [render_rational(result.bracket[0]), render_rational(result.bracket[1])],
        "cached": cached,
    }


def write_csv(records: List[Dict[str, Any]], handle: TextIO) -> None:
    """Write records as CSV with the fixed header; None becomes an empty cell."""
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(["" if record[key] is None else record[key] for key in CSV_HEADER])


def write_json(records: List[Dict[str, Any]], handle: TextIO) -> None:
    handle.write(json.dumps(records, separators=(",", ":")))
    handle.write("\n")


def display_summary_panel(stats: Dict[str, Any], console: Console) -> None:
    """
    Display a summary panel with sweep statistics.

    Args:
        stats: Dictionary with statistics
        console: Console to print on
    """
    content = []

    if "solved" in stats:
        content.append(f"[green]✓[/green] Solved: {stats['solved']}")
    if "reused" in stats:
        content.append(f"[yellow]⚠[/yellow] Reused from cache: {stats['reused']}")
    if "duration" in stats:
        content.append(f"[cyan]⏱[/cyan] Duration: {stats['duration']}")

    panel = Panel(
        "\n".join(content),
        title="Sweep Summary",
        border_style="bright_blue",
    )

    console.print(panel)


class SweepRunner:
    """Main orchestrator for solving a grid of eigenvalue problems."""

    def __init__(
        self,
        grid_file: Path,
        state_db_path: Path,
        config: Dict[str, Any],
        force: bool = False,
        workers: Optional[int] = None,
        console: Optional[Console] = None,
    ):
        """
        Initialize sweep runner.

        Args:
            grid_file: Path to grid JSON file
            state_db_path: Path to SQLite database
            config: Configuration dictionary
            force: If True, re-solve points that are already cached
            workers: Worker processes (default: config "workers")
            console: Console for progress and summary (default: stderr)
        """
        self.grid_file = grid_file
        self.state_db_path = state_db_path
        self.config = config
        self.force = force
        self.workers = workers if workers is not None else config.get("workers", 1)
        self.console = console or Console(stderr=True)

        self.stats: Dict[str, Any] = {"solved": 0, "reused": 0}

        self.data: Optional[Dict[str, Any]] = None
        self.settings: Optional[SweepSettings] = None
        self.points: List[GridPoint] = []
        self.store: Optional[SweepStore] = None
        self.run_id: Optional[str] = None

    def run(self) -> List[Dict[str, Any]]:
        """
        Main execution flow.

        Returns:
            Result records sorted by (B, p, N)

        Raises:
            ValidationError: If the grid file is invalid
            BracketError, DomainError, DivergenceError: From the first failing point;
                the run is recorded as failed
        """
        start_time = time.time()

        self.data = validate_grid_file(self.grid_file)
        self.settings = build_settings(self.data, self.config)
        self.points = build_grid(self.data, self.config["truncation"])
        logger.info("sweep of %d grid points from %s", len(self.points), self.grid_file)

        self.store = SweepStore(self.state_db_path)
        self.run_id = generate_run_id()
        try:
            self.store.create_run(
                self.run_id,
                str(self.grid_file),
                compute_file_hash(self.grid_file),
                len(self.points),
            )
            results = self._solve_all()
            self.store.mark_run_complete(self.run_id, "completed")
        except Exception:
            logger.exception("sweep run %s failed", self.run_id)
            self.store.mark_run_complete(self.run_id, "failed")
            raise
        finally:
            self.store.close()

        self.stats["duration"] = format_duration(time.time() - start_time)
        display_summary_panel(self.stats, self.console)

        records = [result_record(result, cached) for result, cached in results]
        validate_result_records(records)
        return records

    def _solve_all(self) -> List[Tuple[EigenResult, bool]]:
        """Solve every grid point that is not cached, in parallel when configured."""
        results: Dict[GridPoint, Tuple[EigenResult, bool]] = {}
        pending: List[Tuple[GridPoint, str]] = []

        for point in self.points:
            fingerprint = point_fingerprint(point, self.settings)
            row = None if self.force else self.store.find_point(fingerprint)
            if row:
                logger.info("reusing cached point p=%d B=%s N=%d", point.p, point.B, point.N)
                results[point] = (result_from_row(row), True)
                self.stats["reused"] += 1
            else:
                pending.append((point, fingerprint))

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=self.console,
            disable=not self.console.is_terminal,
        ) as progress:
            task = progress.add_task("Solving grid points...", total=len(pending))

            if self.workers > 1 and len(pending) > 1:
                with ProcessPoolExecutor(max_workers=self.workers) as pool:
                    futures = {
                        pool.submit(solve_point, point, self.settings): (point, fingerprint)
                        for point, fingerprint in pending
                    }
                    for future in as_completed(futures):
                        point, fingerprint = futures[future]
                        self._record(point, fingerprint, future.result(), results)
                        progress.advance(task)
            else:
                for point, fingerprint in pending:
                    description = f"Solving p={point.p} B={point.B} N={point.N}"
                    progress.update(task, description=description)
                    self._record(point, fingerprint, solve_point(point, self.settings), results)
                    progress.advance(task)

        return [results[point] for point in sorted(results)]

    def _record(
        self,
        point: GridPoint,
        fingerprint: str,
        result: EigenResult,
        results: Dict[GridPoint, Tuple[EigenResult, bool]],
    ) -> None:
        self.store.record_point(fingerprint, self.run_id, stored_columns(result, self.settings))
        results[point] = (result, False)
        self.stats["solved"] += 1
