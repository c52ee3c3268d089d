"""
Command-line interface using Click.

Exposes expansions, Haar integrals, the Vladimirov operator and the eigenvalue
solver. Results go to stdout as compact JSON (or CSV for sweeps); messages,
progress and logs go to stderr.

Exit codes: 0 success, 1 usage/parse/validation, 2 domain or resonance,
3 divergence, 4 bracket failure.
"""

import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import click
from rich.console import Console
from rich.table import Table

from . import __version__
from .haar_measure import (
    DivergenceError,
    RadialFunction,
    ShellRegion,
    ball_measure,
    integrate_radial,
    moment_complement,
    moment_zp,
    shell_measure,
)
from .padic_core import (
    INFINITE_VALUATION,
    ArgumentError,
    DomainError,
    expand_rational,
    is_p_integer,
    padic_norm,
    valuation,
)
from .schrodinger_solver import (
    DEFAULT_TRUNCATION,
    BracketError,
    StructuralError,
    naive_partial_sums,
    naive_series,
    relative_residual,
    solve_E,
    solve_table,
)
from .state_manager import SweepStore
from .sweep import SweepRunner, result_record, write_csv, write_json
from .utils import load_config, parse_rational, render_decimal, render_rational, setup_logging
from .validator import ValidationError
from .vladimirov_operator import (
    BasisKind,
    BasisTerm,
    d_alpha_monomial,
    d_alpha_oracle,
    semigroup_check,
)

EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_DIVERGENCE = 3
EXIT_BRACKET = 4

console = Console(stderr=True)


class RationalType(click.ParamType):
    """Exact rational from "a/b", an integer or a finite decimal."""

    name = "rational"

    def convert(
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Fraction:
        if isinstance(value, Fraction):
            return value
        try:
            return parse_rational(value)
        except ValueError as e:
            self.fail(str(e), param, ctx)


RATIONAL = RationalType()


def _fail(message: str, code: int) -> None:
    console.print(f"[red]✗[/red] {message}")
    sys.exit(code)


class PAdicGroup(click.Group):
    """Click group that maps package errors and usage errors to exit codes."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except ValidationError as e:
            _fail(f"Validation failed: {e}", EXIT_USAGE)
        except ArgumentError as e:
            _fail(f"Invalid argument: {e}", EXIT_USAGE)
        except BracketError as e:
            _fail(f"Bracket error: {e}", EXIT_BRACKET)
        except DivergenceError as e:
            _fail(f"Divergence: {e}", EXIT_DIVERGENCE)
        except (DomainError, StructuralError) as e:
            _fail(f"Domain error: {e}", EXIT_DOMAIN)

    def main(self, *args: Any, **kwargs: Any) -> Any:
        kwargs["standalone_mode"] = False
        try:
            return super().main(*args, **kwargs)
        except click.ClickException as e:
            e.show()
            sys.exit(EXIT_USAGE)
        except click.exceptions.Abort:
            console.print("Aborted!")
            sys.exit(EXIT_USAGE)


def _emit(payload: Any) -> None:
    click.echo(json.dumps(payload, separators=(",", ":")))


def _value_fields(value: Fraction, prefix: str = "value") -> Dict[str, str]:
    return {
        f"{prefix}_rational": render_rational(value),
        f"{prefix}_decimal": render_decimal(value),
    }


@click.group(cls=PAdicGroup)
@click.version_option(version=__version__)
@click.option(
    "--config",
    "-c",
    "config_file",
    type=click.Path(path_type=Path),
    default="config.json",
    help="Path to configuration file (default: config.json)",
)
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="Logging level (default: from configuration, WARNING)",
)
@click.pass_context
def main(ctx: click.Context, config_file: Path, log_level: Optional[str]) -> None:
    """
    p-adic analysis toolkit.

    Exact p-adic expansions, Haar integrals of radial functions, the
    Vladimirov derivative and the ground state of D²Ψ + B|x|²Ψ = EΨ.
    """
    config = load_config(config_file)

    if log_level:
        config["log_level"] = log_level

    log_file = None
    if config.get("log_directory"):
        log_file = Path(config["log_directory"]) / "padic-schrodinger.log"

    setup_logging(
        log_level=config["log_level"],
        log_file=log_file,
        enable_color=config["enable_color"],
    )

    # exact rationals at N = 60 run to tens of thousands of digits
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)

    ctx.obj = config


@main.command()
@click.argument("q", type=RATIONAL)
@click.option("--p", "p", type=int, required=True, help="Prime")
@click.option("--digits", "-n", type=int, default=10, show_default=True, help="Number of digits")
def expand(q: Fraction, p: int, digits: int) -> None:
    """
    Print the first digits of the p-adic expansion of a rational.

    Examples:
        padic-schrodinger expand 4/3 --p 5 --digits 3
        padic-schrodinger expand 0 --p 5
    """
    approx = expand_rational(q, p, digits)
    if approx.is_zero:
        _emit({"zero": True})
        return
    _emit({"valuation": approx.valuation, "digits": list(approx.digits)})


@main.command()
@click.argument("q", type=RATIONAL)
@click.option("--p", "p", type=int, required=True, help="Prime")
def norm(q: Fraction, p: int) -> None:
    """
    Print the valuation, p-adic norm and integrality of a rational.

    Examples:
        padic-schrodinger norm 1919/810 --p 5
    """
    v = valuation(q, p)
    _emit(
        {
            "valuation": None if v == INFINITE_VALUATION else int(v),
            "norm": render_rational(padic_norm(q, p)),
            "integral": is_p_integer(q, p),
        }
    )


@main.command()
@click.option("--p", "p", type=int, required=True, help="Prime")
@click.option("--moment-zp", "zp_exponent", type=int, help="∫_{Z_p} |x|^s dx for this s")
@click.option(
    "--moment-complement",
    "complement_exponent",
    type=int,
    help="∫_{Q_p \\ Z_p} |x|^s dx for this s",
)
@click.option("--ball", type=int, help="Measure of the ball p^m Z_p for this m")
@click.option("--shell", type=int, help="Measure of the shell |x| = p^γ for this γ")
@click.option("--oracle-power", type=int, help="Sum ∫ |x|^s dx shell by shell for this s")
@click.option(
    "--over",
    type=click.Choice(["zp", "complement", "whole"]),
    default="zp",
    show_default=True,
    help="Region for --oracle-power",
)
@click.option("--tail-tol", type=RATIONAL, default=None, help="Tail tolerance for --oracle-power")
@click.pass_obj
def integrate(
    config: Dict[str, Any],
    p: int,
    zp_exponent: Optional[int],
    complement_exponent: Optional[int],
    ball: Optional[int],
    shell: Optional[int],
    oracle_power: Optional[int],
    over: str,
    tail_tol: Optional[Fraction],
) -> None:
    """
    Evaluate a Haar integral exactly.

    Examples:
        padic-schrodinger integrate --p 5 --moment-zp 2
        padic-schrodinger integrate --p 5 --ball 0
        padic-schrodinger integrate --p 2 --shell -1
        padic-schrodinger integrate --p 5 --oracle-power 2 --over zp
    """
    chosen = {
        name: value
        for name, value in (
            ("moment_zp", zp_exponent),
            ("moment_complement", complement_exponent),
            ("ball", ball),
            ("shell", shell),
            ("oracle_power", oracle_power),
        )
        if value is not None
    }
    if len(chosen) != 1:
        raise click.UsageError(
            "give exactly one of --moment-zp, --moment-complement, --ball, --shell, --oracle-power"
        )
    mode, parameter = next(iter(chosen.items()))

    if mode == "oracle_power":
        region = {
            "zp": ShellRegion.integers(),
            "complement": ShellRegion.complement(),
            "whole": ShellRegion.whole(),
        }[over]
        tol = tail_tol if tail_tol is not None else parse_rational(config["tail_tolerance"])
        result = integrate_radial(
            p,
            RadialFunction.power(p, parameter),
            region,
            tail_tol=tol,
            window=config["divergence_window"],
            max_terms=config["max_shell_terms"],
        )
        _emit(
            {
                **_value_fields(result.value),
                "terms": result.terms,
                "tail_bound": render_decimal(result.tail_bound),
            }
        )
        return

    exact = {
        "moment_zp": moment_zp,
        "moment_complement": moment_complement,
        "ball": ball_measure,
        "shell": shell_measure,
    }[mode](p, parameter)
    _emit(_value_fields(exact))


def _terms_json(
    terms: Optional[Tuple[Tuple[int, Fraction], ...]]
) -> Optional[List[Dict[str, Any]]]:
    if terms is None:
        return None
    return [{"exponent": e, "coefficient": render_rational(c)} for e, c in terms]


@main.command()
@click.option("--p", "p", type=int, required=True, help="Prime")
@click.option("--alpha", type=int, default=2, show_default=True, help="Order of D^α")
@click.option("--monomial", type=int, help="|x|^n on all of Q_p")
@click.option("--f", "f_index", type=int, help="f_n: |x|^n on Z_p, 0 elsewhere")
@click.option("--g", "g_index", type=int, help="g_n: |x|^n off Z_p, 0 on Z_p")
@click.option("--at-shell", type=int, default=None, help="Evaluate on the shell |x| = p^t")
@click.option(
    "--verify", is_flag=True, help="Compare with the defining integral (needs --at-shell)"
)
@click.pass_obj
def dalpha(
    config: Dict[str, Any],
    p: int,
    alpha: int,
    monomial: Optional[int],
    f_index: Optional[int],
    g_index: Optional[int],
    at_shell: Optional[int],
    verify: bool,
) -> None:
    """
    Print D^α of a basis function in closed form.

    Examples:
        padic-schrodinger dalpha --p 5 --alpha 2 --f 0 --at-shell 0 --verify
        padic-schrodinger dalpha --p 7 --alpha 2 --monomial 5
        padic-schrodinger dalpha --p 5 --alpha 2 --g -5
    """
    chosen = [
        (kind, n)
        for kind, n in (
            (BasisKind.MONOMIAL, monomial),
            (BasisKind.F_INSIDE, f_index),
            (BasisKind.G_OUTSIDE, g_index),
        )
        if n is not None
    ]
    if len(chosen) != 1:
        raise click.UsageError("give exactly one of --monomial, --f, --g")
    if verify and at_shell is None:
        raise click.UsageError("--verify needs --at-shell")
    kind, n = chosen[0]
    term = BasisTerm(kind, n)

    payload: Dict[str, Any] = {"kind": kind.value, "n": n, "alpha": alpha}
    if kind is BasisKind.MONOMIAL:
        coefficient, exponent = d_alpha_monomial(p, alpha, n)
        payload.update({"coefficient": render_rational(coefficient), "exponent": exponent})
    closed = term.d_alpha(p, alpha)
    if kind is not BasisKind.MONOMIAL:
        payload.update(
            {
                "inside": _terms_json(closed.inside),
                "outside": _terms_json(closed.outside),
                "analytically_continued": closed.analytically_continued,
            }
        )

    if at_shell is not None:
        value = closed.evaluate(at_shell)
        payload.update(_value_fields(value))
        if verify:
            oracle = d_alpha_oracle(
                p,
                alpha,
                term.radial(p),
                at_shell,
                tail_tol=parse_rational(config["tail_tolerance"]),
                window=config["divergence_window"],
                max_terms=config["max_shell_terms"],
            )
            payload.update(_value_fields(oracle.value, "oracle"))
            payload["tail_bound"] = render_decimal(oracle.tail_bound)
            payload["match"] = abs(value - oracle.value) <= oracle.tail_bound

    _emit(payload)


@main.command()
@click.option("--p", "p", type=int, required=True, help="Prime")
@click.option("--alpha", type=int, required=True, help="Outer order α")
@click.option("--beta", type=int, required=True, help="Inner order β")
@click.option("--n", "n", type=int, required=True, help="Monomial exponent")
def semigroup(p: int, alpha: int, beta: int, n: int) -> None:
    """
    Check D^α D^β |x|^n = D^(α+β) |x|^n exactly.

    Examples:
        padic-schrodinger semigroup --p 5 --alpha 1 --beta 1 --n 4
    """
    _emit({"holds": semigroup_check(p, alpha, beta, n)})


@main.command()
@click.option("--p", "p", type=int, required=True, help="Prime")
@click.option("--B", "B", type=RATIONAL, required=True, help="Potential coupling")
@click.option("--N", "N", type=int, default=None, help="Truncation depth (default: configuration)")
@click.option(
    "--tol", type=RATIONAL, default=None, help="Bisection tolerance (default: configuration)"
)
@click.option("--lo", type=RATIONAL, default=None, help="Bracket lower end")
@click.option("--hi", type=RATIONAL, default=None, help="Bracket upper end")
@click.option(
    "--scan-points", type=int, default=None, help="Scan the bracket in this many pieces first"
)
@click.option(
    "--check-residual",
    is_flag=True,
    help="Also report the relative residual of the equation on shells -2..2",
)
@click.pass_obj
def solve(
    config: Dict[str, Any],
    p: int,
    B: Fraction,
    N: Optional[int],
    tol: Optional[Fraction],
    lo: Optional[Fraction],
    hi: Optional[Fraction],
    scan_points: Optional[int],
    check_residual: bool,
) -> None:
    """
    Solve the determinant condition for the ground-state energy E.

    Examples:
        padic-schrodinger solve --p 101 --B 1 --N 60 --tol 1e-12
        padic-schrodinger solve --p 101 --B -1 --scan-points 20
        padic-schrodinger solve --p 53 --B 2 --lo 1 --hi 3
    """
    if (lo is None) != (hi is None):
        raise click.UsageError("give both --lo and --hi, or neither")
    bracket = None if lo is None else (lo, hi)
    result = solve_E(
        p,
        B,
        bracket=bracket,
        tol=tol if tol is not None else parse_rational(config["solve_tolerance"]),
        N=N if N is not None else config.get("truncation", DEFAULT_TRUNCATION),
        scan_points=scan_points if scan_points is not None else config["scan_points"],
    )

    record = result_record(result)
    record.pop("cached")
    record["truncation"] = record.pop("N")
    if result.candidate_brackets:
        record["candidate_brackets"] = [
            [render_rational(a), render_rational(b)] for a, b in result.candidate_brackets
        ]
    if check_residual:
        params = result.params
        table = solve_table(result)
        record["relative_residuals"] = {
            str(t): render_decimal(relative_residual(params, table, t)) for t in range(-2, 3)
        }
    _emit(record)


@main.command()
@click.option("--p", "p", type=int, required=True, help="Prime")
@click.option("--B", "B", type=RATIONAL, required=True, help="Potential coupling")
@click.option("--terms", type=int, default=30, show_default=True, help="Number of nonzero terms")
@click.option(
    "--at-shell", type=int, default=None, help="Report partial sums on the shell |x| = p^t"
)
def naive(p: int, B: Fraction, terms: int, at_shell: Optional[int]) -> None:
    """
    Single power-series ansatz and its convergence region |x|⁴ < p²/|B|.

    Examples:
        padic-schrodinger naive --p 5 --B 1 --terms 10
        padic-schrodinger naive --p 5 --B 1 --terms 30 --at-shell 1
    """
    series = naive_series(p, B, terms)
    payload: Dict[str, Any] = {
        "coefficients": [render_rational(series.coefficients[4 * n]) for n in range(terms + 1)],
        "region_bound": render_rational(series.region_bound),
        "convergent_everywhere": series.convergent_everywhere,
    }
    if at_shell is not None:
        sums = naive_partial_sums(series, at_shell, terms + 1)
        payload["converges"] = series.converges_at(at_shell)
        payload["partial_sums_decimal"] = [render_decimal(s) for s in sums]
    _emit(payload)


@main.command()
@click.option(
    "--grid",
    "-g",
    "grid_file",
    type=click.Path(exists=True, path_type=Path),
    required=True,
    help="Path to sweep grid JSON file",
)
@click.option(
    "--workers", "-w", type=int, default=None, help="Worker processes (default: configuration)"
)
@click.option(
    "--format",
    "output_format",
    type=click.Choice(["csv", "json"]),
    default="csv",
    show_default=True,
    help="Output format",
)
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write results here instead of stdout",
)
@click.option("--force", is_flag=True, help="Re-solve points that are already cached")
@click.option(
    "--state-db",
    type=click.Path(path_type=Path),
    default=None,
    help="SQLite cache (default: configuration state_db_path)",
)
@click.pass_obj
def sweep(
    config: Dict[str, Any],
    grid_file: Path,
    workers: Optional[int],
    output_format: str,
    output: Optional[Path],
    force: bool,
    state_db: Optional[Path],
) -> None:
    """
    Solve E over a grid of (p, B, N) points from a JSON file.

    Rows are sorted by (B, p, N). See README.md for the CSV columns.

    Examples:
        padic-schrodinger sweep --grid sweep-grid.example.json
        padic-schrodinger sweep --grid grid.json --format json --workers 4 -o results.json
        padic-schrodinger sweep --grid grid.json --force
    """
    runner = SweepRunner(
        grid_file=grid_file,
        state_db_path=state_db or Path(config["state_db_path"]),
        config=config,
        force=force,
        workers=workers,
        console=console,
    )
    records = runner.run()
    writer = write_csv if output_format == "csv" else write_json

    if output is None:
        buffer = io.StringIO()
        writer(records, buffer)
        click.echo(buffer.getvalue(), nl=False)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", newline="") as handle:
        writer(records, handle)
    console.print(f"[green]✓[/green] Wrote {len(records)} rows to {output}")


@main.command(name="list-runs")
@click.option(
    "--state-db",
    type=click.Path(path_type=Path),
    default=None,
    help="SQLite cache (default: configuration state_db_path)",
)
@click.pass_obj
def list_runs(config: Dict[str, Any], state_db: Optional[Path]) -> None:
    """
    List all sweep runs in the database.

    Examples:
        padic-schrodinger list-runs
    """
    state_db_path = state_db or Path(config["state_db_path"])

    if not state_db_path.exists():
        console.print("[yellow]No runs found (database doesn't exist)[/yellow]")
        return

    with SweepStore(state_db_path) as store:
        runs = store.list_all_runs()
        if not runs:
            console.print("[yellow]No runs found[/yellow]")
            return
        solved = {run["run_id"]: store.count_points_for_run(run["run_id"]) for run in runs}

    _display_runs_table(runs, solved)


def _display_runs_table(runs: List[Dict[str, Any]], solved: Dict[str, int]) -> None:
    """Display runs in a table."""
    table = Table(title="Sweep Runs")
    table.add_column("Run ID", style="cyan")
    table.add_column("Grid File", style="green")
    table.add_column("Status")
    table.add_column("Started")
    table.add_column("Points")
    table.add_column("Solved")

    for run in runs:
        status = run["status"]
        if status == "completed":
            status_str = f"[green]{status}[/green]"
        elif status == "failed":
            status_str = f"[red]{status}[/red]"
        else:
            status_str = f"[yellow]{status}[/yellow]"

        started = run["started_at"][:19] if run["started_at"] else "N/A"

        table.add_row(
            run["run_id"],
            run["grid_file"],
            status_str,
            started,
            str(run["point_count"]),
            str(solved.get(run["run_id"], 0)),
        )

    console.print(table)


if __name__ == "__main__":
    main()
