"""CLI interface for polysurf."""

import csv
import io
import json
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

from typer._click import exceptions as click_exceptions
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

from .angles import Angle
from .errors import PolysurfError

app = typer.Typer(
    name="polysurf",
    help="Polygonal surfaces: holonomy, unfolding, billiard flow and recurrence experiments.",
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

EXIT_USAGE = 64
EXIT_IO = 74
SCHEMA = 1

logger = logging.getLogger(__name__)


class _State:
    output_format: Optional[str] = None


state = _State()


def print_banner() -> None:
    """Print the app banner."""
    console.print(Panel.fit(
        "[bold cyan]polysurf[/bold cyan]\n"
        "[dim]polygonal surfaces and their billiards[/dim]",
        border_style="cyan",
    ))


def _fail(message: str, code: int) -> typer.Exit:
    err_console.print(f"[red]Error: {message}[/red]")
    return typer.Exit(code)


@contextmanager
def _guard() -> Iterator[None]:
    """Turn library and file errors into exit codes."""
    try:
        yield
    except PolysurfError as exc:
        raise _fail(exc.message, exc.exit_code) from exc
    except OSError as exc:
        raise _fail(str(exc), EXIT_IO) from exc


def parse_theta(theta: Optional[str], theta_rad: Optional[float] = None) -> Optional[Angle]:
    """``--theta`` is "p/q" in units of pi or "rad:FLOAT"; ``--theta-rad`` is radians."""
    if theta is not None and theta_rad is not None:
        raise typer.BadParameter("give --theta or --theta-rad, not both")
    if theta_rad is not None:
        return Angle.radians(theta_rad)
    if theta is None:
        return None
    try:
        return Angle.parse(theta)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--theta") from exc


def _load(path: str) -> Any:
    from .config import get_settings
    from .surface_io import read_surface

    return read_surface(Path(path).expanduser(), get_settings().geom_tolerance)


def _write_rows(rows: list[dict[str, Any]], path: Optional[str]) -> None:
    """Rows as CSV with a header, to a file or (with --format) to stdout."""
    if not rows:
        return
    if path is None and state.output_format == "json":
        console.print_json(json.dumps({"schema": SCHEMA, "rows": rows}, default=str))
        return
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if path is not None:
        Path(path).write_text(buffer.getvalue(), encoding="utf-8")
        console.print(f"[green]✓ Saved to {path}[/green]")
    elif state.output_format == "csv":
        sys.stdout.write(buffer.getvalue())


def _write_json(data: dict[str, Any], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"schema": SCHEMA, **data}, f, indent=2, sort_keys=True, default=str)
    console.print(f"[green]✓ Saved to {path}[/green]")


@app.command()
def make(
    family: str = typer.Option(..., "--family", "-f", help="Family id (see: polysurf families)"),
    param: Optional[list[str]] = typer.Option(None, "--param", "-p", help="Parameter k=v"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Surface description file"),
    window: Optional[str] = typer.Option(
        None, "--window", help="xmin,xmax,ymin,ymax: finite window of a lazy surface"
    ),
    svg: Optional[str] = typer.Option(None, "--svg", help="Render the surface to SVG"),
) -> None:
    """Build a catalog surface."""
    from .catalog import FamilySpec, make_family
    from .geometry import Window
    from .surface_io import write_surface

    with _guard():
        surface = make_family(FamilySpec.parse(family, param or []))
        if surface.is_lazy:
            if window is not None:
                surface = surface.restrict(_window(window))
            elif "quotient" in surface.metadata and surface.metadata["quotient"] is not None:
                console.print("[dim]lazy surface: writing its compact quotient[/dim]")
                surface = surface.metadata["quotient"]
            elif out is not None:
                raise typer.BadParameter("a lazy surface needs --window", param_hint="--window")
            else:
                surface = surface.restrict(Window.square(2.0))
        _summary(surface)
        if out is not None:
            write_surface(surface, out)
            console.print(f"[green]✓ Saved to {out}[/green]")
        if svg is not None:
            from .render import render_surface_svg

            render_surface_svg(surface, svg)


@app.command()
def families() -> None:
    """List catalog families and their default parameters."""
    from .catalog import list_families

    print_banner()
    table = Table(title="Families")
    table.add_column("Family", style="cyan")
    table.add_column("Parameters")
    table.add_column("Description", style="dim")
    for entry in list_families():
        params = ", ".join(f"{k}={v}" for k, v in entry.defaults.items())
        table.add_row(entry.name, params, entry.description)
    console.print(table)


def _window(text: str) -> Any:
    from .geometry import Window

    try:
        return Window.parse(text)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--window") from exc


def _summary(surface: Any) -> None:
    table = Table(title=surface.name or "surface")
    table.add_column("Property", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("Cells", str(len(surface.cells)))
    table.add_row("Gluings", str(len(surface.gluings())))
    table.add_row("Boundary edges", str(len(surface.boundary_edges())))
    table.add_row("Area", f"{surface.area():.6g}")
    if surface.period is not None:
        table.add_row("Period", f"({surface.period[0]}, {surface.period[1]})")
    console.print(table)


@app.command()
def validate(
    surface_file: str = typer.Argument(..., help="Surface description file"),
    window: Optional[str] = typer.Option(None, "--window", help="Window for the side and multiplicity checks"),
) -> None:
    """Validate a surface and report its vertices and local finiteness."""
    from .geometry import Window, validate_conditions, vertex_angles

    with _guard():
        surface = _load(surface_file)
        _summary(surface)
        table = Table(title="Vertices")
        table.add_column("Corner", style="cyan")
        table.add_column("Kind")
        table.add_column("Total angle", style="green")
        for (cid, corner), vertex in vertex_angles(surface).items():
            table.add_row(f"{cid}:{corner}", vertex.kind.value, vertex.total_angle.describe())
        console.print(table)
        area = _window(window) if window else Window.square(10.0)
        report = validate_conditions(surface, area)
        min_side = "-" if report.min_side is None else f"{report.min_side:.6g}"
        console.print(
            f"sides: {report.sides_met}, shortest side: {min_side}, "
            f"max multiplicity: {report.max_multiplicity}"
        )
        if report.min_side_flag:
            console.print(f"[yellow]short side: below {report.threshold:g}[/yellow]")
        console.print("[green]✓ valid[/green]")


@app.command()
def classify(
    surface_file: str = typer.Argument(..., help="Surface description file"),
    arithmetic: bool = typer.Option(False, "--arithmetic", "-a", help="Test for a square tiling"),
    theta: Optional[str] = typer.Option(None, "--theta", help="Direction p/q (units of pi)"),
) -> None:
    """Rationality, N and holonomy group of a surface."""
    from .holonomy import rotational_holonomy
    from .unfolding import canonical_translation_cover, classify_direction, is_square_tiled

    direction = parse_theta(theta)
    with _guard():
        surface = _load(surface_file)
        group = rotational_holonomy(surface)
        if group.is_finite:
            console.print(f"rational, N={group.n}")
            console.print(f"[dim]holonomy {group.describe()}, order {group.order}[/dim]")
        else:
            console.print("irrational")
            console.print(f"[dim]{group.describe()}[/dim]")
        if arithmetic:
            target = surface
            if group.is_finite and not group.is_trivial:
                target = canonical_translation_cover(surface, group).total
            result = is_square_tiled(target)
            if isinstance(result, PolysurfError):
                console.print(f"NotSquareTiled: {result.message}")
            else:
                rows = len(result.rows())
                console.print(
                    f"square-tiled: {len(result)} squares, scale {result.scale}, {rows} rows"
                )
        if direction is not None:
            verdict = classify_direction(direction).describe()
            console.print(f"direction {direction.describe()}: {verdict}")


@app.command()
def unfold(
    surface_file: str = typer.Argument(..., help="Surface description file"),
    out: Optional[str] = typer.Option(None, "--out", "-o", help="Write the cover here"),
    order: Optional[int] = typer.Option(
        None, "--subgroup-order", help="Quotient by a subgroup of this order instead"
    ),
) -> None:
    """Build the canonical translation cover (or an intermediate cover)."""
    from .holonomy import rotational_holonomy, subgroups
    from .surface_io import write_surface
    from .unfolding import branching_report, canonical_translation_cover, intermediate_cover

    with _guard():
        surface = _load(surface_file)
        if order is None:
            cover = canonical_translation_cover(surface)
        else:
            group = rotational_holonomy(surface)
            matches = [h for h in subgroups(group) if h.order == order]
            if not matches:
                raise typer.BadParameter(
                    f"no subgroup of order {order} in {group.describe()}",
                    param_hint="--subgroup-order",
                )
            cover = intermediate_cover(surface, matches[0], group)
        console.print(f"degree {cover.degree}, {len(cover.total.cells)} cells")
        table = Table(title="Cone points over the base")
        table.add_column("Vertex", style="cyan")
        table.add_column("Angle", style="green")
        table.add_column("Ratio")
        for point in branching_report(cover):
            if point.angle.isclose(Angle.exact(2)) or point.angle.isclose(Angle.exact(1)):
                continue
            vertex = f"{point.corner[0]}:{point.corner[1]}"
            table.add_row(vertex, point.angle.describe(), str(point.ratio))
        console.print(table)
        if out is not None:
            write_surface(cover.total, out)
            console.print(f"[green]✓ Saved to {out}[/green]")


def _start_state(surface: Any, start: str, direction: Angle) -> Any:
    from .flow import TangentState

    parts = [p.strip() for p in start.split(",")]
    if len(parts) not in (2, 3):
        raise typer.BadParameter("expected x,y or x,y,cell", param_hint="--start")
    try:
        point = (float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--start") from exc
    if len(parts) == 3:
        cid: Any = int(parts[2]) if parts[2].lstrip("-").isdigit() else parts[2]
        if surface.try_cell(cid) is None:
            raise typer.BadParameter(f"no cell {parts[2]!r}", param_hint="--start")
    else:
        owners = [c for c in surface.cell_ids() if surface.cell(c).contains(point)]
        if not owners:
            raise typer.BadParameter(f"{start} lies in no cell", param_hint="--start")
        cid = owners[0]
    return TangentState.start(cid, point, direction)


@app.command()
def trace(
    surface_file: str = typer.Argument(..., help="Surface description file"),
    start: str = typer.Option(..., "--start", help="x,y or x,y,cell"),
    theta: Optional[str] = typer.Option(None, "--theta", help="Direction p/q (units of pi)"),
    theta_rad: Optional[float] = typer.Option(None, "--theta-rad", help="Direction in radians"),
    events: int = typer.Option(1000, "--events", "-n", help="Event budget"),
    length: Optional[float] = typer.Option(None, "--length", help="Length budget"),
    svg: Optional[str] = typer.Option(None, "--svg", help="Render the orbit to SVG"),
    csv_out: Optional[str] = typer.Option(None, "--csv", help="Event log CSV"),
) -> None:
    """Trace a geodesic from a point."""
    from .flow import trace as run_trace

    direction = parse_theta(theta, theta_rad)
    if direction is None:
        raise typer.BadParameter("a direction is required", param_hint="--theta")
    with _guard():
        surface = _load(surface_file)
        initial = _start_state(surface, start, direction)
        log = run_trace(surface, initial, events, length)
        kinds: dict[str, int] = {}
        for event in log:
            kinds[event.kind.value] = kinds.get(event.kind.value, 0) + 1
        console.print(
            f"{len(log)} events, length {log[-1].state.time:.6g}" if log else "no events"
        )
        for kind, count in sorted(kinds.items()):
            console.print(f"  {kind}: {count}")
        rows = [
            {
                "t": repr(e.state.time),
                "cell": e.state.cell,
                "x": repr(e.state.point[0]),
                "y": repr(e.state.point[1]),
                "kind": e.kind.value,
                "shift": e.shift,
            }
            for e in log
        ]
        _write_rows(rows, csv_out)
        if svg is not None:
            from .render import render_trace_svg

            render_trace_svg(surface, log, svg)
            console.print(f"[green]✓ Saved to {svg}[/green]")


@app.command()
def billiard(
    surface_file: str = typer.Argument(..., help="Surface description file"),
    edge: str = typer.Option(..., "--edge", help="Section edge cell:edge"),
    arclength: float = typer.Option(..., "--arclength", "-s", help="Position along the edge"),
    theta: Optional[str] = typer.Option(None, "--theta", help="Direction p/q (units of pi)"),
    theta_rad: Optional[float] = typer.Option(None, "--theta-rad", help="Direction in radians"),
    iterations: int = typer.Option(10, "--iterations", "-k", help="Number of returns"),
    section: str = typer.Option("boundary", "--section", help="boundary or period"),
    csv_out: Optional[str] = typer.Option(None, "--csv", help="Iterates CSV"),
) -> None:
    """Iterate the section return (billiard) map."""
    from .flow import CrossSectionPoint, Tracer, section_return
    from .geometry import EdgeRef

    direction = parse_theta(theta, theta_rad)
    if direction is None:
        raise typer.BadParameter("a direction is required", param_hint="--theta")
    cell, _, index = edge.rpartition(":")
    if not cell or not index.isdigit():
        raise typer.BadParameter(f"bad edge {edge!r}", param_hint="--edge")
    ref = EdgeRef(int(cell) if cell.lstrip("-").isdigit() else cell, int(index))
    with _guard():
        surface = _load(surface_file)
        tracer = Tracer(surface)
        point = CrossSectionPoint(ref, arclength, direction)
        rows = []
        for k in range(iterations):
            hit = section_return(tracer, point, section)
            point = hit.point
            rows.append(
                {
                    "k": k + 1,
                    "edge": str(point.edge),
                    "arclength": repr(point.arclength),
                    "direction": str(point.direction),
                    "displacement": point.displacement,
                    "flight_time": repr(hit.flight_time),
                }
            )
        columns = ("k", "edge", "arclength", "direction", "displacement")
        table = Table(title="Returns")
        for column in columns:
            table.add_column(column)
        for row in rows[:20]:
            table.add_row(*(str(row[c]) for c in columns))
        console.print(table)
        _write_rows(rows, csv_out)


@app.command()
def centering(
    surface_file: str = typer.Argument(..., help="Shift-labeled quotient surface"),
    theta: str = typer.Option(..., "--theta", help="Direction p/q (units of pi) or rad:FLOAT"),
    method: str = typer.Option("quad", "--method", "-m", help="quad or mc"),
    samples: int = typer.Option(10_000, "--samples", "-n", help="Monte Carlo samples"),
    section: Optional[str] = typer.Option(None, "--section", help="boundary or period"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed"),
) -> None:
    """Mean displacement against the section measure."""
    from .skew import SkewSystem, centering_integral

    if method not in ("quad", "mc"):
        raise typer.BadParameter("method must be quad or mc", param_hint="--method")
    direction = parse_theta(theta)
    assert direction is not None
    with _guard():
        system = SkewSystem(_load(surface_file), section, direction)
        estimate = centering_integral(system, direction, method, samples, seed)
        console.print(
            f"mean {estimate.mean:.12g}  stderr {estimate.stderr:.3g}  ({estimate.method})"
        )


@app.command()
def recurrence(
    surface_file: str = typer.Argument(..., help="Shift-labeled quotient surface"),
    theta: Optional[str] = typer.Option(None, "--theta", help="Direction; omit for all directions"),
    orbits: int = typer.Option(100, "--orbits", help="Number of orbits"),
    returns: int = typer.Option(1000, "--returns", help="Returns per orbit"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed"),
    workers: Optional[int] = typer.Option(None, "--workers", "-j", help="Worker processes"),
    section: Optional[str] = typer.Option(None, "--section", help="boundary or period"),
    csv_out: Optional[str] = typer.Option(None, "--csv", help="Per-orbit CSV"),
    report: Optional[str] = typer.Option(None, "--report", help="JSON report"),
) -> None:
    """Sample skew-product orbits and report recurrence or transience evidence."""
    from .skew import SkewSystem, recurrence_experiment

    direction = parse_theta(theta)
    with _guard():
        system = SkewSystem(_load(surface_file), section, direction)
        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=err_console,
            transient=True,
        ) as progress:
            progress.add_task(f"Running {orbits} orbits x {returns} returns...", total=None)
            result = recurrence_experiment(
                system, direction, orbits, returns, seed=seed, workers=workers
            )
        summary = result.summary()
        table = Table(title="Recurrence")
        table.add_column("Statistic", style="cyan")
        table.add_column("Value", style="green")
        for key in ("n_orbits", "n_completed", "n_returned_to_zero", "n_escaped"):
            table.add_row(key, str(summary[key]))
        aborted = ", ".join(f"{k}={v}" for k, v in sorted(result.aborted.items()))
        table.add_row("aborted", aborted or "0")
        console.print(table)
        console.print(f"verdict: [bold]{result.verdict.value}[/bold]")
        rows = [
            {
                "orbit": o.index,
                "direction": o.direction,
                "returns": o.returns,
                "final": o.final,
                "birkhoff_mean": repr(o.birkhoff_mean),
                "max_excursion": o.max_excursion,
                "returned_to_zero": int(o.returned_to_zero),
                "first_return": "" if o.first_return is None else o.first_return,
                "escaped": int(o.escaped),
                "aborted": o.aborted or "",
            }
            for o in result.orbits
        ]
        _write_rows(rows, csv_out)
        if report is not None:
            _write_json(
                {"surface": surface_file, "theta": theta, "returns": returns, **summary}, report
            )


@app.command()
def amenability(
    family: str = typer.Option(..., "--family", "-f", help="Family id"),
    grid: str = typer.Option(..., "--grid", "-g", help="Parameter swept over reduced fractions"),
    max_denominator: int = typer.Option(12, "--max-denominator", "-d", help="Largest denominator"),
    param: Optional[list[str]] = typer.Option(None, "--param", "-p", help="Fixed k=v"),
    csv_out: Optional[str] = typer.Option(None, "--csv", help="Per-point CSV"),
) -> None:
    """N and its parity over a grid of rational parameters."""
    from .catalog import FamilySpec
    from .skew import amenability_check, rational_grid

    with _guard():
        fixed = FamilySpec.parse(family, param or []).params
        result = amenability_check(family, {grid: rational_grid(max_denominator)}, fixed)
        table = Table(title=f"{family}: {grid}")
        table.add_column(grid, style="cyan")
        table.add_column("rational")
        table.add_column("N", style="green")
        table.add_column("parity")
        for p in result.points:
            n = "-" if p.n is None else str(p.n)
            parity = "error" if p.error else ("even" if p.even else "odd" if p.n else "-")
            table.add_row(p.params[grid], "yes" if p.rational else "no", n, parity)
        console.print(table)
        console.print(
            f"even fraction {result.even_fraction:.3f}; "
            f"amenability proxy {'holds' if result.amenable else 'fails'}"
        )
        _write_rows(
            [
                {**p.params, "rational": int(p.rational), "n": p.n or "", "even": int(p.even)}
                for p in result.points
            ],
            csv_out,
        )


@app.command()
def config(
    show: bool = typer.Option(False, "--show", "-s", help="Show current configuration"),
    set_: Optional[list[str]] = typer.Option(None, "--set", help="Set key=value and save"),
) -> None:
    """Show or change polysurf settings."""
    from .config import get_settings, reload_settings

    settings = get_settings()
    if set_:
        updates: dict[str, Any] = {}
        for item in set_:
            key, sep, value = item.partition("=")
            if not sep or key not in type(settings).model_fields:
                raise typer.BadParameter(f"unknown setting {item!r}", param_hint="--set")
            updates[key] = value
        try:
            changed = type(settings).model_validate({**settings.model_dump(), **updates})
        except ValueError as exc:
            raise typer.BadParameter(str(exc), param_hint="--set") from exc
        with _guard():
            changed.save()
        settings = reload_settings()
        console.print("[green]✓ Configuration saved![/green]")
    if show or not set_:
        table = Table(title="Current Configuration")
        table.add_column("Setting", style="cyan")
        table.add_column("Value", style="green")
        for name, value in settings.model_dump().items():
            table.add_row(name, str(value))
        console.print(table)


@app.callback()
def callback(
    seed: Optional[int] = typer.Option(None, "--seed", help="Default random seed"),
    tolerance: Optional[float] = typer.Option(None, "--tolerance", help="Geometric tolerance"),
    output_format: Optional[str] = typer.Option(
        None, "--format", help="csv or json: print tables to stdout"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging"),
) -> None:
    """polysurf - polygonal surfaces and their billiards."""
    from .config import override_settings

    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )
    if output_format not in (None, "csv", "json", "svg"):
        raise typer.BadParameter("format must be csv, json or svg", param_hint="--format")
    state.output_format = output_format
    override_settings(seed=seed, geom_tolerance=tolerance)


def run(argv: Optional[list[str]] = None) -> int:
    """Run the CLI and return its exit status (64 usage, 74 I/O, 2 validation)."""
    try:
        result = app(args=argv, standalone_mode=False)
    except click_exceptions.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click_exceptions.Exit as exc:
        return exc.exit_code
    except click_exceptions.Abort:
        return 1
    except PolysurfError as exc:
        err_console.print(f"[red]Error: {exc.message}[/red]")
        return exc.exit_code
    except OSError as exc:
        err_console.print(f"[red]Error: {exc}[/red]")
        return EXIT_IO
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
