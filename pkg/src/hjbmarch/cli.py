"""Command-line front end.

Subcommands: `run` executes one sweep described by an INI config and writes
sweep.csv plus per-slice field CSVs; `reproduce` reruns a bundled benchmark
figure suite and emits its CSVs with a standalone plot script; `truth`
builds or refreshes a cached fine-grid reference; `selftest` runs the
built-in verification suites.

Everything a run produces is deterministic except the wall_ms column, so
rerunning an identical spec rewrites byte-identical CSVs modulo that column.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .advect1d import SCHEMES_1D, cfl_step_1d, march_1d
from .geometry import write_field_csv
from .marchers import SCHEMES_2D, cache_dir, ground_truth, make_config, march
from .metrics import (
    SweepRecord,
    error_vs_analytic,
    error_vs_reference,
    timed_march,
    write_sweep_csv,
)
from .problems import Advection1DProblem, build_problem
from .selftest import run_selftest

FIGURES = ("fig2", "fig3", "fig5", "fig7", "fig8", "fig9")

_ALL_SCHEMES = tuple(dict.fromkeys(SCHEMES_2D + SCHEMES_1D))


class ConfigError(ValueError):
    """Config file problem; the message carries the file and line."""


@dataclass(frozen=True)
class RunSpec:
    """One sweep: a problem, a scheme, and the (resolution x r) grid to run.

    report_times are physical times whose nearest slices get written as field
    CSVs. seed is carried for randomized diagnostics; the marches themselves
    are deterministic. truth_resolution sizes the cached reference used when
    the problem has no exact solution.
    """

    problem_name: str
    params: dict
    scheme: str
    resolutions: tuple
    rs: tuple
    report_times: tuple = (0.0,)
    out_dir: str = "out"
    seed: int = 0
    repeats: int = 3
    truth_resolution: int = 512

    def __post_init__(self):
        if not self.resolutions:
            raise ConfigError("resolutions list is empty")
        if not self.rs:
            raise ConfigError("r list is empty")


_SECTION_KEYS = {
    "problem": {"name", "gamma", "lam", "lambda"},
    "run": {
        "scheme",
        "resolutions",
        "r",
        "report_times",
        "repeats",
        "seed",
        "truth_resolution",
    },
    "output": {"dir"},
}


def _parse_sections(path):
    """Tokenize an INI file into {section: {key: (value, lineno)}}.

    Full-line comments start with # or ;. Unknown sections and keys are
    rejected with the offending line number.
    """
    sections = {name: {} for name in _SECTION_KEYS}
    current = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith(("#", ";")):
                continue
            if line.startswith("["):
                if not line.endswith("]"):
                    raise ConfigError(
                        f"{path} line {lineno}: malformed section header {line!r}"
                    )
                name = line[1:-1].strip().lower()
                if name not in sections:
                    raise ConfigError(f"{path} line {lineno}: unknown section [{name}]")
                current = name
                continue
            if "=" not in line:
                raise ConfigError(
                    f"{path} line {lineno}: expected key = value, got {line!r}"
                )
            if current is None:
                raise ConfigError(f"{path} line {lineno}: key outside any [section]")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in _SECTION_KEYS[current]:
                raise ConfigError(
                    f"{path} line {lineno}: unknown key {key!r} in [{current}]"
                )
            if key in sections[current]:
                raise ConfigError(
                    f"{path} line {lineno}: duplicate key {key!r} in [{current}]"
                )
            if not value:
                raise ConfigError(f"{path} line {lineno}: empty value for {key!r}")
            sections[current][key] = (value, lineno)
    return sections


def _convert(path, entry, key, conv, kind):
    value, lineno = entry
    try:
        return conv(value)
    except ValueError:
        raise ConfigError(
            f"{path} line {lineno}: {key} must be {kind}, got {value!r}"
        ) from None


def _number_list(conv):
    def parse(value):
        items = value.replace(",", " ").split()
        if not items:
            raise ValueError(value)
        return tuple(conv(item) for item in items)

    return parse


def parse_config(path):
    """Read an INI run description into a RunSpec.

    Sections: [problem] takes name plus the problem's parameters (gamma for
    experiment3, lam or lambda for experiment2); [run] takes scheme,
    resolutions, and optionally r (default 1), report_times (default 0),
    repeats, seed, truth_resolution; [output] takes dir. Every error message
    names the file and line.
    """
    sections = _parse_sections(path)
    problem, run, output = sections["problem"], sections["run"], sections["output"]

    if "name" not in problem:
        raise ConfigError(f"{path}: [problem] must set name")
    name = problem["name"][0]
    params = {}
    if "gamma" in problem:
        params["gamma"] = _convert(path, problem["gamma"], "gamma", float, "a number")
    for alias in ("lam", "lambda"):
        if alias in problem:
            if "lam" in params:
                raise ConfigError(
                    f"{path} line {problem[alias][1]}: lam and lambda both given"
                )
            params["lam"] = _convert(path, problem[alias], alias, float, "a number")

    if "scheme" not in run:
        raise ConfigError(f"{path}: [run] must set scheme")
    scheme = run["scheme"][0].lower()
    if scheme not in _ALL_SCHEMES:
        raise ConfigError(
            f"{path} line {run['scheme'][1]}: unknown scheme {scheme!r}; "
            f"choose from {_ALL_SCHEMES}"
        )
    if "resolutions" not in run:
        raise ConfigError(f"{path}: [run] must set resolutions")
    resolutions = _convert(
        path, run["resolutions"], "resolutions", _number_list(int), "integers"
    )
    if any(res < 2 for res in resolutions):
        raise ConfigError(
            f"{path} line {run['resolutions'][1]}: resolutions must be at least 2"
        )
    rs = (1.0,)
    if "r" in run:
        rs = _convert(path, run["r"], "r", _number_list(float), "numbers")
        if any(r <= 0 for r in rs):
            raise ConfigError(f"{path} line {run['r'][1]}: r values must be positive")
    report_times = (0.0,)
    if "report_times" in run:
        report_times = _convert(
            path, run["report_times"], "report_times", _number_list(float), "numbers"
        )
    repeats = 3
    if "repeats" in run:
        repeats = _convert(path, run["repeats"], "repeats", int, "an integer")
        if repeats < 1:
            raise ConfigError(f"{path} line {run['repeats'][1]}: repeats must be >= 1")
    seed = 0
    if "seed" in run:
        seed = _convert(path, run["seed"], "seed", int, "an integer")
    truth_resolution = 512
    if "truth_resolution" in run:
        truth_resolution = _convert(
            path, run["truth_resolution"], "truth_resolution", int, "an integer"
        )
        if truth_resolution < 2:
            raise ConfigError(
                f"{path} line {run['truth_resolution'][1]}: truth_resolution too small"
            )
    out_dir = output["dir"][0] if "dir" in output else "out"

    return RunSpec(
        problem_name=name,
        params=params,
        scheme=scheme,
        resolutions=resolutions,
        rs=rs,
        report_times=report_times,
        out_dir=out_dir,
        seed=seed,
        repeats=repeats,
        truth_resolution=truth_resolution,
    )


def _slice_indices(terminal_time, num_steps, times):
    """Map physical report times onto nearest slice indices; 0 is always kept."""
    indices = {0}
    for t in times:
        if not 0.0 <= t <= terminal_time * (1.0 + 1e-9):
            raise ValueError(f"report time {t} outside [0, {terminal_time}]")
        indices.add(min(num_steps, max(0, round(t / terminal_time * num_steps))))
    return indices


def _steps_1d(problem, points, r):
    """Step count march_1d will use for this cell (same shrink rule)."""
    h = 1.0 / (points - 1)
    k = r * cfl_step_1d(problem, h)
    return max(1, math.ceil(problem.terminal_time / k - 1e-9))


def _run_cells(problem, kind, cells, repeats, jobs, truth, truth_resolution, times):
    """Execute (scheme, resolution, r) cells; returns [(SweepRecord, result)].

    Results come back in input order regardless of jobs. Each cell is timed
    with timed_march, so wall_ms is a median over `repeats` identical runs.
    """

    def one(cell):
        scheme, resolution, r = cell
        if kind == "2d":
            cfg = make_config(problem, resolution, scheme, r=r)
            indices = _slice_indices(
                problem.terminal_time, cfg.time.num_steps, times
            )
            if indices != set(cfg.record_slices):
                cfg = replace(cfg, record_slices=frozenset(indices))
            result, wall_ms = timed_march(lambda: march(problem, cfg), repeats)
            if problem.analytic is not None:
                err = error_vs_analytic(result.final, problem, 0.0)
            else:
                err = error_vs_reference(
                    result.final, truth, truth_resolution // resolution
                )
            record = SweepRecord(
                scheme=scheme,
                resolution=resolution,
                k=cfg.time.k,
                r=float(cfg.r),
                wall_ms=wall_ms,
                updates=result.report.updates,
                error=err,
            )
        else:
            indices = _slice_indices(
                problem.terminal_time, _steps_1d(problem, resolution, r), times
            )
            result, wall_ms = timed_march(
                lambda: march_1d(
                    problem, resolution, scheme, r=r, record_indices=tuple(indices)
                ),
                repeats,
            )
            err = error_vs_analytic(result.final, problem, problem.terminal_time)
            record = SweepRecord(
                scheme=scheme,
                resolution=resolution,
                k=result.time.k,
                r=float(r),
                wall_ms=wall_ms,
                updates=result.updates,
                error=err,
            )
        return record, result

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, cells))
    return [one(cell) for cell in cells]


def _print_table(records):
    print(
        f"{'scheme':<16}{'res':>5}{'r':>8}{'k':>13}"
        f"{'wall_ms':>11}{'updates':>12}{'l1':>13}{'linf':>13}"
    )
    for rec in records:
        print(
            f"{rec.scheme:<16}{rec.resolution:>5}{rec.r:>8g}{rec.k:>13.4g}"
            f"{rec.wall_ms:>11.2f}{rec.updates:>12}"
            f"{rec.error.l1:>13.3e}{rec.error.linf:>13.3e}"
        )


def _cleanup(paths):
    for path in paths:
        try:
            os.unlink(path)
        except OSError:
            pass


def _prepare_problem(spec):
    """Build the problem and, when needed, its fine-grid reference."""
    problem = build_problem(spec.problem_name, spec.params)
    kind = "1d" if isinstance(problem, Advection1DProblem) else "2d"
    allowed = SCHEMES_1D if kind == "1d" else SCHEMES_2D
    if spec.scheme not in allowed:
        raise ValueError(
            f"scheme {spec.scheme!r} is not available for {kind} problems; "
            f"choose from {allowed}"
        )
    truth = None
    if kind == "2d" and problem.analytic is None:
        for res in spec.resolutions:
            if spec.truth_resolution % res:
                raise ValueError(
                    f"resolution {res} does not divide the reference "
                    f"resolution {spec.truth_resolution}"
                )
        print(
            f"reference: {problem.name} at {spec.truth_resolution} cells "
            "(cached after the first build)",
            flush=True,
        )
        truth = ground_truth(problem, spec.truth_resolution)
    return problem, kind, truth


def cmd_run(spec, jobs=1):
    """Execute the spec's (resolution x r) sweep; returns a process exit code.

    Writes <out>/sweep.csv plus one field CSV per recorded slice and prints a
    summary table. Any failure removes the files written so far.
    """
    written = []
    try:
        problem, kind, truth = _prepare_problem(spec)
        cells = [(spec.scheme, res, r) for res in spec.resolutions for r in spec.rs]
        rows = _run_cells(
            problem,
            kind,
            cells,
            spec.repeats,
            jobs,
            truth,
            spec.truth_resolution,
            spec.report_times,
        )
        os.makedirs(spec.out_dir, exist_ok=True)
        sweep_path = os.path.join(spec.out_dir, "sweep.csv")
        write_sweep_csv([record for record, _ in rows], sweep_path)
        written.append(sweep_path)
        for record, result in rows:
            for n in sorted(result.recorded):
                field_path = os.path.join(
                    spec.out_dir,
                    f"field-{record.scheme}-res{record.resolution}"
                    f"-r{record.r:g}-n{n}.csv",
                )
                write_field_csv(result.recorded[n], field_path)
                written.append(field_path)
        _print_table([record for record, _ in rows])
        print(f"wrote {len(written)} files under {spec.out_dir}")
        return 0
    except (ValueError, RuntimeError, FloatingPointError, OSError) as exc:
        _cleanup(written)
        print(f"error: {exc}", file=sys.stderr)
        return 1


_R_DOUBLING = (1.0, 2.0, 4.0, 8.0, 16.0)


def _figure_plan(figure_id):
    """Cells for one bundled benchmark suite: [(problem, kind, cells)]."""
    if figure_id == "fig2":
        plan = []
        for case_id in ("fig2a", "fig2b", "fig2c", "fig2d"):
            cells = [("explicit", 256, 1.0)]
            cells += [("implicit", 256, r) for r in _R_DOUBLING]
            cells += [("semilagrangian", 256, r) for r in _R_DOUBLING]
            plan.append((build_problem(case_id), "1d", cells))
        return plan
    if figure_id == "fig3":
        plan = []
        for case_id in ("fig3a", "fig3b"):
            cells = [("explicit", 256, 1.0)]
            cells += [("hybrid", 256, r) for r in _R_DOUBLING]
            cells += [("implicit", 256, r) for r in _R_DOUBLING]
            plan.append((build_problem(case_id), "1d", cells))
        return plan
    if figure_id == "fig5":
        resolutions = (32, 64, 128, 256)
        cells = [("explicit", res, 1.0) for res in resolutions]
        cells += [
            ("implicit", res, r) for res in resolutions for r in (1.0, 2.0, 4.0, 8.0)
        ]
        return [(build_problem("experiment1"), "2d", cells)]
    if figure_id == "fig7":
        plan = []
        for lam in (0.1, 0.25, 0.8):
            cells = [("explicit", 64, 1.0)]
            cells += [("implicit", 64, r) for r in (1.0, 2.0, 4.0, 8.0)]
            plan.append((build_problem("experiment2", {"lam": lam}), "2d", cells))
        return plan
    if figure_id == "fig8":
        plan = []
        for gamma in (5.0, 11.0):
            cells = [("explicit", 128, 1.0)]
            cells += [("implicit", 128, r) for r in (1.0, 2.0, 4.0, 8.0)]
            cells += [("hybrid", 128, r) for r in (1.0, 2.0, 4.0, 8.0)]
            plan.append((build_problem("experiment3", {"gamma": gamma}), "2d", cells))
        return plan
    if figure_id == "fig9":
        cells = [("explicit", 128, 1.0)]
        cells += [("implicit", 128, r) for r in (1.0, 4.0, 8.0, 64.0)]
        cells += [("hybrid", 128, r) for r in (1.0, 4.0, 8.0, 64.0)]
        return [(build_problem("experiment4"), "2d", cells)]
    raise ValueError(f"unknown figure id {figure_id!r}; choose from {FIGURES}")


_PLOT_TEMPLATE = '''"""Render @FIG@ error curves from the sweep CSVs alongside this script.

Standalone artifact: needs only matplotlib. For each CSV it draws, per norm,
error against resolution (or against the step multiplier r when the sweep
has a single resolution) and error against wall time.
"""

import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CSVS = @CSVS@


def load(name):
    rows = []
    with open(os.path.join(HERE, name), newline="") as fh:
        for raw in csv.DictReader(fh):
            rows.append(
                {
                    "scheme": raw["scheme"],
                    "resolution": int(raw["resolution"]),
                    "r": float(raw["r"]),
                    "wall_ms": float(raw["wall_ms"]),
                    "l1": float(raw["l1"]),
                    "linf": float(raw["linf"]),
                }
            )
    return rows


for name in CSVS:
    rows = load(name)
    stem = name[:-4]
    many_res = len({row["resolution"] for row in rows}) > 1
    for norm in ("l1", "linf"):
        fig, (left, right) = plt.subplots(1, 2, figsize=(11, 4.5))
        if many_res:
            curves = defaultdict(list)
            for row in rows:
                curves[(row["scheme"], row["r"])].append(row)
            for (scheme, r), pts in sorted(curves.items()):
                pts.sort(key=lambda p: p["resolution"])
                left.loglog(
                    [p["resolution"] for p in pts],
                    [p[norm] for p in pts],
                    "o-",
                    label="%s r=%g" % (scheme, r),
                )
            left.set_xlabel("grid resolution")
        else:
            curves = defaultdict(list)
            for row in rows:
                curves[row["scheme"]].append(row)
            for scheme, pts in sorted(curves.items()):
                pts.sort(key=lambda p: p["r"])
                left.semilogy(
                    [p["r"] for p in pts],
                    [p[norm] for p in pts],
                    "o-",
                    label=scheme,
                )
            left.set_xlabel("step multiplier r")
        left.set_ylabel(norm + " error")
        left.legend(fontsize=8)
        for scheme in sorted({row["scheme"] for row in rows}):
            pts = [row for row in rows if row["scheme"] == scheme]
            right.loglog(
                [p["wall_ms"] for p in pts],
                [p[norm] for p in pts],
                "o",
                label=scheme,
            )
        right.set_xlabel("wall time (ms)")
        right.set_ylabel(norm + " error")
        right.legend(fontsize=8)
        fig.suptitle("%s, %s" % (stem, norm))
        fig.tight_layout()
        out = os.path.join(HERE, "%s-%s.png" % (stem, norm))
        fig.savefig(out, dpi=150)
        plt.close(fig)
        print("wrote", out)
'''


def cmd_reproduce(figure_id, out_dir, jobs=1, repeats=3):
    """Rerun one benchmark figure suite into out_dir; returns an exit code.

    Writes one sweep CSV per problem in the suite plus plot_<figure>.py, a
    standalone matplotlib script over those CSVs.
    """
    written = []
    try:
        plan = _figure_plan(figure_id)
        os.makedirs(out_dir, exist_ok=True)
        csv_names = []
        for problem, kind, cells in plan:
            truth = None
            if kind == "2d" and problem.analytic is None:
                print(
                    f"reference: {problem.name} at 512 cells "
                    "(cached after the first build)",
                    flush=True,
                )
                truth = ground_truth(problem, 512)
            rows = _run_cells(problem, kind, cells, repeats, jobs, truth, 512, ())
            name = f"{problem.name}.csv"
            path = os.path.join(out_dir, name)
            write_sweep_csv([record for record, _ in rows], path)
            written.append(path)
            csv_names.append(name)
            print(f"{figure_id}: wrote {path} ({len(rows)} rows)", flush=True)
        script = _PLOT_TEMPLATE.replace("@FIG@", figure_id).replace(
            "@CSVS@", repr(csv_names)
        )
        script_path = os.path.join(out_dir, f"plot_{figure_id}.py")
        with open(script_path, "w") as fh:
            fh.write(script)
        written.append(script_path)
        print(f"{figure_id}: wrote {script_path}")
        return 0
    except (ValueError, RuntimeError, FloatingPointError, OSError) as exc:
        _cleanup(written)
        print(f"error: {exc}", file=sys.stderr)
        return 1


def cmd_truth(problem_name, resolution, refresh=False):
    """Build (or reuse) the cached fine-grid reference; prints its path."""
    try:
        problem = build_problem(problem_name)
        if isinstance(problem, Advection1DProblem):
            raise ValueError(f"{problem_name} is a 1D case; no cached reference")
        ground_truth(problem, resolution, refresh=refresh)
        print(os.path.join(cache_dir(), f"{problem.name}-{resolution}.csv"))
        return 0
    except (ValueError, RuntimeError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def cmd_selftest(seed=0):
    return 0 if run_selftest(seed=seed) else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="hjbmarch",
        description="Backward time-marching solvers for isotropic "
        "Hamilton-Jacobi-Bellman problems, with a 1D advection testbed.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one sweep described by an INI config")
    p_run.add_argument(
        "--config", required=True, help="INI file with [problem], [run], [output]"
    )
    p_run.add_argument(
        "--jobs",
        type=int,
        default=1,
        help="concurrent sweep cells (wall timings overlap when > 1)",
    )
    p_run.add_argument("--out", help="output directory, overrides [output] dir")
    p_run.add_argument("--seed", type=int, help="override the config seed")

    p_rep = sub.add_parser("reproduce", help="rerun a bundled benchmark figure suite")
    p_rep.add_argument("figure", choices=FIGURES)
    p_rep.add_argument("--out", help="output directory (default reproduce-<figure>)")
    p_rep.add_argument("--jobs", type=int, default=1)
    p_rep.add_argument(
        "--repeats", type=int, default=3, help="timing repeats per cell"
    )

    p_truth = sub.add_parser(
        "truth", help="build or refresh a cached fine-grid reference"
    )
    p_truth.add_argument("--problem", default="experiment4")
    p_truth.add_argument("--resolution", type=int, default=512)
    p_truth.add_argument("--refresh", action="store_true")

    p_self = sub.add_parser("selftest", help="run the built-in verification suites")
    p_self.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    if args.command == "run":
        try:
            spec = parse_config(args.config)
        except (ConfigError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        if args.out:
            spec = replace(spec, out_dir=args.out)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        return cmd_run(spec, jobs=args.jobs)
    if args.command == "reproduce":
        out_dir = args.out or f"reproduce-{args.figure}"
        return cmd_reproduce(args.figure, out_dir, jobs=args.jobs, repeats=args.repeats)
    if args.command == "truth":
        return cmd_truth(args.problem, args.resolution, refresh=args.refresh)
    return cmd_selftest(seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
