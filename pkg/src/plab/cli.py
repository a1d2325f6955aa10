"""Command-line interface: run scenarios, compute norms, decompose fields, emit plots."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .blocks import decompose
from .io import read_field, write_field
from .lab import emit_plots as _emit_plots
from .lab import run_scenario
from .norms import INF, BesovParams, LorentzParams, besov_norm, lorentz_norm
from .partition import build_partition


@click.group()
def main():
    """Harmonic-analysis toolkit and verification lab on periodic grids."""


@main.command()
@click.argument("scenario", type=click.Path(exists=True, dir_okay=False))
def run(scenario):
    """Execute the experiments of a JSON scenario file.

    Exits 0 iff every pass flag of every experiment holds.
    """
    reports = run_scenario(scenario)
    ok = True
    for report in reports:
        for name, flag in sorted(report.pass_flags.items()):
            status = "pass" if flag else "FAIL"
            click.echo(f"{report.key}: {name}: {status}")
            ok = ok and bool(flag)
    sys.exit(0 if ok else 1)


def _parse_float(tok: str) -> float:
    return INF if tok.strip().lower() in ("inf", "infinity") else float(tok)


@main.command()
@click.argument("field_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--besov", default=None, metavar="S,P,R", help="Besov indices, e.g. 1,inf,1")
@click.option("--lorentz", default=None, metavar="P,Q", help="Lorentz indices, e.g. 3,1")
def norms(field_file, besov, lorentz):
    """Print norms of a stored field."""
    f = read_field(field_file)
    pu = build_partition()
    if besov is None and lorentz is None:
        raise click.UsageError("pass --besov and/or --lorentz")
    if besov is not None:
        s, p, r = (_parse_float(t) for t in besov.split(","))
        value = besov_norm(f, BesovParams(s=s, p=p, r=r), pu)
        click.echo(f"besov({besov}) = {value!r}")
    if lorentz is not None:
        p, q = (_parse_float(t) for t in lorentz.split(","))
        value = lorentz_norm(f, LorentzParams(p, q))
        click.echo(f"lorentz({lorentz}) = {value!r}")


@main.command("decompose")
@click.argument("field_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False), help="output directory")
def decompose_cmd(field_file, out):
    """Write every dyadic block of a stored field as q_<index>.field."""
    f = read_field(field_file)
    dec = decompose(f, build_partition())
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    for q, block in dec.blocks.items():
        write_field(out / f"q_{q}.field", block)
    click.echo(f"wrote {len(dec.blocks)} blocks to {out}")



@main.command()
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
def plots(run_dir):
    """Emit per-channel plot data files and a rendering script for a run."""
    written = _emit_plots(run_dir)
    for path in written:
        click.echo(str(path))


if __name__ == "__main__":
    main()
