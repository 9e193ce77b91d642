"""Command-line front end: validate, rankings, sensitivity, npc, synth.

Every analysis command writes its tables as CSV plus a manifest.json that
records the exact parameters, so a run can be reproduced bit-for-bit.
Exit codes: 0 success, 1 data/validation error, 2 usage or missing input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import __version__
from .corpus import Corpus
from .errors import AnalysisError, CitewinError, MissingInputError
from .impact import MedianTable, compute_median_table
from .ingest import RepresentativityReport, load_corpus, representativity_filter
from .npc import NpcCombinedResult, UdaGroups, max_rank_shift, npc_fisher_combine, top_partition
from .productivity import (
    compute_baselines,
    compute_cells,
    sds_scores,
    uda_scores,
)
from .sensitivity import (
    Ranking,
    no_change_and_small_shift_pcts,
    quartile_classes,
    quartile_shift_stats,
    rank_shifts,
    rank_universities,
    shift_descriptives,
    spearman_rho,
    stability_summary,
)
from .synth import SynthConfig, generate

logger = logging.getLogger(__name__)

DEFAULT_PERIOD = (2001, 2003)
DEFAULT_YEARS = (2004, 2005, 2006, 2007, 2008)
DEFAULT_BENCHMARK = 2008
DEFAULT_THRESHOLD = 0.5
DEFAULT_BASELINE = "aggregate"
DEFAULT_TOP_PERCENTILE = 80.0
DEFAULT_PERMUTATIONS = 10_000
DEFAULT_SEED = 42


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written next to every output set."""

    command: str
    input_dir: str
    pub_period: tuple[int, int]
    observation_years: tuple[int, ...]
    threshold: float
    baseline: str
    benchmark_year: int | None = None
    level: str | None = None
    top_percentile: float | None = None
    n_perm: int | None = None
    seed: int | None = None
    outputs: tuple[str, ...] = ()
    tool_version: str = __version__

    def write(self, out_dir: Path) -> None:
        payload = {
            "command": self.command,
            "tool_version": self.tool_version,
            "input_dir": self.input_dir,
            "parameters": {
                "pub_period": list(self.pub_period),
                "observation_years": list(self.observation_years),
                "threshold": self.threshold,
                "baseline": self.baseline,
                "benchmark_year": self.benchmark_year,
                "level": self.level,
                "top_percentile": self.top_percentile,
                "n_perm": self.n_perm,
                "seed": self.seed,
            },
            "outputs": sorted(self.outputs),
        }
        (out_dir / "manifest.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )


@dataclass
class AnalysisRun:
    """Rankings for every requested (level, scope, year), plus provenance."""

    corpus: Corpus
    report: RepresentativityReport
    median_tables: dict[int, MedianTable] = field(default_factory=dict)
    rankings: dict[tuple[str, str, int], Ranking] = field(default_factory=dict)

    def scopes(self, level: str) -> list[str]:
        return sorted({s for (lvl, s, _y) in self.rankings if lvl == level})

    def years_of(self, level: str, scope_id: str) -> list[int]:
        return sorted(y for (lvl, s, y) in self.rankings if lvl == level and s == scope_id)

    def ranking(self, level: str, scope_id: str, year: int) -> Ranking:
        return self.rankings[(level, scope_id, year)]


def run_analysis(
    corpus: Corpus,
    pub_period: tuple[int, int],
    years: Sequence[int],
    threshold: float,
    baseline: str,
    levels: Sequence[str] = ("uda", "sds"),
    workers: int = 1,
) -> AnalysisRun:
    """Full pipeline (filter, medians, impact, strength, productivity, rank)."""
    _check_years_available(corpus, years)
    report = representativity_filter(corpus, pub_period, threshold)
    retained = report.retained_sds()
    if not retained:
        raise AnalysisError(
            f"no SDS passes the representativity filter at threshold {threshold}"
        )
    run = AnalysisRun(corpus=corpus, report=report)

    def one_year(year: int):
        table = compute_median_table(corpus, year)
        cells = compute_cells(corpus, retained, pub_period, year, table)
        baselines = compute_baselines(cells, baseline)
        rankings: dict[tuple[str, str, int], Ranking] = {}
        if "sds" in levels:
            for sds in sorted(retained):
                scores = sds_scores(cells, sds)
                if scores:
                    rankings[("sds", sds, year)] = rank_universities(scores, "sds", sds, year)
        if "uda" in levels:
            for uda in corpus.taxonomy.uda_ids:
                per_univ = uda_scores(corpus, cells, baselines, uda)
                if per_univ:
                    scores = {u: up.value for u, up in per_univ.items()}
                    rankings[("uda", uda, year)] = rank_universities(scores, "uda", uda, year)
        return year, table, rankings

    ordered_years = sorted(set(years))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_year, ordered_years))
    else:
        results = [one_year(y) for y in ordered_years]
    for year, table, rankings in results:
        run.median_tables[year] = table
        run.rankings.update(rankings)
    return run


def _check_years_available(corpus: Corpus, years: Sequence[int]) -> None:
    if not corpus.publications:
        raise AnalysisError("corpus has no publications")
    available: set[int] | None = None
    for pub in corpus.publications.values():
        have = set(pub.citation_counts)
        available = have if available is None else (available & have)
    missing = sorted(set(years) - (available or set()))
    if missing:
        raise AnalysisError(
            f"observation year(s) {missing} not covered by every publication; "
            f"years available for all publications: {sorted(available or set())}"
        )


# ---------------------------------------------------------------------------
# commands


def cmd_validate(directory: str) -> int:
    """Load and fully check a corpus directory; report findings."""
    try:
        corpus = load_corpus(directory)
    except MissingInputError as exc:
        print(f"MISSING INPUT: {exc}", file=sys.stderr)
        return 2
    except CitewinError as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    print(
        f"OK: {len(corpus.publications)} publications, "
        f"{len(corpus.researchers)} researchers, "
        f"{len(corpus.authorships)} authorship links, "
        f"{len(corpus.taxonomy.sds_ids)} SDSs in {len(corpus.taxonomy.uda_ids)} UDAs"
    )
    return 0


def cmd_rankings(
    directory: str,
    out_dir: str,
    pub_period: tuple[int, int] = DEFAULT_PERIOD,
    obs_year: int = DEFAULT_BENCHMARK,
    level: str = "uda",
    threshold: float = DEFAULT_THRESHOLD,
    baseline: str = DEFAULT_BASELINE,
) -> Path:
    """Write rankings.csv for one observation year at one level."""
    corpus = load_corpus(directory)
    run = run_analysis(corpus, pub_period, [obs_year], threshold, baseline, levels=(level,))
    out = _prepare_out(out_dir)
    _write_rankings_csv(out / "rankings.csv", run)
    _write_csv(out / "representativity.csv", run.report.csv_rows())
    _write_medians_csv(out / "medians.csv", run.median_tables)
    RunManifest(
        command="rankings",
        input_dir=str(directory),
        pub_period=pub_period,
        observation_years=(obs_year,),
        threshold=threshold,
        baseline=baseline,
        level=level,
        outputs=("rankings.csv", "representativity.csv", "medians.csv"),
    ).write(out)
    return out


def cmd_sensitivity(
    directory: str,
    out_dir: str,
    pub_period: tuple[int, int] = DEFAULT_PERIOD,
    years: Sequence[int] = DEFAULT_YEARS,
    benchmark_year: int = DEFAULT_BENCHMARK,
    threshold: float = DEFAULT_THRESHOLD,
    baseline: str = DEFAULT_BASELINE,
    workers: int = 1,
) -> Path:
    """Write the full rank-stability battery against the benchmark year."""
    years = sorted(set(years))
    if benchmark_year not in years:
        raise AnalysisError(f"benchmark year {benchmark_year} not among years {years}")
    if len(years) < 2:
        raise AnalysisError("sensitivity analysis needs at least two observation years")
    corpus = load_corpus(directory)
    run = run_analysis(corpus, pub_period, years, threshold, baseline, workers=workers)
    out = _prepare_out(out_dir)

    comparison_years = [y for y in years if y != benchmark_year]
    _write_csv(out / "shift_descriptives.csv", _shift_descriptives_rows(run, comparison_years, benchmark_year))
    _write_csv(out / "stability_summary.csv", _stability_rows(run, benchmark_year))
    _write_csv(out / "spearman.csv", _spearman_rows(run, comparison_years, benchmark_year))
    _write_csv(out / "small_shift_pcts.csv", _small_shift_rows(run, comparison_years, benchmark_year))
    _write_csv(out / "quartile_stats.csv", _quartile_rows(run, comparison_years, benchmark_year))
    _write_csv(out / "rank_ranges.csv", _rank_range_rows(run))
    _write_rankings_csv(out / "rankings.csv", run)
    _write_csv(out / "representativity.csv", run.report.csv_rows())
    _write_medians_csv(out / "medians.csv", run.median_tables)
    RunManifest(
        command="sensitivity",
        input_dir=str(directory),
        pub_period=pub_period,
        observation_years=tuple(years),
        threshold=threshold,
        baseline=baseline,
        benchmark_year=benchmark_year,
        outputs=(
            "shift_descriptives.csv",
            "stability_summary.csv",
            "spearman.csv",
            "small_shift_pcts.csv",
            "quartile_stats.csv",
            "rank_ranges.csv",
            "rankings.csv",
            "representativity.csv",
            "medians.csv",
        ),
    ).write(out)
    return out


def cmd_npc(
    directory: str,
    out_dir: str,
    pub_period: tuple[int, int] = DEFAULT_PERIOD,
    years: Sequence[int] = DEFAULT_YEARS,
    benchmark_year: int = DEFAULT_BENCHMARK,
    threshold: float = DEFAULT_THRESHOLD,
    baseline: str = DEFAULT_BASELINE,
    top_percentile: float = DEFAULT_TOP_PERCENTILE,
    n_perm: int = DEFAULT_PERMUTATIONS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> Path:
    """Top-vs-rest permutation test per UDA plus the Fisher combination."""
    years = sorted(set(years))
    if benchmark_year not in years:
        raise AnalysisError(f"benchmark year {benchmark_year} not among years {years}")
    if len(years) < 2:
        raise AnalysisError("the rank-shift test needs at least two observation years")
    corpus = load_corpus(directory)
    run = run_analysis(corpus, pub_period, years, threshold, baseline, levels=("uda",))

    groups = []
    for uda in run.scopes("uda"):
        bench = run.ranking("uda", uda, benchmark_year)
        try:
            top, _rest = top_partition(bench.scores(), top_percentile)
        except AnalysisError as exc:
            logger.warning("excluding UDA %s from the combined test: %s", uda, exc)
            continue
        ranks = {y: run.ranking("uda", uda, y).display_ranks() for y in years}
        values = {
            u: float(max_rank_shift({y: ranks[y][u] for y in years}, benchmark_year))
            for u in sorted(bench.universities())
        }
        groups.append(UdaGroups(uda_id=uda, values=values, top=top))
    if len(groups) < 2:
        raise AnalysisError(
            f"only {len(groups)} UDA(s) usable for the combined test; need at least 2"
        )
    result = npc_fisher_combine(groups, n_perm=n_perm, seed=seed, workers=workers)

    out = _prepare_out(out_dir)
    _write_csv(out / "npc_results.csv", _npc_rows(result, seed))
    _write_csv(out / "representativity.csv", run.report.csv_rows())
    RunManifest(
        command="npc",
        input_dir=str(directory),
        pub_period=pub_period,
        observation_years=tuple(years),
        threshold=threshold,
        baseline=baseline,
        benchmark_year=benchmark_year,
        top_percentile=top_percentile,
        n_perm=n_perm,
        seed=seed,
        outputs=("npc_results.csv", "representativity.csv"),
    ).write(out)
    return out


def cmd_synth(config_path: str, out_dir: str, seed: int | None = None) -> Path:
    config = SynthConfig.from_file(config_path)
    return generate(config, out_dir, seed=seed)


# ---------------------------------------------------------------------------
# table writers


def _prepare_out(out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_csv(path: Path, rows: Sequence[Sequence[str]]) -> None:
    path.write_text("\n".join(",".join(row) for row in rows) + "\n", encoding="utf-8")


def _fmt(x: float | None, decimals: int = 6) -> str:
    return "NA" if x is None else f"{x:.{decimals}f}"


def _pct(fraction: float) -> str:
    return str(int(math.floor(100.0 * fraction + 0.5)))


def _write_rankings_csv(path: Path, run: AnalysisRun) -> None:
    rows = [["scope_level", "scope_id", "obs_year", "university_id", "score", "rank"]]
    for (level, scope, year) in sorted(run.rankings):
        for entry in run.rankings[(level, scope, year)].entries:
            rows.append(
                [level, scope, str(year), entry.university_id, _fmt(entry.score), str(entry.rank)]
            )
    _write_csv(path, rows)


def _write_medians_csv(path: Path, tables: Mapping[int, MedianTable]) -> None:
    rows = [["pub_year", "category_id", "obs_year", "median"]]
    for year in sorted(tables):
        rows.extend(tables[year].csv_rows()[1:])
    _write_csv(path, rows)


def _each_scope(run: AnalysisRun):
    for level in ("uda", "sds"):
        for scope in run.scopes(level):
            yield level, scope


def _shift_descriptives_rows(run, comparison_years, benchmark_year) -> list[list[str]]:
    header = ["scope_level", "scope_id", "statistic"] + [str(y) for y in comparison_years]
    rows = [header]
    for level, scope in _each_scope(run):
        bench = run.ranking(level, scope, benchmark_year)
        stats = {}
        for year in comparison_years:
            shifts = [a for _s, a in rank_shifts(run.ranking(level, scope, year), bench).values()]
            stats[year] = shift_descriptives(shifts)
        for name in ("mean", "median", "std_dev", "skewness", "kurtosis"):
            rows.append(
                [level, scope, name]
                + [_fmt(getattr(stats[y], name)) for y in comparison_years]
            )
    return rows


def _stability_rows(run, benchmark_year) -> list[list[str]]:
    rows = [
        [
            "scope_level",
            "scope_id",
            "n_universities",
            "pct_change",
            "average",
            "median",
            "std_dev",
            "max_ranking_variation",
        ]
    ]
    for level, scope in _each_scope(run):
        rankings = {y: run.ranking(level, scope, y) for y in run.years_of(level, scope)}
        summary = stability_summary(rankings, benchmark_year)
        rows.append(
            [
                level,
                scope,
                str(summary.n_universities),
                _pct(summary.pct_any_change),
                _fmt(summary.mean_shift_average),
                _fmt(summary.mean_shift_median),
                _fmt(summary.mean_shift_std_dev),
                str(summary.max_ranking_variation),
            ]
        )
    return rows


def _spearman_rows(run, comparison_years, benchmark_year) -> list[list[str]]:
    header = ["scope_level", "scope_id"] + [f"rank_{y}" for y in comparison_years]
    rows = [header]
    for level, scope in _each_scope(run):
        bench = run.ranking(level, scope, benchmark_year)
        values = []
        for year in comparison_years:
            ranking = run.ranking(level, scope, year)
            if len(ranking.entries) < 2:
                values.append("NA")
            else:
                values.append(_fmt(spearman_rho(ranking, bench)))
        rows.append([level, scope] + values)
    return rows


def _small_shift_rows(run, comparison_years, benchmark_year) -> list[list[str]]:
    earliest = comparison_years[0]
    rows = [
        ["scope_level", "scope_id", "n_universities", "comparison_year", "no_change_pct", "leq3_pct"]
    ]
    for level, scope in _each_scope(run):
        bench = run.ranking(level, scope, benchmark_year)
        ranking = run.ranking(level, scope, earliest)
        no_change, small = no_change_and_small_shift_pcts(ranking, bench)
        rows.append(
            [level, scope, str(len(bench.entries)), str(earliest), str(no_change), str(small)]
        )
    return rows


def _quartile_rows(run, comparison_years, benchmark_year) -> list[list[str]]:
    header = ["scope_level", "scope_id", "measure"] + [str(y) for y in comparison_years]
    rows = [header]
    for level, scope in _each_scope(run):
        years = run.years_of(level, scope)
        if len(run.ranking(level, scope, benchmark_year).entries) < 4:
            logger.warning("skipping quartile stats for %s %s: fewer than 4 universities", level, scope)
            continue
        assignments = {
            y: quartile_classes(run.ranking(level, scope, y).scores()) for y in years
        }
        shifts = quartile_shift_stats(assignments, benchmark_year)
        rows.append(
            [level, scope, "avg_class_shift"]
            + [_fmt(shifts[y].average_abs_shift) for y in comparison_years]
        )
        rows.append(
            [level, scope, "outliers"] + [str(shifts[y].outliers) for y in comparison_years]
        )
    return rows


def _rank_range_rows(run) -> list[list[str]]:
    rows = [["scope_level", "scope_id", "university_id", "min_rank", "max_rank"]]
    for level, scope in _each_scope(run):
        years = run.years_of(level, scope)
        ranks_by_univ: dict[str, list[int]] = {}
        for year in years:
            for univ, rank in run.ranking(level, scope, year).display_ranks().items():
                ranks_by_univ.setdefault(univ, []).append(rank)
        for univ in sorted(ranks_by_univ):
            rows.append(
                [level, scope, univ, str(min(ranks_by_univ[univ])), str(max(ranks_by_univ[univ]))]
            )
    return rows


def _npc_rows(result: NpcCombinedResult, seed: int) -> list[list[str]]:
    rows = [["uda_id", "observed_stat", "p_value", "direction", "n_perm", "seed"]]
    for partial in result.partials:
        rows.append(
            [
                partial.scope_id,
                _fmt(partial.observed),
                _fmt(partial.p_value, 3),
                partial.direction,
                str(partial.n_perm),
                str(seed),
            ]
        )
    rows.append(
        [
            "COMBINED",
            _fmt(result.combined_statistic),
            _fmt(result.combined_p, 3),
            result.direction,
            str(result.n_perm),
            str(seed),
        ]
    )
    return rows


# ---------------------------------------------------------------------------
# argument parsing


def _parse_period(text: str) -> tuple[int, int]:
    try:
        start, _, end = text.partition("-")
        return int(start), int(end)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad period {text!r}, expected YYYY-YYYY") from None


def _parse_years(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(y) for y in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad years {text!r}, expected comma-separated") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citewin",
        description="Citation-window sensitivity analysis of university productivity rankings.",
    )
    parser.add_argument("--version", action="version", version=f"citewin {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus directory")
    p.add_argument("directory")

    def common(p: argparse.ArgumentParser, with_years: bool) -> None:
        p.add_argument("directory")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--period", type=_parse_period, default=DEFAULT_PERIOD)
        p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
        p.add_argument("--baseline", choices=("aggregate", "mean"), default=DEFAULT_BASELINE)
        if with_years:
            p.add_argument("--years", type=_parse_years, default=DEFAULT_YEARS)
            p.add_argument("--benchmark", type=int, default=DEFAULT_BENCHMARK)
            p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("rankings", help="productivity rankings for one observation year")
    common(p, with_years=False)
    p.add_argument("--obs-year", type=int, default=DEFAULT_BENCHMARK)
    p.add_argument("--level", choices=("uda", "sds"), default="uda")

    p = sub.add_parser("sensitivity", help="rank-stability statistics across years")
    common(p, with_years=True)

    p = sub.add_parser("npc", help="top-vs-rest permutation tests and Fisher combination")
    common(p, with_years=True)
    p.add_argument("--top-percentile", type=float, default=DEFAULT_TOP_PERCENTILE)
    p.add_argument("--permutations", type=int, default=DEFAULT_PERMUTATIONS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("synth", help="generate a synthetic corpus directory")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.directory)
        if args.command == "rankings":
            out = cmd_rankings(
                args.directory,
                args.out,
                pub_period=args.period,
                obs_year=args.obs_year,
                level=args.level,
                threshold=args.threshold,
                baseline=args.baseline,
            )
        elif args.command == "sensitivity":
            out = cmd_sensitivity(
                args.directory,
                args.out,
                pub_period=args.period,
                years=args.years,
                benchmark_year=args.benchmark,
                threshold=args.threshold,
                baseline=args.baseline,
                workers=args.workers,
            )
        elif args.command == "npc":
            out = cmd_npc(
                args.directory,
                args.out,
                pub_period=args.period,
                years=args.years,
                benchmark_year=args.benchmark,
                threshold=args.threshold,
                baseline=args.baseline,
                top_percentile=args.top_percentile,
                n_perm=args.permutations,
                seed=args.seed,
                workers=args.workers,
            )
        else:
            out = cmd_synth(args.config, args.out, seed=args.seed)
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CitewinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
