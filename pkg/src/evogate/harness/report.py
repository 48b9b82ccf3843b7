"""Markdown tables aggregated from run manifests."""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Any, Iterable

from ..core import round_half_up

METHOD_LABEL = {"dp": "DP", "bon": "BoN", "evo": "Evo"}
METHOD_ORDER = {"dp": 0, "bon": 1, "evo": 2}
PROBLEM_ORDER = ("sk", "gc", "tsp")
PROBLEM_LABEL = {"sk": "SK", "gc": "GC", "tsp": "TSP"}
COLUMNS = {
    "sk": ("CR", "SC", "PS"),
    "gc": ("CR", "SC", "PS", "ECU", "CF"),
    "tsp": ("CR", "PS", "EDM", "MC"),
}
# metrics averaged only over syntactically valid answers
DIAGNOSTIC = {"ECU", "CF", "EDM", "MC"}
PERCENT = {"CR": 100, "SC": 1, "PS": 1, "CF": 100}
DELTA_METRICS = ("CR", "PS")


class ReportError(ValueError):
    pass


def _mean(values: list[float]) -> float | None:
    if not values:
        return None
    return float(sum(Fraction(v) for v in values) / len(values))


def summarize(results: Iterable[dict[str, Any]], problem: str) -> dict[str, float | None]:
    """Mean of each reported metric over finished instances, on the table's scale."""
    ok = [r for r in results if r.get("status") == "ok"]
    out: dict[str, float | None] = {}
    for col in COLUMNS[problem]:
        vals = [r["metrics"][col] for r in ok if r["metrics"].get(col) is not None]
        if col not in DIAGNOSTIC:
            vals = [r["metrics"].get(col) or 0.0 for r in ok]
        m = _mean(vals)
        out[col] = None if m is None else m * PERCENT.get(col, 1)
    return out


def fmt(col: str, value: float | None) -> str:
    if value is None:
        return "-"
    if col in PERCENT:
        return str(round_half_up(value))
    return f"{value:.2f}"


def arrow(diff: float) -> str:
    d = round_half_up(abs(diff))
    if d == 0:
        return "−"
    return f"↑{d}" if diff > 0 else f"↓{d}"


def _row_key(m: dict[str, Any]) -> tuple:
    tags = m.get("config", {}).get("tags", {}) or {}
    return (m["model"], m["method"], tags.get("ablation"), tags.get("setting"))


def _group(manifests: list[dict[str, Any]]):
    groups: dict[tuple, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    order: dict[tuple, Any] = {}
    for m in manifests:
        key = _row_key(m)
        groups[key][m["problem"]].extend(m["results"])
        tags = m.get("config", {}).get("tags", {}) or {}
        order[key] = tags.get("order", 0)
    return groups, order


def _table(header: list[str], rows: list[list[str]]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return lines


def _problems(groups) -> list[str]:
    present = {p for g in groups.values() for p in g}
    return [p for p in PROBLEM_ORDER if p in present]


def main_table(manifests: list[dict[str, Any]]) -> list[str]:
    groups, _ = _group(manifests)
    problems = _problems(groups)
    header = ["Model", "Method"] + [f"{PROBLEM_LABEL[p]} {c}" for p in problems for c in COLUMNS[p]]
    summaries = {k: {p: summarize(v, p) for p, v in g.items()} for k, g in groups.items()}
    keys = sorted(summaries, key=lambda k: (k[0], METHOD_ORDER[k[1]]))
    rows = []
    for key in keys:
        cells = [key[0], METHOD_LABEL[key[1]]]
        for p in problems:
            s = summaries[key].get(p, {})
            cells += [fmt(c, s.get(c)) for c in COLUMNS[p]]
        rows.append(cells)
    lines = _table(header, rows)

    delta_rows = []
    for key in keys:
        if key[1] == "dp":
            continue
        refs = {b: summaries.get((key[0], b, None, None)) for b in ("dp", "bon") if b != key[1]}
        cells = [key[0], METHOD_LABEL[key[1]]]
        have = False
        for p in problems:
            for c in DELTA_METRICS:
                mine = summaries[key].get(p, {}).get(c)
                parts = []
                for b, ref in refs.items():
                    other = (ref or {}).get(p, {}).get(c)
                    if mine is None or other is None:
                        parts.append("-")
                    else:
                        have = True
                        parts.append(f"{arrow(mine - other)} vs {METHOD_LABEL[b]}")
                cells.append(", ".join(parts))
        if have:
            delta_rows.append(cells)
    if delta_rows:
        header = ["Model", "Method"] + [f"{PROBLEM_LABEL[p]} {c}" for p in problems for c in DELTA_METRICS]
        lines += ["", "Differences against the baselines:", ""] + _table(header, delta_rows)
    return lines


def ablation_tables(manifests: list[dict[str, Any]]) -> list[str]:
    by_ablation: dict[str, list[dict[str, Any]]] = defaultdict(list)
    for m in manifests:
        tags = m.get("config", {}).get("tags", {}) or {}
        if tags.get("ablation"):
            by_ablation[tags["ablation"]].append(m)
    lines: list[str] = []
    for name in sorted(by_ablation):
        groups, order = _group(by_ablation[name])
        problems = _problems(groups)
        methods = sorted({k[1] for k in groups}, key=METHOD_ORDER.get)
        settings = sorted({(order[k], k[3], k[0]) for k in groups})
        header = ["Setting", "Model"]
        for p in problems:
            for meth in methods:
                header += [f"{METHOD_LABEL[meth]} {PROBLEM_LABEL[p]} CR", f"{METHOD_LABEL[meth]} {PROBLEM_LABEL[p]} PS"]
            if {"evo", "bon"} <= set(methods):
                header.append(f"{PROBLEM_LABEL[p]} PS Evo−BoN")
        rows = []
        for _, setting, model in settings:
            cells = [str(setting), model]
            for p in problems:
                ps = {}
                for meth in methods:
                    res = groups.get((model, meth, name, setting), {}).get(p)
                    s = summarize(res, p) if res is not None else {}
                    ps[meth] = s.get("PS")
                    cells += [fmt("CR", s.get("CR")), fmt("PS", s.get("PS"))]
                if {"evo", "bon"} <= set(methods):
                    both = ps.get("evo") is not None and ps.get("bon") is not None
                    cells.append(arrow(ps["evo"] - ps["bon"]) if both else "-")
            rows.append(cells)
        lines += ["", f"## Ablation: {name}", ""] + _table(header, rows)
    return lines


def aggregate_report(manifests: list[dict[str, Any]]) -> str:
    """Render manifests as markdown. Pure in its input; manifest order does not matter."""
    if not manifests:
        raise ReportError("no run manifests to report on")
    main = [m for m in manifests if not (m.get("config", {}).get("tags") or {}).get("ablation")]
    lines = ["# Results"]
    incomplete = sorted(m["run_id"] for m in manifests if not m.get("complete", True))
    if incomplete:
        lines += ["", f"Incomplete runs (failed instances excluded): {', '.join(incomplete)}"]
    if main:
        lines += ["", "## Comparison", ""] + main_table(main)
    lines += ablation_tables(manifests)
    return "\n".join(lines).rstrip() + "\n"
