"""Offline stand-in model: answers every prompt role for one instance without a network.

Generation roles (dp/lco/lmo) get a perturbed oracle solution from the plugin;
evaluator roles (fe/ed) are answered from the oracle and the verifier, formatted
the way a well-behaved model would reply.
"""

from __future__ import annotations

import random

from ..core import ColoringErrors, RouteErrors, SudokuErrors, ErrorReport
from ..llm.providers import CompletionRequest, ProviderError, ScriptedProvider

GENERATION_ROLES = {"dp", "lco", "lmo"}


def format_llm_errors(report: ErrorReport, coloring=None) -> str:
    if isinstance(report, SudokuErrors):
        if report.syntax_error:
            body = "Syntax is wrong"
        elif report.clean:
            body = "No errors"
        else:
            body = "\n".join(f"{i},{j},{SudokuErrors.CONSTRAINTS[t]}" for i, j, t in report.cells)
        return f"```\n{body}\n```"
    if report.syntax_error:
        return "```t1\nSyntax is wrong\n```"
    if report.clean:
        return "```t3\nNo errors\n```"
    parts = []
    if isinstance(report, ColoringErrors):
        if report.conflict_edges:
            rows = "\n".join(f"{u},{v},{coloring[u]}" for u, v in report.conflict_edges)
            parts.append(f"```t2.1\n{rows}\n```")
        if report.excess_colors > 0:
            parts.append(f"```t2.2\n{report.excess_colors}\n```")
    elif isinstance(report, RouteErrors):
        if report.missing_cities:
            parts.append("```t2.1\n" + ",".join(map(str, report.missing_cities)) + "\n```")
        parts.append(f"```t2.2\n{report.excess_distance:.2f}\n```")
    return "\n".join(parts)


def synthetic_responder(plugin, instance, rng: random.Random, limit: int = 100):
    def respond(request: CompletionRequest) -> str:
        tid = request.template_id or ""
        kind, _, role = tid.partition("_")
        if kind != plugin.kind:
            raise ProviderError(f"synthetic model for {plugin.kind} got template {tid!r}")
        if role in GENERATION_ROLES:
            return plugin.synthetic_answer(instance, rng)
        candidate = plugin.parse(str(request.bindings["candidate"]), instance)
        if role == "fe":
            return f"Fitness score: {plugin.oracle_fitness(candidate, instance):.2f}"
        if role == "ed":
            report = plugin.detect_errors(candidate, instance, limit)
            return format_llm_errors(report, candidate.parsed if candidate.ok else None)
        raise ProviderError(f"unknown role in template id {tid!r}")
    return respond


def synthetic_provider(plugin, instance, seed: int, instance_id: str) -> ScriptedProvider:
    rng = random.Random(f"evogate:{seed}:synthetic:{instance_id}")
    return ScriptedProvider(responder=synthetic_responder(plugin, instance, rng))
