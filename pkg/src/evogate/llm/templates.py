"""Prompt template assets and placeholder rendering."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping

PROBLEMS = ("sk", "gc", "tsp")
ROLES = ("dp", "ed", "fe", "lco", "lmo")
TEMPLATE_IDS = tuple(f"{p}_{r}" for p in PROBLEMS for r in ROLES)

# {name} or {name - operand}; the arithmetic form appears in a few size hints
_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)(?:\s*-\s*([A-Za-z_][A-Za-z0-9_]*|\d+))?\}")


class TemplateError(KeyError):
    pass


@lru_cache(maxsize=None)
def load_template(template_id: str) -> str:
    if template_id not in TEMPLATE_IDS:
        raise TemplateError(f"unknown template id {template_id!r}")
    return resources.files("evogate.llm").joinpath("templates", f"{template_id}.txt").read_text()


def placeholders(body: str) -> set[str]:
    return {m.group(1) if m.group(2) is None else f"{m.group(1)} - {m.group(2)}"
            for m in _PLACEHOLDER.finditer(body)}


def render_text(body: str, bindings: Mapping[str, Any]) -> str:
    def lookup(name: str) -> Any:
        if name not in bindings:
            raise TemplateError(f"unbound placeholder {{{name}}}")
        return bindings[name]

    def sub(m: re.Match) -> str:
        name, operand = m.group(1), m.group(2)
        if operand is None:
            return str(lookup(name))
        rhs = int(operand) if operand.isdigit() else int(lookup(operand))
        return str(int(lookup(name)) - rhs)

    return _PLACEHOLDER.sub(sub, body)


def render(template_id: str, bindings: Mapping[str, Any]) -> str:
    return render_text(load_template(template_id), bindings)
