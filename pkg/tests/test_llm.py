import json
from pathlib import Path

import httpx
import pytest

from evogate.core import ColoringErrors, RouteErrors, SudokuErrors
from evogate.llm import (
    TEMPLATE_IDS,
    CompletionRequest,
    ExtractionError,
    HttpProvider,
    ProviderAuthError,
    ProviderError,
    RecordingProvider,
    ReplayProvider,
    ScriptedProvider,
    TemplateError,
    code_blocks,
    extract_solution_block,
    load_template,
    parse_llm_errors,
    parse_llm_fitness,
    render,
)
from evogate.llm.templates import placeholders, render_text

GOLDEN = Path(__file__).parent / "golden"


# --- templates -------------------------------------------------------------

def golden_bindings(tid):
    b = json.loads((GOLDEN / "bindings.json").read_text())
    kind, role = tid.split("_")
    return {**b[kind], **b["roles"][role]}


def test_fifteen_templates():
    assert len(TEMPLATE_IDS) == 15
    for tid in TEMPLATE_IDS:
        assert load_template(tid).strip()


@pytest.mark.parametrize("tid", TEMPLATE_IDS)
def test_rendered_template_matches_golden(tid):
    assert render(tid, golden_bindings(tid)) == (GOLDEN / f"{tid}.txt").read_text()


@pytest.mark.parametrize("tid", TEMPLATE_IDS)
def test_solution_roles_ask_for_code_block(tid):
    body = load_template(tid)
    assert "```" in body
    assert "\\" not in body


def test_unbound_placeholder_raises():
    with pytest.raises(TemplateError):
        render("sk_dp", {"puzzle": "x"})
    with pytest.raises(TemplateError):
        load_template("sk_nope")


def test_arithmetic_placeholder():
    assert render_text("max {n - 1}, gap {a - b}", {"n": 10, "a": 9, "b": 3}) == "max 9, gap 6"
    assert placeholders("{x} {y - 1} {z - x}") == {"x", "y - 1", "z - x"}


def test_rendering_is_single_pass():
    # a bound value that itself looks like a placeholder stays literal
    assert render_text("{a}/{b}", {"a": "{b}", "b": "B"}) == "{b}/B"


# --- parsing ---------------------------------------------------------------

def test_last_code_block_wins():
    text = "first\n```\n1,2\n```\nthen\n```python\n3,4\n```\n"
    assert [b.lang for b in code_blocks(text)] == ["", "python"]
    assert extract_solution_block(text) == "3,4"


def test_no_block_raises():
    with pytest.raises(ExtractionError):
        extract_solution_block("just prose, 0,1,2")


@pytest.mark.parametrize("text,score", [
    ("Score: 87.5", 87.5), ("I think 30 then 45.25", 45.25), ("150", 100.0), ("-3", 0.0),
    ("fitness = 1e2", 100.0), ("0.0", 0.0),
])
def test_parse_llm_fitness(text, score):
    assert parse_llm_fitness(text) == score


def test_parse_llm_fitness_without_number():
    with pytest.raises(ExtractionError):
        parse_llm_fitness("no idea")


def test_llm_errors_sudoku():
    assert parse_llm_errors("```\nSyntax is wrong\n```", "sk") == SudokuErrors(True)
    assert parse_llm_errors("```\nNo errors\n```", "sk") == SudokuErrors()
    got = parse_llm_errors("ok\n```\n0,1,row\n2,3,col\n```", "sk")
    assert got == SudokuErrors(cells=((0, 1, 0), (2, 3, 1)))


@pytest.mark.parametrize("text", ["no block", "```\n0,1,diagonal\n```", "```\n9,1,row\n```", "```\na,b,row\n```"])
def test_llm_errors_sudoku_degrades(text, caplog):
    assert parse_llm_errors(text, "sk") == SudokuErrors()
    assert "unusable" in caplog.text


def test_llm_errors_coloring():
    text = "```t2.1\n0,1,2\n3,4,0\n```\n```t2.2\n1\n```"
    assert parse_llm_errors(text, "gc") == ColoringErrors(conflict_edges=((0, 1), (3, 4)), excess_colors=1)
    assert parse_llm_errors("```t1\nSyntax is wrong\n```", "gc") == ColoringErrors(True)
    assert parse_llm_errors("```t3\nNo errors\n```", "gc") == ColoringErrors()


def test_llm_errors_route():
    text = "```t2.1\n3,5\n```\n```t2.2\n12.5\n```"
    assert parse_llm_errors(text, "tsp") == RouteErrors(missing_cities=(3, 5), excess_distance=12.5)


@pytest.mark.parametrize("text", ["```t1\nSyntax is wrong\n```\n```t3\nNo errors\n```",
                                  "```t3\nNo errors\n```\n```t2.2\n1\n```", "```t2.2\nlots\n```", "nothing"])
def test_llm_errors_contradictions_degrade(text):
    assert parse_llm_errors(text, "gc") == ColoringErrors()


def test_llm_errors_unknown_problem():
    with pytest.raises(ValueError):
        parse_llm_errors("", "knapsack")


# --- providers -------------------------------------------------------------

def req(prompt="hi", **kw):
    return CompletionRequest(prompt=prompt, **kw)


def test_request_validation():
    with pytest.raises(ValueError):
        req("")
    with pytest.raises(ValueError):
        req(temperature=-1)
    with pytest.raises(ValueError):
        req(max_tokens=0)


def test_fingerprint_uses_template_and_bindings():
    a = req("p1", template_id="sk_dp", bindings={"puzzle": "x"})
    b = req("p2", template_id="sk_dp", bindings={"puzzle": "x"})
    c = req("p1", template_id="sk_dp", bindings={"puzzle": "y"})
    assert a.fingerprint == b.fingerprint != c.fingerprint
    assert req("p1").fingerprint != req("p2").fingerprint


def _http(handler, **kw):
    sleeps = []
    p = HttpProvider("http://llm.test/v1", "key", transport=httpx.MockTransport(handler),
                     sleep=sleeps.append, **kw)
    return p, sleeps


def _ok(text):
    return httpx.Response(200, json={"choices": [{"message": {"content": text}}]})


def test_http_provider_posts_chat_completion():
    seen = []

    def handler(request):
        seen.append(request)
        return _ok("answer")

    p, _ = _http(handler)
    assert p.complete(req("hello", temperature=0.7, max_tokens=99, model="m")) == "answer"
    body = json.loads(seen[0].content)
    assert str(seen[0].url) == "http://llm.test/v1/chat/completions"
    assert seen[0].headers["authorization"] == "Bearer key"
    assert body == {"model": "m", "messages": [{"role": "user", "content": "hello"}],
                    "temperature": 0.7, "max_tokens": 99}


def test_http_provider_retries_transient_errors():
    calls = iter([httpx.Response(429), httpx.Response(503), _ok("fine")])
    p, sleeps = _http(lambda r: next(calls), backoff=0.5)
    assert p.complete(req()) == "fine"
    assert sleeps == [0.5, 1.0]


def test_http_provider_retries_transport_errors():
    state = {"n": 0}

    def handler(request):
        state["n"] += 1
        if state["n"] == 1:
            raise httpx.ConnectError("down")
        return _ok("back")

    p, _ = _http(handler)
    assert p.complete(req()) == "back"


def test_http_provider_gives_up():
    p, sleeps = _http(lambda r: httpx.Response(500), max_attempts=3)
    with pytest.raises(ProviderError, match="gave up"):
        p.complete(req())
    assert len(sleeps) == 2


def test_http_provider_auth_and_client_errors_fail_fast():
    p, sleeps = _http(lambda r: httpx.Response(401, text="bad key"))
    with pytest.raises(ProviderAuthError):
        p.complete(req())
    p, sleeps = _http(lambda r: httpx.Response(400, text="bad"))
    with pytest.raises(ProviderError):
        p.complete(req())
    assert sleeps == []


def test_http_provider_malformed_payload():
    p, _ = _http(lambda r: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(ProviderError, match="malformed"):
        p.complete(req())


def test_http_provider_reads_env(monkeypatch):
    monkeypatch.setenv("EVOGATE_API_KEY", "envkey")
    monkeypatch.setenv("EVOGATE_BASE_URL", "http://other.test/")
    p = HttpProvider(transport=httpx.MockTransport(lambda r: _ok("x")))
    assert p.url == "http://other.test/v1/chat/completions"
    monkeypatch.delenv("EVOGATE_API_KEY")
    with pytest.raises(ProviderAuthError):
        HttpProvider()


def test_scripted_sequence_and_exhaustion():
    p = ScriptedProvider(["a", "b"])
    assert [p.complete(req()), p.complete(req())] == ["a", "b"]
    with pytest.raises(ProviderError):
        p.complete(req())
    assert p.calls == 3 - 1
    cyc = ScriptedProvider(["a", "b"], cycle=True)
    assert [cyc.complete(req()) for _ in range(3)] == ["a", "b", "a"]
    assert ScriptedProvider([], default="d").complete(req()) == "d"


def test_scripted_keyed_and_file(tmp_path):
    r = req("x", template_id="gc_dp", bindings={"n": 1})
    p = ScriptedProvider({r.fingerprint: "hit"}, mode="keyed")
    assert p.complete(r) == "hit"
    with pytest.raises(ProviderError):
        p.complete(req("other"))
    f = tmp_path / "s.json"
    f.write_text(json.dumps(["one"]))
    assert ScriptedProvider.from_file(f).complete(req()) == "one"


def test_record_then_replay(tmp_path):
    fixture = tmp_path / "rec.jsonl"
    inner = ScriptedProvider(["first", "second", "third"])
    rec = RecordingProvider(inner, fixture)
    same = req("p", template_id="tsp_dp", bindings={"n_cities": 10})
    other = req("q")
    assert [rec.complete(same), rec.complete(other), rec.complete(same)] == ["first", "second", "third"]
    replay = ReplayProvider(fixture)
    assert replay.complete(same) == "first"
    assert replay.complete(same) == "third"
    assert replay.complete(other) == "second"
    with pytest.raises(ProviderError):
        replay.complete(same)
