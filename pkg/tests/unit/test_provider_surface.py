"""
Static guards for the MCP surface.

Parses the provider sources and `mcp_server.py` with `ast`, so nothing is imported
or executed. Checks that every provider is registered, that every tool declares a
`readOnlyHint` (the read-only filter hides tools without one) and that
`docs/reference.md` lists exactly the tools and resources defined in code.
"""

import ast
import re
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[2]
SRC = REPO_ROOT / "src" / "arnold_waveguide"
PROVIDERS_DIR = SRC / "providers"
SERVER_FILE = SRC / "mcp_server.py"
DOCS_FILE = REPO_ROOT / "docs" / "reference.md"

TOOL_ROW = re.compile(r"^\|[^|]*\|\s*(?:🔒|✏️)\s+`(\w+)`")
RESOURCE_ROW = re.compile(r"^\|\s*`(arnold://[^`]+)`")


def _parse(path: Path) -> ast.Module:
    return ast.parse(path.read_text(encoding="utf-8"), filename=str(path))


def _decorator_calls(attr: str):
    """Yield (function node, decorator call) for every `@<provider>.<attr>(...)`."""
    for path in sorted(PROVIDERS_DIR.glob("*_provider.py")):
        for node in ast.walk(_parse(path)):
            if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                continue
            for decorator in node.decorator_list:
                if isinstance(decorator, ast.Call) and isinstance(decorator.func, ast.Attribute) and decorator.func.attr == attr:
                    yield node, decorator


def _tool_hints() -> dict[str, dict[str, bool]]:
    """Tool name -> boolean hints from its `annotations={...}` literal."""
    tools: dict[str, dict[str, bool]] = {}
    for node, decorator in _decorator_calls("tool"):
        hints: dict[str, bool] = {}
        for keyword in decorator.keywords:
            if keyword.arg == "annotations" and isinstance(keyword.value, ast.Dict):
                for key, value in zip(keyword.value.keys, keyword.value.values):
                    if isinstance(key, ast.Constant) and isinstance(value, ast.Constant) and isinstance(value.value, bool):
                        hints[key.value] = value.value
        tools[node.name] = hints
    return tools


def _resource_uris() -> set[str]:
    return {
        decorator.args[0].value
        for _, decorator in _decorator_calls("resource")
        if decorator.args and isinstance(decorator.args[0], ast.Constant) and isinstance(decorator.args[0].value, str)
    }


def _doc_section(name: str) -> list[str]:
    lines = DOCS_FILE.read_text(encoding="utf-8").splitlines()
    start = lines.index(f"## {name}") + 1
    section = []
    for line in lines[start:]:
        if line.startswith("## "):
            break
        section.append(line)
    return section


class TestRegistration:
    def test_every_exported_provider_is_registered(self):
        exported: set[str] = set()
        for node in ast.walk(_parse(PROVIDERS_DIR / "__init__.py")):
            if isinstance(node, ast.Assign) and any(isinstance(t, ast.Name) and t.id == "__all__" for t in node.targets):
                exported = {elt.value for elt in node.value.elts}
        registered = {
            node.args[0].id
            for node in ast.walk(_parse(SERVER_FILE))
            if isinstance(node, ast.Call) and isinstance(node.func, ast.Attribute) and node.func.attr == "add_provider" and node.args and isinstance(node.args[0], ast.Name)
        }
        assert exported == {"experiments_provider", "resources_provider"}
        assert registered == exported


class TestToolAnnotations:
    def test_every_tool_declares_read_only_hint(self):
        tools = _tool_hints()
        assert tools
        assert [name for name, hints in tools.items() if "readOnlyHint" not in hints] == []

    def test_writing_tools_declare_destructive_hint(self):
        offenders = [name for name, hints in _tool_hints().items() if hints.get("readOnlyHint") is False and "destructiveHint" not in hints]
        assert offenders == []

    @pytest.mark.parametrize("name,read_only", [("find_coupling_resonance", True), ("describe_model", True), ("run_experiment", False)])
    def test_expected_hints(self, name, read_only):
        assert _tool_hints()[name]["readOnlyHint"] is read_only


class TestReferenceDocs:
    def test_tools_table_matches_code(self):
        documented = {m.group(1) for line in _doc_section("Tools") if (m := TOOL_ROW.match(line))}
        assert documented == set(_tool_hints())

    def test_read_only_marker_matches_hint(self):
        hints = _tool_hints()
        for line in _doc_section("Tools"):
            if m := TOOL_ROW.match(line):
                assert ("🔒" in line) is hints[m.group(1)]["readOnlyHint"], m.group(1)

    def test_resources_table_matches_code(self):
        documented = {m.group(1) for line in _doc_section("Resources") if (m := RESOURCE_ROW.match(line))}
        assert documented
        assert documented == _resource_uris()
