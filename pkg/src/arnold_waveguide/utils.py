"""
Shared helpers: call logging, MCP error wrapping and artifact file writing.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from functools import wraps
from pathlib import Path
from typing import Any, Literal

import pathvalidate
from fastmcp.resources import ResourceContent, ResourceResult
from fastmcp.tools import ToolResult

from arnold_waveguide.errors import ArnoldWaveguideError
from arnold_waveguide.init import logger


def log_function_call(func: Callable) -> Callable:
    """Log the (clipped) arguments of each call at DEBUG."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        logger.debug("[%s] called with args=%s, kwargs=%s", func.__name__, _short_repr(args), _short_repr(kwargs))
        return func(*args, **kwargs)

    return wrapper


def _short_repr(value: Any, limit: int = 300) -> str:
    """repr() clipped to `limit` characters; matrices would otherwise flood the log."""
    text = repr(value)
    return text if len(text) <= limit else text[:limit] + "...]"


def error_payload(e: BaseException) -> dict[str, Any]:
    """
    Structured description of an exception for tool results.

    Args:
        e: The exception

    Returns:
        Dict with status, category, exit code and message
    """
    if isinstance(e, ArnoldWaveguideError):
        return {"status": "error", "category": e.category, "exit_code": e.exit_code, "message": str(e)}
    return {"status": "error", "category": "internal", "exit_code": 1, "message": str(e)}


def _json_contents(data: Any) -> ResourceResult:
    return ResourceResult(contents=[ResourceContent(content=json.dumps(data), mime_type="application/json")])


def mcp_handler(scope: Literal["tool", "resource"] = "tool") -> Callable:
    """
    Wrap an MCP tool or resource so that failures come back as data instead of raising.

    Tools return `error_payload` as structured content. Resources return a JSON
    document with an `error` message and the same category.

    Args:
        scope: "tool" or "resource"
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            logger.info("[%s] called with args=%s, kwargs=%s", func.__name__, args, kwargs)
            try:
                return func(*args, **kwargs)
            except Exception as e:
                logger.exception("[%s] failed: %s", func.__name__, e)
                payload = error_payload(e)
                if scope == "tool":
                    return ToolResult(structured_content=payload)
                return _json_contents({"error": payload["message"], "category": payload["category"]})

        return wrapper

    return decorator


def json_resource(data: Any) -> ResourceResult:
    """Single 'application/json' item holding `data`."""
    return _json_contents(data)


def sanitize_filename(raw: str) -> str | None:
    """
    Replace characters that are invalid in file names on any platform.

    Returns:
        The cleaned name, or None when only separators and dots were left
    """
    cleaned = pathvalidate.sanitize_filename(raw, replacement_text="_", platform="universal").strip(" .")
    return cleaned or None


def write_if_changed(destination: Path, content: bytes) -> bool:
    """
    Write `content` to `destination` only when the bytes differ.

    Re-running an experiment with identical inputs leaves artifacts untouched,
    modification times included.

    Args:
        destination: Target file; parent folders are created as needed
        content: Bytes to write

    Returns:
        True if the file was (re)written
    """
    if destination.exists() and destination.read_bytes() == content:
        logger.debug("Unchanged artifact %s", destination)
        return False
    destination.parent.mkdir(parents=True, exist_ok=True)
    destination.write_bytes(content)
    return True
