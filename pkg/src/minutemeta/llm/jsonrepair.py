"""Best-effort JSON extraction from generative-model output.

Repair ladder: direct parse, then code-fence stripping, then first balanced
object extraction, then a tolerant pass (trailing commas, single quotes).
Anything still unparseable raises ParseFailure; callers record it and score
the document as empty rather than crashing.
"""
from __future__ import annotations

import json
import re

from minutemeta.errors import ParseFailure

_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL | re.IGNORECASE)


def _first_balanced_object(text: str) -> str | None:
    start = text.find("{")
    while start != -1:
        depth = 0
        in_string = False
        escape = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escape:
                    escape = False
                elif ch == "\\":
                    escape = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    return text[start : i + 1]
        start = text.find("{", start + 1)
    return None


def _tolerant_fixups(text: str) -> str:
    # trailing commas before } or ]
    fixed = re.sub(r",\s*([}\]])", r"\1", text)
    # single-quoted keys/strings -> double-quoted (best effort)
    if '"' not in fixed and "'" in fixed:
        fixed = fixed.replace("'", '"')
    # python-style literals
    fixed = re.sub(r"\bNone\b", "null", fixed)
    fixed = re.sub(r"\bTrue\b", "true", fixed)
    fixed = re.sub(r"\bFalse\b", "false", fixed)
    return fixed


def repair_json(raw: str):
    """Parse model output into a JSON value, climbing the repair ladder."""
    if raw is None:
        raise ParseFailure("empty response")
    candidates = [raw]
    fenced = _FENCE.search(raw)
    if fenced:
        candidates.append(fenced.group(1))
    stripped = re.sub(r"```(?:json)?", "", raw, flags=re.IGNORECASE).replace("```", "")
    candidates.append(stripped)
    balanced = _first_balanced_object(stripped)
    if balanced:
        candidates.append(balanced)
    for candidate in candidates:
        candidate = candidate.strip()
        if not candidate:
            continue
        try:
            return json.loads(candidate)
        except json.JSONDecodeError:
            pass
        try:
            return json.loads(_tolerant_fixups(candidate))
        except json.JSONDecodeError:
            continue
    raise ParseFailure(f"no parseable JSON in response of {len(raw)} chars")
