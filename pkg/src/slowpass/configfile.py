"""Flat key=value configuration text: parser and writer.

Grammar, one entry per line:

    # comment (also ';')
    key = value
    dotted.key = value          -> nested dict {"dotted": {"key": value}}
    list.key = 1, 2, 3          -> list of parsed scalars

Scalars parse as int, then float, then the literals true/false, then bare
string. Quotes are optional for strings and stripped when present.
"""

from __future__ import annotations

from .errors import InvalidArgumentError


def _parse_scalar(token: str):
    token = token.strip()
    if len(token) >= 2 and token[0] == token[-1] and token[0] in "'\"":
        return token[1:-1]
    low = token.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def _parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_scalar(tok) for tok in text.split(",") if tok.strip() != ""]
    return _parse_scalar(text)


def parse_config(text: str) -> dict:
    """Parse flat key=value text into a (possibly nested) dict."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith(";"):
            continue
        if "=" not in line:
            raise InvalidArgumentError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise InvalidArgumentError(f"config line {lineno}: empty key")
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise InvalidArgumentError(f"config line {lineno}: key {key!r} clashes with a scalar")
        node[parts[-1]] = _parse_value(value)
    return out


def _format_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(values: dict, prefix: str = "") -> str:
    """Serialize a nested dict back to flat key=value text."""
    lines = []
    for key, value in values.items():
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            lines.append(dump_config(value, prefix=f"{full}."))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{full} = " + ", ".join(_format_scalar(v) for v in value))
        else:
            lines.append(f"{full} = {_format_scalar(value)}")
    return "\n".join(line for line in lines if line)
